"""Writers for the toolkit's on-disk formats.

Implemented here from the format contract rather than imported from the
selection toolkit, so the two sides of the byte protocol stay independent.
"""

import csv
import struct
from pathlib import Path

import numpy as np

from .errors import IoError, JobError, ManifestConflict

EMB1_MAGIC = b"EMB1"

MANIFEST_HEADER = [
    "model_id",
    "display_name",
    "embedding_dim",
    "param_count",
    "imagenet_accuracy",
    "upstream_dataset_name",
    "upstream_dataset_size",
    "tags",
]


def save_emb1(path, labels: np.ndarray, features: np.ndarray, n_classes: int) -> None:
    """Write one embedding matrix: 16-byte header, u32 labels, f32 rows."""
    n, d = features.shape
    if n < 1 or d < 1:
        raise JobError(f"refusing to write an empty {n} x {d} matrix")
    if labels.shape != (n,):
        raise JobError(f"{n} feature rows but {labels.shape[0]} labels")
    payload = (
        EMB1_MAGIC
        + struct.pack("<III", n, d, n_classes)
        + labels.astype("<u4").tobytes()
        + np.ascontiguousarray(features, dtype="<f4").tobytes()
    )
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def manifest_row(
    model_id: str,
    display_name: str,
    embedding_dim: int,
    n_params: int,
    imagenet_accuracy=None,
    upstream_dataset_name: str = "",
    upstream_dataset_size=None,
    tags=(),
) -> list[str]:
    return [
        model_id,
        display_name,
        str(embedding_dim),
        str(n_params),
        "" if imagenet_accuracy is None else format(imagenet_accuracy, ".6f"),
        upstream_dataset_name,
        "" if upstream_dataset_size is None else str(upstream_dataset_size),
        ";".join(sorted(tags)),
    ]


def append_manifest_row(path, row: list[str]) -> bool:
    """Add one model row, creating the file if needed.

    Re-running with an identical row is a no-op; a row that disagrees with
    an existing entry for the same model_id is an error. Returns True when
    the row was actually written.
    """
    path = Path(path)
    rows = []
    if path.exists():
        try:
            with open(path, "r", newline="", encoding="utf-8") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                if header != MANIFEST_HEADER:
                    raise JobError(f"{path}: not a model manifest (header {header!r})")
                rows = list(reader)
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from None
        for existing in rows:
            if existing and existing[0] == row[0]:
                if existing == row:
                    return False
                raise ManifestConflict(
                    f"{path}: model {row[0]!r} already listed with different fields"
                )
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(MANIFEST_HEADER)
            writer.writerows(rows)
            writer.writerow(row)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None
    return True

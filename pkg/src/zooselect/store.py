"""Embedding and score storage.

EMB1 is the frozen-representation container, little-endian throughout:

    bytes 0..3    magic "EMB1"
    bytes 4..15   u32 n, u32 d, u32 n_classes
    then          n * u32 labels
    then          n * d * f32 features, row-major

Exactly 16 + 4n + 4nd bytes; anything else is a FormatError. Empty matrices
(n = 0) are rejected in both directions, and round trips are bit-exact.

Accuracy and proxy-score tables are plain CSVs. Floats are serialized with
six decimals (round-half-even), which makes save -> load -> save byte-stable.
"""

from __future__ import annotations

import csv
import statistics
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .catalog import ModelCatalog, TaskCatalog, load_model_manifest, load_task_manifest
from .errors import (
    CacheConflictError,
    ConfigError,
    DuplicateRunError,
    FormatError,
    IoError,
    MissingAccuracyError,
    MissingEmbeddingError,
    NumericError,
    RangeError,
)

MAGIC = b"EMB1"
SPLITS = ("train", "val", "test")

ACCURACY_HEADER = ["model_id", "task_id", "run_index", "accuracy"]
PROXY_HEADER = ["model_id", "task_id", "proxy_kind", "score", "config_digest"]

_SAFE_ID = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-")


@dataclass
class EmbeddingMatrix:
    """Frozen features for one (model, task, split)."""

    model_id: str
    task_id: str
    split: str
    n_classes: int
    labels: np.ndarray
    features: np.ndarray

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float32)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise FormatError("features must be a 2-D matrix")
        n, d = self.features.shape
        if n < 1 or d < 1:
            raise FormatError(f"empty embedding matrix ({n} x {d}) rejected")
        if self.labels.shape != (n,):
            raise FormatError(f"labels length {self.labels.shape} does not match n={n}")
        if self.n_classes < 1:
            raise RangeError("n_classes must be >= 1")
        if self.labels.min() < 0 or self.labels.max() >= self.n_classes:
            raise RangeError(f"labels must lie in [0, {self.n_classes})")
        if not np.isfinite(self.features).all():
            raise NumericError("non-finite feature values")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


def save_embedding(matrix: EmbeddingMatrix, path) -> None:
    payload = (
        MAGIC
        + struct.pack("<III", matrix.n, matrix.d, matrix.n_classes)
        + matrix.labels.astype("<u4").tobytes()
        + matrix.features.astype("<f4").tobytes()
    )
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_bytes(payload)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def load_embedding(path, model_id: str = "", task_id: str = "", split: str = "train") -> EmbeddingMatrix:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None
    if len(blob) < 16 or blob[:4] != MAGIC:
        raise FormatError(f"{path}: not an EMB1 file")
    n, d, n_classes = struct.unpack("<III", blob[4:16])
    if n == 0 or d == 0:
        raise FormatError(f"{path}: empty matrix ({n} x {d}) rejected")
    expected = 16 + 4 * n + 4 * n * d
    if len(blob) != expected:
        raise FormatError(f"{path}: size {len(blob)} bytes, header implies {expected}")
    labels = np.frombuffer(blob, dtype="<u4", count=n, offset=16).astype(np.int64)
    features = (
        np.frombuffer(blob, dtype="<f4", count=n * d, offset=16 + 4 * n)
        .reshape(n, d)
        .copy()
    )
    return EmbeddingMatrix(
        model_id=model_id,
        task_id=task_id,
        split=split,
        n_classes=n_classes,
        labels=labels,
        features=features,
    )


def embedding_file_size(n: int, d: int) -> int:
    """Exact on-disk size in bytes for an n x d EMB1 file."""
    return 16 + 4 * n + 4 * n * d


class AccuracyTable:
    """Per-run downstream accuracies with median point aggregates."""

    def __init__(self):
        self._rows: List[Tuple[str, str, int, float]] = []
        self._runs: Dict[Tuple[str, str], Dict[int, float]] = {}

    def add(self, model_id: str, task_id: str, run_index: int, accuracy: float) -> None:
        if not (0.0 <= accuracy <= 1.0):
            raise RangeError(f"accuracy {accuracy} outside [0, 1] for ({model_id}, {task_id})")
        if run_index < 0:
            raise RangeError(f"run_index must be >= 0, got {run_index}")
        cell = self._runs.setdefault((model_id, task_id), {})
        if run_index in cell:
            raise DuplicateRunError(f"duplicate run ({model_id}, {task_id}, {run_index})")
        cell[run_index] = accuracy
        self._rows.append((model_id, task_id, run_index, accuracy))

    def runs(self, model_id: str, task_id: str) -> List[float]:
        cell = self._runs.get((model_id, task_id))
        if not cell:
            raise MissingAccuracyError(f"no accuracy runs for ({model_id}, {task_id})")
        return [cell[k] for k in sorted(cell)]

    def aggregate(self, model_id: str, task_id: str) -> float:
        """Median across runs; even counts average the two middle values."""
        return float(statistics.median(self.runs(model_id, task_id)))

    def has(self, model_id: str, task_id: str) -> bool:
        return (model_id, task_id) in self._runs

    def model_ids(self) -> List[str]:
        seen = dict.fromkeys(m for m, _, _, _ in self._rows)
        return list(seen)

    def task_ids(self) -> List[str]:
        seen = dict.fromkeys(t for _, t, _, _ in self._rows)
        return list(seen)

    def __len__(self) -> int:
        return len(self._rows)


def load_accuracy_csv(path) -> AccuracyTable:
    rows = _read_csv(path, ACCURACY_HEADER)
    table = AccuracyTable()
    for row in rows:
        table.add(row[0], row[1], _int_cell(row[2], path), _float_cell(row[3], path))
    return table


def save_accuracy_csv(table: AccuracyTable, path) -> None:
    rows = [
        [m, t, str(r), format(a, ".6f")]
        for m, t, r, a in sorted(table._rows)
    ]
    _write_csv(path, ACCURACY_HEADER, rows)


@dataclass
class ProxyEntry:
    score: float
    config_digest: str


class ProxyScoreTable:
    """Proxy-score cache keyed by (model, task, kind) with config provenance.

    Reads never surface a score recorded under a different digest, and a
    write that would replace an entry with a different digest is an error
    rather than last-writer-wins.
    """

    def __init__(self):
        self._entries: Dict[Tuple[str, str, str], ProxyEntry] = {}

    def get(self, model_id: str, task_id: str, proxy_kind: str, config_digest: str) -> Optional[float]:
        entry = self._entries.get((model_id, task_id, proxy_kind))
        if entry is None or entry.config_digest != config_digest:
            return None
        return entry.score

    def get_any(self, model_id: str, task_id: str, proxy_kind: str) -> Optional[ProxyEntry]:
        return self._entries.get((model_id, task_id, proxy_kind))

    def put(self, model_id: str, task_id: str, proxy_kind: str, score: float, config_digest: str) -> None:
        if not (0.0 <= score <= 1.0):
            raise RangeError(f"proxy score {score} outside [0, 1]")
        key = (model_id, task_id, proxy_kind)
        existing = self._entries.get(key)
        if existing is not None and existing.config_digest != config_digest:
            raise CacheConflictError(
                f"cache holds {key} under digest {existing.config_digest}, "
                f"refusing write under {config_digest}; use a fresh cache"
            )
        self._entries[key] = ProxyEntry(score, config_digest)

    def __len__(self) -> int:
        return len(self._entries)

    def items(self):
        return self._entries.items()


def load_proxy_csv(path) -> ProxyScoreTable:
    rows = _read_csv(path, PROXY_HEADER)
    table = ProxyScoreTable()
    for row in rows:
        table.put(row[0], row[1], row[2], _float_cell(row[3], path), row[4])
    return table


def save_proxy_csv(table: ProxyScoreTable, path) -> None:
    rows = [
        [m, t, k, format(e.score, ".6f"), e.config_digest]
        for (m, t, k), e in sorted(table.items())
    ]
    _write_csv(path, PROXY_HEADER, rows)


def _int_cell(cell: str, path) -> int:
    try:
        return int(cell)
    except ValueError:
        raise FormatError(f"{path}: not an integer: {cell!r}") from None


def _float_cell(cell: str, path) -> float:
    try:
        return float(cell)
    except ValueError:
        raise FormatError(f"{path}: not a number: {cell!r}") from None


def _read_csv(path, expected_header):
    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise FormatError(f"{path}: empty CSV") from None
            if header != expected_header:
                raise FormatError(f"{path}: bad header {header!r}")
            out = []
            for row in reader:
                if len(row) != len(expected_header):
                    raise FormatError(f"{path}: row has {len(row)} cells, expected {len(expected_header)}")
                out.append(row)
            return out
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from None


def _write_csv(path, header, rows) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def _check_path_id(kind: str, value: str) -> str:
    if not value or not all(c in _SAFE_ID for c in value):
        raise FormatError(f"{kind} {value!r} is not filesystem-safe ([A-Za-z0-9._-] only)")
    return value


class DataStore:
    """Directory layout binding catalogs, embeddings, accuracies, and the cache.

    root/
      models.csv  tasks.csv  accuracy.csv  proxy_scores.csv
      embeddings/<model_id>__<task_id>__<split>.emb1
    """

    def __init__(self, root):
        self.root = Path(root)

    @property
    def models_path(self) -> Path:
        return self.root / "models.csv"

    @property
    def tasks_path(self) -> Path:
        return self.root / "tasks.csv"

    @property
    def accuracy_path(self) -> Path:
        return self.root / "accuracy.csv"

    @property
    def proxy_path(self) -> Path:
        return self.root / "proxy_scores.csv"

    def load_models(self) -> ModelCatalog:
        return load_model_manifest(self.models_path)

    def load_tasks(self) -> TaskCatalog:
        return load_task_manifest(self.tasks_path)

    def load_accuracy(self) -> AccuracyTable:
        return load_accuracy_csv(self.accuracy_path)

    def embedding_path(self, model_id: str, task_id: str, split: str) -> Path:
        if split not in SPLITS:
            raise ConfigError(f"unknown split {split!r}")
        _check_path_id("model_id", model_id)
        _check_path_id("task_id", task_id)
        return self.root / "embeddings" / f"{model_id}__{task_id}__{split}.emb1"

    def has_embedding(self, model_id: str, task_id: str, split: str) -> bool:
        return self.embedding_path(model_id, task_id, split).exists()

    def load_embedding(self, model_id: str, task_id: str, split: str) -> EmbeddingMatrix:
        path = self.embedding_path(model_id, task_id, split)
        if not path.exists():
            raise MissingEmbeddingError(f"no embedding for ({model_id}, {task_id}, {split})")
        return load_embedding(path, model_id=model_id, task_id=task_id, split=split)

    def save_embedding(self, matrix: EmbeddingMatrix) -> None:
        save_embedding(matrix, self.embedding_path(matrix.model_id, matrix.task_id, matrix.split))

    def load_proxy_cache(self) -> ProxyScoreTable:
        if self.proxy_path.exists():
            return load_proxy_csv(self.proxy_path)
        return ProxyScoreTable()

    def save_proxy_cache(self, table: ProxyScoreTable) -> None:
        save_proxy_csv(table, self.proxy_path)

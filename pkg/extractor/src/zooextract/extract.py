"""One extraction job: image folder + backbone -> EMB1 splits + manifest row."""

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backbone, dataset, formats
from .errors import JobError, ModelLoadError


@dataclass(frozen=True)
class ExtractJob:
    model_ref: str
    data_dir: Path
    out_dir: Path
    n_train: int = 800
    n_val: int = 200
    weights_path: Path | None = None
    input_size: int = 224
    batch_size: int = 32

    def validate(self) -> None:
        if not self.model_ref:
            raise JobError("model reference must be non-empty")
        if self.n_train < 1 or self.n_val < 1:
            raise JobError("train and val sizes must be >= 1")
        if self.input_size < 8:
            raise JobError("input size must be >= 8")
        if self.batch_size < 1:
            raise JobError("batch size must be >= 1")


@dataclass(frozen=True)
class ExtractResult:
    model_id: str
    task_id: str
    dim: int
    n_classes: int
    n_train: int
    n_val: int
    embedding_paths: dict = field(default_factory=dict)
    manifest_path: Path | None = None
    row_appended: bool = False


def sanitize_id(text: str) -> str:
    """Fold a model/dataset name into the id charset [a-z0-9._-].

    Double underscores are collapsed because the embedding file layout uses
    "__" to separate id fields.
    """
    out = re.sub(r"[^a-z0-9._-]+", "-", text.lower())
    out = re.sub(r"_{2,}", "_", out).strip("-.")
    if not out:
        raise JobError(f"cannot derive an identifier from {text!r}")
    return out


def run(job: ExtractJob) -> ExtractResult:
    job.validate()
    classes = dataset.scan_classes(job.data_dir)
    train, val = dataset.plan_splits(classes, job.n_train, job.n_val)

    module, meta = backbone.load_backbone(job.model_ref, job.weights_path)
    ref_path = Path(job.model_ref)
    raw_name = ref_path.stem if ref_path.is_file() else job.model_ref
    model_id = sanitize_id(raw_name)
    task_id = sanitize_id(Path(job.data_dir).resolve().name)

    out_dir = Path(job.out_dir)
    paths = {}
    dim = None
    for split, examples in (("train", train), ("val", val)):
        feats = _embed_split(module, examples, job)
        if dim is None:
            dim = feats.shape[1]
        elif feats.shape[1] != dim:
            raise ModelLoadError(f"backbone width changed between splits ({dim} vs {feats.shape[1]})")
        labels = np.array([ex.label for ex in examples], dtype=np.uint32)
        path = out_dir / "embeddings" / f"{model_id}__{task_id}__{split}.emb1"
        formats.save_emb1(path, labels, feats, n_classes=len(classes))
        paths[split] = path

    n_params = backbone.param_count(module)
    if n_params < 1:
        raise ModelLoadError("backbone has no parameters; the manifest schema requires >= 1")
    row = formats.manifest_row(
        model_id,
        raw_name,
        dim,
        n_params,
        imagenet_accuracy=meta.get("imagenet_accuracy"),
        upstream_dataset_name=meta.get("upstream_dataset_name", ""),
        upstream_dataset_size=meta.get("upstream_dataset_size"),
    )
    manifest_path = out_dir / "models.csv"
    appended = formats.append_manifest_row(manifest_path, row)

    return ExtractResult(
        model_id=model_id,
        task_id=task_id,
        dim=dim,
        n_classes=len(classes),
        n_train=len(train),
        n_val=len(val),
        embedding_paths=paths,
        manifest_path=manifest_path,
        row_appended=appended,
    )


def _embed_split(module, examples, job: ExtractJob) -> np.ndarray:
    chunks = []
    for start in range(0, len(examples), job.batch_size):
        batch = dataset.load_batch(examples[start : start + job.batch_size], job.input_size)
        chunks.append(backbone.embed(module, batch))
    return np.vstack(chunks)

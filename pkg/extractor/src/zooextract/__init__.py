"""Export frozen image representations from pretrained backbones."""

from .backbone import embed, load_backbone, param_count, strip_head
from .dataset import Example, load_image, plan_splits, scan_classes
from .errors import (
    DecodeError,
    ExtractError,
    IoError,
    JobError,
    ManifestConflict,
    ModelLoadError,
    SplitTooLarge,
)
from .extract import ExtractJob, ExtractResult, run, sanitize_id
from .formats import MANIFEST_HEADER, append_manifest_row, manifest_row, save_emb1

__all__ = [
    "DecodeError",
    "Example",
    "ExtractError",
    "ExtractJob",
    "ExtractResult",
    "IoError",
    "JobError",
    "MANIFEST_HEADER",
    "ManifestConflict",
    "ModelLoadError",
    "SplitTooLarge",
    "append_manifest_row",
    "embed",
    "load_backbone",
    "load_image",
    "manifest_row",
    "param_count",
    "plan_splits",
    "run",
    "sanitize_id",
    "save_emb1",
    "scan_classes",
    "strip_head",
]

"""Model and task catalogs, manifest CSV I/O, and pool construction.

Catalog order is load order and is the canonical order everywhere: pools keep
it, and every ranking uses it as the final tie-breaker.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional, Sequence

from .errors import (
    ConfigError,
    EmptyPoolError,
    FormatError,
    IoError,
    RangeError,
    UnknownModelError,
)

TASK_GROUPS = ("natural", "specialized", "structured")

# param_count ceiling that keeps every stock ResNet50-backbone variant in,
# including the specialist checkpoints, and everything larger out
RESNET50_PARAM_LIMIT = 23_807_702

MODEL_MANIFEST_HEADER = [
    "model_id",
    "display_name",
    "embedding_dim",
    "param_count",
    "imagenet_accuracy",
    "upstream_dataset_name",
    "upstream_dataset_size",
    "tags",
]

TASK_MANIFEST_HEADER = ["task_id", "group", "n_train", "n_val", "n_test", "n_classes"]


@dataclass(frozen=True)
class ModelRecord:
    """One frozen pretrained model as the search space sees it."""

    model_id: str
    display_name: str
    embedding_dim: int
    param_count: int
    imagenet_accuracy: Optional[float] = None
    upstream_dataset_name: str = ""
    upstream_dataset_size: Optional[int] = None
    tags: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.model_id:
            raise FormatError("model_id must be non-empty")
        if self.embedding_dim < 1:
            raise RangeError(f"model {self.model_id}: embedding_dim must be >= 1")
        if self.param_count < 1:
            raise RangeError(f"model {self.model_id}: param_count must be >= 1")
        if self.imagenet_accuracy is not None and not (0.0 <= self.imagenet_accuracy <= 1.0):
            raise RangeError(f"model {self.model_id}: imagenet_accuracy outside [0, 1]")
        if self.upstream_dataset_size is not None and self.upstream_dataset_size < 1:
            raise RangeError(f"model {self.model_id}: upstream_dataset_size must be >= 1")
        object.__setattr__(self, "tags", frozenset(self.tags))

    @property
    def is_expert(self) -> bool:
        return "expert" in self.tags


@dataclass(frozen=True)
class TaskRecord:
    """One downstream task; sizes describe the fixed probe splits."""

    task_id: str
    group: str
    n_train: int
    n_val: int
    n_test: int
    n_classes: int

    def __post_init__(self):
        if not self.task_id:
            raise FormatError("task_id must be non-empty")
        if self.group not in TASK_GROUPS:
            raise FormatError(f"task {self.task_id}: unknown group {self.group!r}")
        for name in ("n_train", "n_val", "n_test"):
            if getattr(self, name) < 1:
                raise RangeError(f"task {self.task_id}: {name} must be >= 1")
        if self.n_classes < 2:
            raise RangeError(f"task {self.task_id}: n_classes must be >= 2")


class ModelCatalog:
    """Ordered, uniquely keyed collection of ModelRecords."""

    def __init__(self, records: Sequence[ModelRecord]):
        self.records = tuple(records)
        self._pos = {}
        for i, rec in enumerate(self.records):
            if rec.model_id in self._pos:
                raise FormatError(f"duplicate model_id {rec.model_id!r}")
            self._pos[rec.model_id] = i

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[ModelRecord]:
        return iter(self.records)

    def __contains__(self, model_id: str) -> bool:
        return model_id in self._pos

    def get(self, model_id: str) -> ModelRecord:
        try:
            return self.records[self._pos[model_id]]
        except KeyError:
            raise UnknownModelError(f"model_id {model_id!r} not in catalog") from None

    def position(self, model_id: str) -> int:
        if model_id not in self._pos:
            raise UnknownModelError(f"model_id {model_id!r} not in catalog")
        return self._pos[model_id]

    @property
    def model_ids(self) -> tuple:
        return tuple(r.model_id for r in self.records)


class TaskCatalog:
    """Ordered, uniquely keyed collection of TaskRecords."""

    def __init__(self, records: Sequence[TaskRecord]):
        self.records = tuple(records)
        self._by_id = {}
        for rec in self.records:
            if rec.task_id in self._by_id:
                raise FormatError(f"duplicate task_id {rec.task_id!r}")
            self._by_id[rec.task_id] = rec

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[TaskRecord]:
        return iter(self.records)

    def __contains__(self, task_id: str) -> bool:
        return task_id in self._by_id

    def get(self, task_id: str) -> TaskRecord:
        if task_id not in self._by_id:
            raise FormatError(f"task_id {task_id!r} not in catalog")
        return self._by_id[task_id]

    @property
    def task_ids(self) -> tuple:
        return tuple(r.task_id for r in self.records)


def _parse_int(cell: str, what: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise FormatError(f"{what}: not an integer: {cell!r}") from None


def _parse_float(cell: str, what: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise FormatError(f"{what}: not a number: {cell!r}") from None


def load_model_manifest(path) -> ModelCatalog:
    """Read a model manifest CSV; empty cells mean the field is absent."""
    rows = _read_csv(path, MODEL_MANIFEST_HEADER)
    records = []
    for row in rows:
        where = f"model manifest row {row[0]!r}"
        acc = _parse_float(row[4], where) if row[4] != "" else None
        size = _parse_int(row[6], where) if row[6] != "" else None
        tags = frozenset(t for t in row[7].split(";") if t)
        records.append(
            ModelRecord(
                model_id=row[0],
                display_name=row[1],
                embedding_dim=_parse_int(row[2], where),
                param_count=_parse_int(row[3], where),
                imagenet_accuracy=acc,
                upstream_dataset_name=row[5],
                upstream_dataset_size=size,
                tags=tags,
            )
        )
    return ModelCatalog(records)


def save_model_manifest(catalog: ModelCatalog, path) -> None:
    rows = []
    for r in catalog:
        rows.append(
            [
                r.model_id,
                r.display_name,
                str(r.embedding_dim),
                str(r.param_count),
                "" if r.imagenet_accuracy is None else format(r.imagenet_accuracy, ".6f"),
                r.upstream_dataset_name,
                "" if r.upstream_dataset_size is None else str(r.upstream_dataset_size),
                ";".join(sorted(r.tags)),
            ]
        )
    _write_csv(path, MODEL_MANIFEST_HEADER, rows)


def load_task_manifest(path) -> TaskCatalog:
    rows = _read_csv(path, TASK_MANIFEST_HEADER)
    records = []
    for row in rows:
        where = f"task manifest row {row[0]!r}"
        records.append(
            TaskRecord(
                task_id=row[0],
                group=row[1],
                n_train=_parse_int(row[2], where),
                n_val=_parse_int(row[3], where),
                n_test=_parse_int(row[4], where),
                n_classes=_parse_int(row[5], where),
            )
        )
    return TaskCatalog(records)


def save_task_manifest(catalog: TaskCatalog, path) -> None:
    rows = [
        [r.task_id, r.group, str(r.n_train), str(r.n_val), str(r.n_test), str(r.n_classes)]
        for r in catalog
    ]
    _write_csv(path, TASK_MANIFEST_HEADER, rows)


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
            rows = []
            for row in reader:
                if len(row) != len(expected_header):
                    raise FormatError(f"{path}: row has {len(row)} cells, expected {len(expected_header)}")
                rows.append(row)
            return rows
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


POOL_IDS = ("all", "dim2048", "resnet50class", "expert", "imnetaccuracies", "custom")


@dataclass(frozen=True)
class PoolSpec:
    """Declarative pool definition; filters compose conjunctively."""

    pool_id: str
    max_param_count: Optional[int] = None
    max_embedding_dim: Optional[int] = None
    require_imagenet_accuracy: bool = False
    require_tag: Optional[str] = None
    explicit_members: Optional[tuple] = None

    def __post_init__(self):
        if self.pool_id not in POOL_IDS:
            raise ConfigError(f"unknown pool_id {self.pool_id!r}")
        if self.pool_id == "custom" and not self._has_any_constraint():
            raise ConfigError("custom pool needs at least one filter or explicit_members")

    def _has_any_constraint(self) -> bool:
        return (
            self.max_param_count is not None
            or self.max_embedding_dim is not None
            or self.require_imagenet_accuracy
            or self.require_tag is not None
            or self.explicit_members is not None
        )


BUILTIN_POOLS = {
    "all": PoolSpec("all"),
    "dim2048": PoolSpec("dim2048", max_embedding_dim=2048),
    "resnet50class": PoolSpec("resnet50class", max_param_count=RESNET50_PARAM_LIMIT),
    "expert": PoolSpec("expert", require_tag="expert"),
    "imnetaccuracies": PoolSpec("imnetaccuracies", require_imagenet_accuracy=True),
}


@dataclass(frozen=True)
class Pool:
    """Materialized pool: member ids in catalog order."""

    pool_id: str
    model_ids: tuple

    def __len__(self) -> int:
        return len(self.model_ids)

    def __iter__(self):
        return iter(self.model_ids)

    def __contains__(self, model_id: str) -> bool:
        return model_id in self.model_ids


def build_pool(catalog: ModelCatalog, spec: PoolSpec) -> Pool:
    """Apply a PoolSpec against a catalog; members keep catalog order."""
    allowed = None
    if spec.explicit_members is not None:
        for mid in spec.explicit_members:
            if mid not in catalog:
                raise UnknownModelError(f"explicit pool member {mid!r} not in catalog")
        allowed = set(spec.explicit_members)

    members = []
    for rec in catalog:
        if allowed is not None and rec.model_id not in allowed:
            continue
        if spec.max_param_count is not None and rec.param_count > spec.max_param_count:
            continue
        if spec.max_embedding_dim is not None and rec.embedding_dim > spec.max_embedding_dim:
            continue
        if spec.require_imagenet_accuracy and rec.imagenet_accuracy is None:
            continue
        if spec.require_tag is not None and spec.require_tag not in rec.tags:
            continue
        members.append(rec.model_id)
    if not members:
        raise EmptyPoolError(f"pool {spec.pool_id!r} matched no catalog models")
    return Pool(spec.pool_id, tuple(members))


def builtin_pool(catalog: ModelCatalog, pool_id: str) -> Pool:
    if pool_id not in BUILTIN_POOLS:
        raise ConfigError(f"not a builtin pool: {pool_id!r}")
    return build_pool(catalog, BUILTIN_POOLS[pool_id])

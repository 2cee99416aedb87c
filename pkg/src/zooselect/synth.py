"""Deterministic synthetic benchmark generator.

Produces a complete data directory (manifests, embeddings, accuracies,
ground truth) from one seed: every byte is a pure function of the config,
drawn from the SplitMix64 streams in rng.py, so two runs with the same seed
produce identical trees.

Scenario shape, desk-scale mirror of a real zoo search:

* every model m gets a per-task quality q(m, t) inside quality_range;
  per task the non-generalist values form a permuted evenly spaced grid,
  so the intended argmax is unique with a known gap,
* experts (last n_experts models, one distinct bound task each) get
  q + expert_quality_bonus on their bound task, clamped to 1.0: they
  dominate it outright,
* the generalist (first model) takes the largest configured embedding dim
  and the best synthetic ImageNet accuracy; on non-expert tasks its quality
  sits at the top of the range, on expert-bound tasks every ImageNet-carrying
  model draws from the bottom band instead, which is what makes the metadata
  ranking confidently wrong exactly where experts matter,
* embeddings for class c are q * MEAN_SCALE * e_c plus unit Gaussian noise
  in the model's own dimension: separability grows with q and degrades with
  width, so frozen-feature proxies read quality through an honest, imperfect
  channel (the wide generalist pays a proxy penalty its accuracy ignores),
* downstream accuracy is clamp(0.4 + 0.5 q + noise, 0, 1), one run per cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .catalog import (
    ModelCatalog,
    ModelRecord,
    TaskCatalog,
    TaskRecord,
    save_model_manifest,
    save_task_manifest,
)
from .errors import ConfigError, IoError
from .rng import SplitMix64, derive
from .store import AccuracyTable, DataStore, EmbeddingMatrix, save_accuracy_csv

GROUND_TRUTH_HEADER = ["model_id", "task_id", "quality", "is_intended_argmax"]

# class mean for class c is q * MEAN_SCALE along axis c
MEAN_SCALE = 3.0

ACC_BASE = 0.4
ACC_GAIN = 0.5

# stream tags so every purpose has an independent substream
_T_DIMS = 1
_T_QUALITY = 2
_T_EMBED = 3
_T_ACC_NOISE = 4
_T_PARAMS = 5

_SPLIT_INDEX = {"train": 0, "val": 1, "test": 2}


@dataclass(frozen=True)
class SynthConfig:
    n_models: int = 12
    n_tasks: int = 6
    n_experts: int = 2
    seed: int = 0
    n_train: int = 128
    n_val: int = 192
    n_test: int = 64
    n_classes: int = 4
    dims: Tuple[int, ...] = (16, 32, 256)
    quality_range: Tuple[float, float] = (0.3, 0.7)
    expert_quality_bonus: float = 0.5
    accuracy_noise_sd: float = 0.0

    def __post_init__(self):
        if self.n_models < 2:
            raise ConfigError("n_models must be >= 2")
        if self.n_tasks < 1:
            raise ConfigError("n_tasks must be >= 1")
        if not (0 <= self.n_experts <= min(self.n_tasks, self.n_models - 1)):
            raise ConfigError(
                f"n_experts must fit in [0, min(n_tasks, n_models - 1)], got {self.n_experts}"
            )
        if self.n_classes < 2:
            raise ConfigError("n_classes must be >= 2")
        if not self.dims or any(d < 1 for d in self.dims):
            raise ConfigError("dims must be non-empty positive ints")
        if min(self.dims) < self.n_classes:
            raise ConfigError("smallest dim must be >= n_classes (class means are axes)")
        lo, hi = self.quality_range
        if not (0.0 <= lo < hi <= 1.0):
            raise ConfigError(f"quality_range must satisfy 0 <= lo < hi <= 1, got {self.quality_range}")
        if self.n_train < self.n_classes or self.n_val < 1 or self.n_test < 1:
            raise ConfigError("split sizes too small")
        if self.expert_quality_bonus < 0 or self.accuracy_noise_sd < 0:
            raise ConfigError("bonus and noise must be >= 0")


@dataclass
class SynthDesign:
    """Everything about a scenario except the embedding noise."""

    config: SynthConfig
    models: ModelCatalog
    tasks: TaskCatalog
    quality: Dict[Tuple[str, str], float]
    accuracy: Dict[Tuple[str, str], float]
    intended_argmax: Dict[str, str]
    expert_task: Dict[str, str]  # expert model_id -> bound task_id
    generalist_id: str


def _model_ids(n: int) -> List[str]:
    width = max(2, len(str(n - 1)))
    return [f"m{i:0{width}d}" for i in range(n)]


def _task_ids(n: int) -> List[str]:
    return [f"t{i}" for i in range(n)]


def design(config: SynthConfig) -> SynthDesign:
    """Lay out models, tasks, qualities, and accuracies for one seed."""
    n_m, n_t, n_e = config.n_models, config.n_tasks, config.n_experts
    model_ids = _model_ids(n_m)
    task_ids = _task_ids(n_t)
    expert_ids = model_ids[n_m - n_e :] if n_e else []
    nonexpert_ids = model_ids[: n_m - n_e]
    generalist = nonexpert_ids[0]
    expert_task = {expert_ids[i]: task_ids[i] for i in range(n_e)}
    bound_tasks = set(expert_task.values())
    # every other non-expert carries a synthetic ImageNet accuracy
    carriers = nonexpert_ids[0::2]

    lo, hi = config.quality_range
    span = hi - lo

    dim_stream = SplitMix64(derive(config.seed, _T_DIMS))
    dims: Dict[str, int] = {}
    for mid in model_ids:
        dims[mid] = config.dims[dim_stream.choice(len(config.dims))]
    dims[generalist] = max(config.dims)
    for eid in expert_ids:
        dims[eid] = config.dims[0]  # experts share one backbone width

    param_stream = SplitMix64(derive(config.seed, _T_PARAMS))
    params: Dict[str, int] = {}
    for mid in model_ids:
        draw = int(param_stream.uint64(1)[0] % np.uint64(78_000_000))
        params[mid] = 2_000_000 + draw
    for eid in expert_ids:
        params[eid] = 23_500_000

    quality: Dict[Tuple[str, str], float] = {}
    for t_idx, tid in enumerate(task_ids):
        stream = SplitMix64(derive(config.seed, _T_QUALITY, t_idx))
        others = [m for m in model_ids if m != generalist]
        # permuted even grid keeps the per-task ordering unique with known gaps
        grid = [lo + 0.9 * span * j / max(1, len(others) - 1) for j in range(len(others))]
        perm = stream.permutation(len(others))
        for slot, m_idx in enumerate(perm):
            quality[(others[m_idx], tid)] = grid[slot]
        if tid in bound_tasks:
            # metadata champions draw from the bottom band: their upstream
            # fame says nothing about specialist tasks
            low_draws = stream.uniform(len(carriers))
            for mid, u in zip(carriers, low_draws):
                quality[(mid, tid)] = lo + 0.4 * span * float(u)
        else:
            quality[(generalist, tid)] = hi
        for eid, bound in expert_task.items():
            if bound == tid:
                quality[(eid, tid)] = min(1.0, quality[(eid, tid)] + config.expert_quality_bonus)

    noise_stream = SplitMix64(derive(config.seed, _T_ACC_NOISE))
    accuracy: Dict[Tuple[str, str], float] = {}
    for mid in model_ids:
        for tid in task_ids:
            eps = 0.0
            if config.accuracy_noise_sd > 0:
                eps = config.accuracy_noise_sd * float(noise_stream.normal(1)[0])
            raw = ACC_BASE + ACC_GAIN * quality[(mid, tid)] + eps
            accuracy[(mid, tid)] = min(1.0, max(0.0, raw))

    intended: Dict[str, str] = {}
    for tid in task_ids:
        # max() keeps the first of equals, matching catalog-order tie-breaks
        intended[tid] = max(model_ids, key=lambda m: quality[(m, tid)])

    records = []
    imnet_rank = {mid: i for i, mid in enumerate(carriers)}
    for mid in model_ids:
        if mid in expert_task:
            bound = expert_task[mid]
            records.append(
                ModelRecord(
                    model_id=mid,
                    display_name=f"Synth specialist {mid} ({bound})",
                    embedding_dim=dims[mid],
                    param_count=params[mid],
                    upstream_dataset_name="synth-specialist-corpus",
                    upstream_dataset_size=300_000_000,
                    tags=frozenset({"expert"}),
                )
            )
            continue
        acc = None
        size: Optional[int] = None
        name = "synth-web-images"
        if mid in imnet_rank:
            acc = 0.78 - 0.04 * imnet_rank[mid]
            size = 1_280_000
        else:
            pos = nonexpert_ids.index(mid)
            if pos % 4 == 1:
                size = 1_000_000 + 7_000_000 * pos
            else:
                name = "synth-unknown"
        records.append(
            ModelRecord(
                model_id=mid,
                display_name=f"Synth model {mid}",
                embedding_dim=dims[mid],
                param_count=params[mid],
                imagenet_accuracy=acc,
                upstream_dataset_name=name,
                upstream_dataset_size=size,
            )
        )

    group_cycle = ("natural", "structured", "specialized")
    task_records = []
    cycle_i = 0
    for tid in task_ids:
        if tid in bound_tasks:
            group = "specialized"
        else:
            group = group_cycle[cycle_i % 3]
            cycle_i += 1
        task_records.append(
            TaskRecord(
                task_id=tid,
                group=group,
                n_train=config.n_train,
                n_val=config.n_val,
                n_test=config.n_test,
                n_classes=config.n_classes,
            )
        )

    return SynthDesign(
        config=config,
        models=ModelCatalog(records),
        tasks=TaskCatalog(task_records),
        quality=quality,
        accuracy=accuracy,
        intended_argmax=intended,
        expert_task=expert_task,
        generalist_id=generalist,
    )


def _split_sizes(config: SynthConfig) -> Dict[str, int]:
    return {"train": config.n_train, "val": config.n_val, "test": config.n_test}


def make_embedding(
    config: SynthConfig,
    model_idx: int,
    task_idx: int,
    split: str,
    model_id: str,
    task_id: str,
    dim: int,
    q: float,
) -> EmbeddingMatrix:
    """Materialize one split: labels round-robin, rows q*SCALE*e_label + noise."""
    n = _split_sizes(config)[split]
    stream = SplitMix64(derive(config.seed, _T_EMBED, model_idx, task_idx, _SPLIT_INDEX[split]))
    labels = np.arange(n, dtype=np.int64) % config.n_classes
    features = stream.normal(n * dim).reshape(n, dim)
    scale = q * MEAN_SCALE
    features[np.arange(n), labels] += scale
    return EmbeddingMatrix(
        model_id=model_id,
        task_id=task_id,
        split=split,
        n_classes=config.n_classes,
        labels=labels,
        features=features.astype(np.float32),
    )


def generate(config: SynthConfig, out_dir) -> SynthDesign:
    """Write the full benchmark tree under out_dir; returns the design."""
    plan = design(config)
    store = DataStore(out_dir)
    try:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc}") from None

    save_model_manifest(plan.models, store.models_path)
    save_task_manifest(plan.tasks, store.tasks_path)

    table = AccuracyTable()
    for mid in plan.models.model_ids:
        for tid in plan.tasks.task_ids:
            table.add(mid, tid, 0, plan.accuracy[(mid, tid)])
    save_accuracy_csv(table, store.accuracy_path)

    gt_rows = []
    for mid in plan.models.model_ids:
        for tid in plan.tasks.task_ids:
            gt_rows.append(
                [
                    mid,
                    tid,
                    format(plan.quality[(mid, tid)], ".6f"),
                    "1" if plan.intended_argmax[tid] == mid else "0",
                ]
            )
    from .catalog import _write_csv  # same canonical writer as the manifests

    _write_csv(store.root / "ground_truth.csv", GROUND_TRUTH_HEADER, gt_rows)

    for m_idx, mid in enumerate(plan.models.model_ids):
        dim = plan.models.get(mid).embedding_dim
        for t_idx, tid in enumerate(plan.tasks.task_ids):
            q = plan.quality[(mid, tid)]
            for split in ("train", "val", "test"):
                matrix = make_embedding(config, m_idx, t_idx, split, mid, tid, dim, q)
                store.save_embedding(matrix)
    return plan

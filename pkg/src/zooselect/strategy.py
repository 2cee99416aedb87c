"""Ranking strategies over a pool and budgeted selection.

Every strategy emits a full permutation of the pool; a budget-B selection is
always the length-B prefix, so nested budgets give nested selections. All
orderings bottom out in catalog order, which makes them total and stable
under any permutation of the input rows.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .catalog import ModelCatalog, Pool
from .errors import (
    BudgetTooLargeError,
    ConfigError,
    IoError,
    MissingScoreError,
)
from .store import AccuracyTable

SELECTION_HEADER = ["strategy_id", "pool_id", "task_id", "budget", "rank", "model_id"]

STRATEGY_IDS = ("agnostic", "knn", "linear", "hybrid-knn", "hybrid-linear", "oracle-agnostic")


@dataclass(frozen=True)
class Ranking:
    """A strategy's full ordering of one pool (task_id empty when task-free)."""

    strategy_id: str
    pool_id: str
    task_id: str
    model_ids: Tuple[str, ...]

    def __len__(self) -> int:
        return len(self.model_ids)


@dataclass(frozen=True)
class Selection:
    strategy_id: str
    pool_id: str
    task_id: str
    budget: int
    model_ids: Tuple[str, ...]


def _agnostic_key(catalog: ModelCatalog, model_id: str):
    rec = catalog.get(model_id)
    pos = catalog.position(model_id)
    if rec.imagenet_accuracy is not None:
        return (0, -rec.imagenet_accuracy, 0, -rec.param_count, pos)
    if rec.upstream_dataset_size is not None:
        return (1, 0, -rec.upstream_dataset_size, -rec.param_count, pos)
    return (1, 1, 0, -rec.param_count, pos)


def rank_task_agnostic(pool: Pool, catalog: ModelCatalog) -> Ranking:
    """Metadata-only ordering: ImageNet accuracy first, then upstream size.

    Models with a known ImageNet accuracy come first (descending); the rest
    follow by upstream dataset size (descending, unknown size last). Ties at
    every level fall back to parameter count (descending), then catalog order.
    """
    ordered = sorted(pool.model_ids, key=lambda m: _agnostic_key(catalog, m))
    return Ranking("agnostic", pool.pool_id, "", tuple(ordered))


def _require_scores(pool: Pool, scores: Mapping[str, float], task_id: str) -> None:
    missing = [m for m in pool if m not in scores]
    if missing:
        raise MissingScoreError(
            f"no proxy score for task {task_id!r}: " + ", ".join(missing)
        )


def rank_task_aware(
    pool: Pool,
    task_id: str,
    scores: Mapping[str, float],
    catalog: ModelCatalog,
    proxy_kind: str,
) -> Ranking:
    """Order by proxy score (descending); ties take the task-agnostic order."""
    _require_scores(pool, scores, task_id)
    agnostic = rank_task_agnostic(pool, catalog).model_ids
    agnostic_pos = {m: i for i, m in enumerate(agnostic)}
    ordered = sorted(pool.model_ids, key=lambda m: (-scores[m], agnostic_pos[m]))
    return Ranking(proxy_kind, pool.pool_id, task_id, tuple(ordered))


def rank_hybrid(
    pool: Pool,
    task_id: str,
    scores: Mapping[str, float],
    catalog: ModelCatalog,
    proxy_kind: str,
) -> Ranking:
    """Task-agnostic top-1 first, then the task-aware order minus that model."""
    agnostic_first = rank_task_agnostic(pool, catalog).model_ids[0]
    aware = rank_task_aware(pool, task_id, scores, catalog, proxy_kind).model_ids
    ordered = (agnostic_first,) + tuple(m for m in aware if m != agnostic_first)
    return Ranking(f"hybrid-{proxy_kind}", pool.pool_id, task_id, ordered)


def rank_oracle_task_agnostic(
    pool: Pool,
    table: AccuracyTable,
    catalog: ModelCatalog,
    tasks: Optional[Sequence[str]] = None,
) -> Ranking:
    """Order by mean aggregate accuracy across tasks (descending).

    Uses held-out downstream results, so it is an upper reference for
    task-agnostic strategies, not something a search could run cheaply.
    """
    task_ids = list(tasks) if tasks is not None else table.task_ids()
    if not task_ids:
        raise ConfigError("oracle ranking needs at least one task")
    means = {
        m: sum(table.aggregate(m, t) for t in task_ids) / len(task_ids)
        for m in pool
    }
    pos = {m: catalog.position(m) for m in pool}
    ordered = sorted(pool.model_ids, key=lambda m: (-means[m], pos[m]))
    return Ranking("oracle-agnostic", pool.pool_id, "", tuple(ordered))


def select_top(ranking: Ranking, budget: int) -> Selection:
    """The length-B prefix of a ranking."""
    if budget < 1:
        raise ConfigError(f"budget must be >= 1, got {budget}")
    if budget > len(ranking):
        raise BudgetTooLargeError(
            f"budget {budget} exceeds pool size {len(ranking)} for {ranking.strategy_id!r}"
        )
    return Selection(
        ranking.strategy_id,
        ranking.pool_id,
        ranking.task_id,
        budget,
        ranking.model_ids[:budget],
    )


def select_hybrid(
    pool: Pool,
    task_id: str,
    scores: Mapping[str, float],
    catalog: ModelCatalog,
    proxy_kind: str,
    budget: int,
) -> Selection:
    return select_top(rank_hybrid(pool, task_id, scores, catalog, proxy_kind), budget)


def save_selections(selections: Iterable[Selection], path) -> None:
    """selections CSV: one row per (selection, rank), rank is 1-based."""
    rows: List[List[str]] = []
    for sel in selections:
        for rank, model_id in enumerate(sel.model_ids, start=1):
            rows.append(
                [sel.strategy_id, sel.pool_id, sel.task_id, str(sel.budget), str(rank), model_id]
            )
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SELECTION_HEADER)
            writer.writerows(rows)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None

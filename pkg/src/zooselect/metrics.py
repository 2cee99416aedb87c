"""Regret metrics, budget curves, and correlation diagnostics.

Point performance of a (model, task) cell is the median-of-runs aggregate
from the accuracy table. The oracle value of a pool on a task is the best
aggregate any member reaches; a selection's achieved value is the best
aggregate inside the selection. Regret compares the two.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .catalog import ModelCatalog, Pool, TaskRecord
from .errors import (
    ConfigError,
    IoError,
    LengthMismatchError,
    RangeError,
    UndefinedValueError,
)
from .store import AccuracyTable
from .strategy import Ranking, select_top

REGRET_HEADER = [
    "pool_id",
    "task_id",
    "task_group",
    "strategy_id",
    "budget",
    "oracle",
    "achieved",
    "abs_regret",
    "rel_regret",
    "log_odds_regret",
]

CURVE_HEADER = ["pool_id", "strategy_id", "budget", "fraction_optimal"]

MIN_BUDGET_HEADER = ["task_id", "pool_id", "strategy_id", "min_budget"]

# serialized stand-in for values the metric leaves undefined; never 0
UNDEFINED_TOKEN = "undefined"


def _check_unit(name: str, value: float) -> None:
    if not (0.0 <= value <= 1.0):
        raise RangeError(f"{name} {value} outside [0, 1]")


def oracle_value(pool: Pool, task_id: str, table: AccuracyTable) -> float:
    """Best aggregate accuracy any pool member reaches on the task."""
    return max(table.aggregate(m, task_id) for m in pool)


def achieved_value(model_ids: Sequence[str], task_id: str, table: AccuracyTable) -> float:
    """Best aggregate accuracy inside a selection; the selector is assumed
    to fine-tune everything it selected and keep the best."""
    if not model_ids:
        raise ConfigError("achieved_value of an empty selection")
    return max(table.aggregate(m, task_id) for m in model_ids)


def absolute_regret(
    pool: Pool, model_ids: Sequence[str], task_id: str, table: AccuracyTable
) -> float:
    return oracle_value(pool, task_id, table) - achieved_value(model_ids, task_id, table)


def relative_delta(s1: float, s2: float) -> float:
    """(s1 - s2) scaled by the headroom above the weaker score.

    Positive means s1 is better; antisymmetric in its arguments; 0 when both
    scores are perfect (no headroom left to compare in).
    """
    _check_unit("s1", s1)
    _check_unit("s2", s2)
    low = min(s1, s2)
    if low == 1.0:
        return 0.0
    return (s1 - s2) / (1.0 - low)


def relative_regret(oracle: float, achieved: float) -> float:
    return relative_delta(oracle, achieved)


def log_odds_delta(s1: float, s2: float) -> float:
    """logit(s1) - logit(s2); undefined at the endpoints 0 and 1."""
    _check_unit("s1", s1)
    _check_unit("s2", s2)
    if s1 in (0.0, 1.0) or s2 in (0.0, 1.0):
        raise UndefinedValueError(f"log-odds undefined at endpoint: s1={s1}, s2={s2}")
    return math.log(s1 / (1.0 - s1)) - math.log(s2 / (1.0 - s2))


def log_relative_delta(s1: float, s2: float) -> float:
    """ln of relative_delta; an alternate gap reading, only defined for s1 > s2
    with headroom below 1. Kept separate because it is not antisymmetric."""
    value = relative_delta(s1, s2)
    if value <= 0.0:
        raise UndefinedValueError(f"log relative delta undefined for s1={s1}, s2={s2}")
    return math.log(value)


def budget_to_zero_regret(ranking: Ranking, pool: Pool, task_id: str, table: AccuracyTable) -> int:
    """Smallest prefix length whose achieved value equals the pool oracle."""
    target = oracle_value(pool, task_id, table)
    best = -math.inf
    for i, model_id in enumerate(ranking.model_ids, start=1):
        agg = table.aggregate(model_id, task_id)
        if agg > best:
            best = agg
        if best == target:
            return i
    raise ConfigError(
        f"ranking for {ranking.strategy_id!r} never reaches the oracle; "
        "is it a permutation of the pool?"
    )


@dataclass(frozen=True)
class BudgetCurve:
    pool_id: str
    strategy_id: str
    # fractions[b - 1] = share of tasks solved optimally within budget b
    fractions: Tuple[float, ...]


def budget_curve(
    rankings_by_task: Mapping[str, Ranking], pool: Pool, table: AccuracyTable
) -> BudgetCurve:
    """Fraction of tasks at zero regret per budget, for one strategy."""
    if not rankings_by_task:
        raise ConfigError("budget_curve needs at least one task")
    task_ids = list(rankings_by_task)
    strategy_ids = {r.strategy_id for r in rankings_by_task.values()}
    if len(strategy_ids) != 1:
        raise ConfigError(f"budget_curve mixes strategies: {sorted(strategy_ids)}")
    min_budgets = [
        budget_to_zero_regret(rankings_by_task[t], pool, t, table) for t in task_ids
    ]
    size = len(pool)
    fractions = tuple(
        sum(1 for mb in min_budgets if mb <= b) / len(task_ids)
        for b in range(1, size + 1)
    )
    return BudgetCurve(pool.pool_id, strategy_ids.pop(), fractions)


@dataclass(frozen=True)
class RegretRow:
    pool_id: str
    task_id: str
    task_group: str
    strategy_id: str
    budget: int
    oracle: float
    achieved: float
    abs_regret: float
    rel_regret: float
    log_odds_regret: Optional[float]


def regret_row(
    pool: Pool, task: TaskRecord, ranking: Ranking, budget: int, table: AccuracyTable
) -> RegretRow:
    selection = select_top(ranking, budget)
    oracle = oracle_value(pool, task.task_id, table)
    achieved = achieved_value(selection.model_ids, task.task_id, table)
    try:
        log_odds: Optional[float] = log_odds_delta(oracle, achieved)
    except UndefinedValueError:
        log_odds = None
    return RegretRow(
        pool_id=pool.pool_id,
        task_id=task.task_id,
        task_group=task.group,
        strategy_id=ranking.strategy_id,
        budget=budget,
        oracle=oracle,
        achieved=achieved,
        abs_regret=oracle - achieved,
        rel_regret=relative_regret(oracle, achieved),
        log_odds_regret=log_odds,
    )


def _fmt(value: Optional[float]) -> str:
    return UNDEFINED_TOKEN if value is None else format(value, ".6f")


def save_regret_report(rows: Sequence[RegretRow], path) -> None:
    out = [
        [
            r.pool_id,
            r.task_id,
            r.task_group,
            r.strategy_id,
            str(r.budget),
            _fmt(r.oracle),
            _fmt(r.achieved),
            _fmt(r.abs_regret),
            _fmt(r.rel_regret),
            _fmt(r.log_odds_regret),
        ]
        for r in rows
    ]
    _write_csv(path, REGRET_HEADER, out)


def save_budget_curves(curves: Sequence[BudgetCurve], path) -> None:
    out = []
    for c in curves:
        for b, frac in enumerate(c.fractions, start=1):
            out.append([c.pool_id, c.strategy_id, str(b), _fmt(frac)])
    _write_csv(path, CURVE_HEADER, out)


def save_min_budgets(rows: Sequence[Tuple[str, str, str, int]], path) -> None:
    """rows: (task_id, pool_id, strategy_id, min_budget)."""
    _write_csv(path, MIN_BUDGET_HEADER, [[t, p, s, str(b)] for t, p, s, b in rows])


def _write_csv(path, header, rows) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def pearson(xs: Sequence[float], ys: Sequence[float]) -> Optional[float]:
    """Sample Pearson correlation; None when either side has zero variance.

    None is a distinct reported state (serialized as 'undefined'), never
    silently collapsed to 0.
    """
    if len(xs) != len(ys):
        raise LengthMismatchError(f"pearson inputs differ in length: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise LengthMismatchError("pearson needs at least 2 points")
    # constant input means zero variance by definition; the summed check
    # below can miss it when the mean picks up rounding error
    if all(x == xs[0] for x in xs) or all(y == ys[0] for y in ys):
        return None
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = vx = vy = 0.0
    for x, y in zip(xs, ys):
        dx = x - mx
        dy = y - my
        cov += dx * dy
        vx += dx * dx
        vy += dy * dy
    if vx == 0.0 or vy == 0.0:
        return None
    r = cov / (math.sqrt(vx) * math.sqrt(vy))
    return max(-1.0, min(1.0, r))


def knn_dim_correlation(
    task_id: str, catalog: ModelCatalog, knn_scores: Mapping[str, float]
) -> Optional[float]:
    """Correlation between embedding size and the best kNN score at that size.

    Collapsing to the per-dimension best keeps one point per distinct width,
    so a single heavily populated width cannot dominate. None when fewer than
    two distinct widths are present or the scores have no variance.
    """
    best: Dict[int, float] = {}
    for model_id, score in knn_scores.items():
        dim = catalog.get(model_id).embedding_dim
        if dim not in best or score > best[dim]:
            best[dim] = score
    if len(best) < 2:
        return None
    dims = sorted(best)
    return pearson([float(d) for d in dims], [best[d] for d in dims])


@dataclass(frozen=True)
class CorrelationDemo:
    """Outcome of the identical-accuracies construction: every strategy is
    vacuously optimal while accuracy correlations are all undefined."""

    pool_id: str
    task_id: str
    strategy_regrets: Dict[str, float]
    imagenet_accuracy_correlation: Optional[float]
    proxy_correlation: Optional[float]


def correlation_limit_demo() -> CorrelationDemo:
    """Why low regret does not imply informative correlation.

    Five models, one task, every aggregate accuracy identical: whatever any
    strategy picks at B=1 is optimal (regret 0 across the board), yet both
    correlation diagnostics are undefined because the accuracy column has
    zero variance.
    """
    from .catalog import ModelCatalog, ModelRecord, Pool

    records = [
        ModelRecord("demo_a", "Demo A", 512, 4_000_000, imagenet_accuracy=0.71),
        ModelRecord("demo_b", "Demo B", 1024, 9_000_000, imagenet_accuracy=0.76),
        ModelRecord("demo_c", "Demo C", 2048, 23_000_000, imagenet_accuracy=0.68),
        ModelRecord("demo_d", "Demo D", 1536, 52_000_000),
        ModelRecord("demo_e", "Demo E", 768, 11_000_000),
    ]
    catalog = ModelCatalog(records)
    pool = Pool("custom", tuple(r.model_id for r in records))
    task_id = "demo_task"

    table = AccuracyTable()
    for rec in records:
        table.add(rec.model_id, task_id, 0, 0.7)

    proxy_scores = {"demo_a": 0.52, "demo_b": 0.61, "demo_c": 0.44, "demo_d": 0.58, "demo_e": 0.49}

    from .strategy import rank_hybrid, rank_task_agnostic, rank_task_aware

    rankings = [
        rank_task_agnostic(pool, catalog),
        rank_task_aware(pool, task_id, proxy_scores, catalog, "knn"),
        rank_hybrid(pool, task_id, proxy_scores, catalog, "knn"),
    ]
    regrets = {}
    for ranking in rankings:
        top1 = select_top(ranking, 1)
        regrets[ranking.strategy_id] = relative_regret(
            oracle_value(pool, task_id, table),
            achieved_value(top1.model_ids, task_id, table),
        )

    aggregates = [table.aggregate(r.model_id, task_id) for r in records]
    with_acc = [r for r in records if r.imagenet_accuracy is not None]
    imnet_corr = pearson(
        [r.imagenet_accuracy for r in with_acc],
        [table.aggregate(r.model_id, task_id) for r in with_acc],
    )
    proxy_corr = pearson([proxy_scores[r.model_id] for r in records], aggregates)
    return CorrelationDemo(pool.pool_id, task_id, regrets, imnet_corr, proxy_corr)

"""Command-line interface.

Subcommands: synth, proxy, rank, report, demo-correlation. Numeric output is
printed with six decimals (round-half-even). Failures exit nonzero after one
machine-parseable line: ERROR <code>: <detail>. Every command is idempotent
and its outputs are independent of --jobs.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path
from typing import Dict, List, Mapping

from . import charts, metrics, proxy, strategy, synth
from .catalog import BUILTIN_POOLS, ModelCatalog, Pool, TaskCatalog, builtin_pool
from .errors import ConfigError, MissingScoreError, ZooselectError
from .store import DataStore, ProxyScoreTable

PROXY_STRATEGIES = {"knn": "knn", "linear": "linear", "hybrid-knn": "knn", "hybrid-linear": "linear"}


def _fmt(value: float) -> str:
    return format(value, ".6f")


def _common_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--data-dir", default=".", help="benchmark data directory")
    sub.add_argument("--out", default=None, help="output directory (default: <data-dir>/report)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--jobs", type=int, default=1, help="parallel proxy evaluations")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zooselect",
        description="Budgeted pretrained-model selection on frozen embeddings",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_synth = subs.add_parser("synth", help="generate a deterministic synthetic benchmark")
    _common_flags(p_synth)
    p_synth.add_argument("--models", type=int, default=12)
    p_synth.add_argument("--tasks", type=int, default=6)
    p_synth.add_argument("--experts", type=int, default=2)
    p_synth.add_argument("--train", type=int, default=128)
    p_synth.add_argument("--val", type=int, default=192)
    p_synth.add_argument("--test", type=int, default=64)
    p_synth.add_argument("--classes", type=int, default=4)
    p_synth.add_argument("--dims", default="16,32,256", help="comma-separated dims to sample from")
    p_synth.add_argument("--quality-range", default="0.3,0.7")
    p_synth.add_argument("--expert-bonus", type=float, default=0.5)
    p_synth.add_argument("--noise-sd", type=float, default=0.0)
    p_synth.set_defaults(func=cmd_synth)

    p_proxy = subs.add_parser("proxy", help="score pool members with frozen-feature proxies")
    _common_flags(p_proxy)
    p_proxy.add_argument("--pool", default="all", choices=sorted(BUILTIN_POOLS))
    p_proxy.add_argument("--kind", default="all", choices=("knn", "linear", "all"))
    p_proxy.add_argument("--k", type=int, default=1)
    p_proxy.add_argument("--lrs", default="0.1,0.01")
    p_proxy.add_argument("--steps", type=int, default=2500)
    p_proxy.add_argument("--batch-size", type=int, default=512)
    p_proxy.add_argument("--repeats", type=int, default=5)
    p_proxy.set_defaults(func=cmd_proxy)

    p_rank = subs.add_parser("rank", help="write budgeted selections per strategy and task")
    _common_flags(p_rank)
    p_rank.add_argument("--pool", default="all", choices=sorted(BUILTIN_POOLS))
    p_rank.add_argument("--strategies", default="all")
    p_rank.add_argument("--budgets", default="1,2")
    p_rank.set_defaults(func=cmd_rank)

    p_report = subs.add_parser("report", help="regret report, budget curves, charts")
    _common_flags(p_report)
    p_report.add_argument("--pools", default="all")
    p_report.add_argument("--strategies", default="all")
    p_report.add_argument("--budgets", default="1,2")
    p_report.set_defaults(func=cmd_report)

    p_demo = subs.add_parser(
        "demo-correlation", help="show zero regret coexisting with undefined correlation"
    )
    p_demo.set_defaults(func=cmd_demo)
    return parser


def _parse_ints(text: str, what: str) -> List[int]:
    try:
        values = [int(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise ConfigError(f"bad {what}: {text!r}") from None
    if not values:
        raise ConfigError(f"empty {what}")
    return values


def _parse_floats(text: str, what: str) -> List[float]:
    try:
        values = [float(x) for x in text.split(",") if x != ""]
    except ValueError:
        raise ConfigError(f"bad {what}: {text!r}") from None
    if not values:
        raise ConfigError(f"empty {what}")
    return values


def cmd_synth(args) -> int:
    lo_hi = _parse_floats(args.quality_range, "--quality-range")
    if len(lo_hi) != 2:
        raise ConfigError(f"--quality-range needs lo,hi, got {args.quality_range!r}")
    config = synth.SynthConfig(
        n_models=args.models,
        n_tasks=args.tasks,
        n_experts=args.experts,
        seed=args.seed,
        n_train=args.train,
        n_val=args.val,
        n_test=args.test,
        n_classes=args.classes,
        dims=tuple(_parse_ints(args.dims, "--dims")),
        quality_range=(lo_hi[0], lo_hi[1]),
        expert_quality_bonus=args.expert_bonus,
        accuracy_noise_sd=args.noise_sd,
    )
    out_dir = Path(args.out) if args.out else Path(args.data_dir)
    plan = synth.generate(config, out_dir)
    n_files = len(plan.models) * len(plan.tasks) * 3
    print(
        f"synth: wrote {len(plan.models)} models, {len(plan.tasks)} tasks, "
        f"{n_files} embedding files under {out_dir}"
    )
    return 0


def cmd_proxy(args) -> int:
    store = DataStore(args.data_dir)
    catalog = store.load_models()
    tasks = store.load_tasks()
    pool = builtin_pool(catalog, args.pool)
    kinds = ("knn", "linear") if args.kind == "all" else (args.kind,)
    cache = store.load_proxy_cache()
    for kind in kinds:
        if kind == "knn":
            cfg = proxy.KnnConfig(k=args.k)
        else:
            cfg = proxy.LinearEvalConfig(
                learning_rates=tuple(_parse_floats(args.lrs, "--lrs")),
                steps=args.steps,
                batch_size=args.batch_size,
                repeats=args.repeats,
                seed=args.seed,
            )
        for task in tasks:
            result = proxy.score_pool(
                pool, task.task_id, kind, store, cfg=cfg, jobs=args.jobs, cache=cache
            )
            if result.computed:
                # persist per task so an interrupted run keeps its progress
                store.save_proxy_cache(cache)
            print(
                f"proxy {kind} {task.task_id}: computed {len(result.computed)}, "
                f"cache hits {len(result.cache_hits)}"
            )
    print(f"proxy cache: {store.proxy_path}")
    return 0


def _strategy_list(text: str) -> List[str]:
    if text == "all":
        return list(strategy.STRATEGY_IDS)
    chosen = [s for s in text.split(",") if s != ""]
    if not chosen:
        raise ConfigError("empty strategy list")
    for sid in chosen:
        if sid not in strategy.STRATEGY_IDS:
            raise ConfigError(f"unknown strategy {sid!r} (known: {', '.join(strategy.STRATEGY_IDS)})")
    return chosen


def _pool_list(text: str, catalog: ModelCatalog) -> List[Pool]:
    names = [p for p in text.split(",") if p != ""]
    if not names:
        raise ConfigError("empty pool list")
    pools = []
    for name in names:
        pools.append(builtin_pool(catalog, name))
    return pools


def _task_scores(
    cache: ProxyScoreTable, pool: Pool, task_id: str, kind: str
) -> Dict[str, float]:
    scores = {}
    missing = []
    for model_id in pool:
        entry = cache.get_any(model_id, task_id, kind)
        if entry is None:
            missing.append(model_id)
        else:
            scores[model_id] = entry.score
    if missing:
        raise MissingScoreError(
            f"no cached {kind} score on task {task_id!r} for: " + ", ".join(missing)
            + " (run `zooselect proxy` first)"
        )
    return scores


def _build_rankings(
    catalog: ModelCatalog,
    tasks: TaskCatalog,
    pool: Pool,
    table,
    cache: ProxyScoreTable,
    strategy_ids: List[str],
) -> Dict[str, Dict[str, strategy.Ranking]]:
    """strategy_id -> task_id -> full-pool Ranking (task-labeled)."""
    out: Dict[str, Dict[str, strategy.Ranking]] = {}
    for sid in strategy_ids:
        per_task: Dict[str, strategy.Ranking] = {}
        if sid == "agnostic":
            base = strategy.rank_task_agnostic(pool, catalog)
            for task in tasks:
                per_task[task.task_id] = dataclasses.replace(base, task_id=task.task_id)
        elif sid == "oracle-agnostic":
            base = strategy.rank_oracle_task_agnostic(pool, table, catalog, tasks=tasks.task_ids)
            for task in tasks:
                per_task[task.task_id] = dataclasses.replace(base, task_id=task.task_id)
        else:
            kind = PROXY_STRATEGIES[sid]
            for task in tasks:
                scores = _task_scores(cache, pool, task.task_id, kind)
                if sid.startswith("hybrid-"):
                    per_task[task.task_id] = strategy.rank_hybrid(
                        pool, task.task_id, scores, catalog, kind
                    )
                else:
                    per_task[task.task_id] = strategy.rank_task_aware(
                        pool, task.task_id, scores, catalog, kind
                    )
        out[sid] = per_task
    return out


def _out_dir(args) -> Path:
    return Path(args.out) if args.out else Path(args.data_dir) / "report"


def cmd_rank(args) -> int:
    store = DataStore(args.data_dir)
    catalog = store.load_models()
    tasks = store.load_tasks()
    table = store.load_accuracy()
    cache = store.load_proxy_cache()
    pool = builtin_pool(catalog, args.pool)
    strategy_ids = _strategy_list(args.strategies)
    budgets = _parse_ints(args.budgets, "--budgets")
    rankings = _build_rankings(catalog, tasks, pool, table, cache, strategy_ids)

    selections = []
    for sid in strategy_ids:
        for task in tasks:
            for budget in budgets:
                selections.append(strategy.select_top(rankings[sid][task.task_id], budget))
    out_dir = _out_dir(args)
    path = out_dir / "selections.csv"
    strategy.save_selections(selections, path)
    print(f"rank: wrote {len(selections)} selections to {path}")
    return 0


def cmd_report(args) -> int:
    store = DataStore(args.data_dir)
    catalog = store.load_models()
    tasks = store.load_tasks()
    table = store.load_accuracy()
    cache = store.load_proxy_cache()
    pools = _pool_list(args.pools, catalog)
    strategy_ids = _strategy_list(args.strategies)
    budgets = _parse_ints(args.budgets, "--budgets")
    out_dir = _out_dir(args)

    regret_rows: List[metrics.RegretRow] = []
    curves: List[metrics.BudgetCurve] = []
    min_rows = []
    chart_files = []
    for pool in pools:
        rankings = _build_rankings(catalog, tasks, pool, table, cache, strategy_ids)
        for sid in strategy_ids:
            rows_here = []
            for task in tasks:
                ranking = rankings[sid][task.task_id]
                for budget in budgets:
                    rows_here.append(metrics.regret_row(pool, task, ranking, budget, table))
                min_rows.append(
                    (
                        task.task_id,
                        pool.pool_id,
                        sid,
                        metrics.budget_to_zero_regret(ranking, pool, task.task_id, table),
                    )
                )
            regret_rows.extend(rows_here)
            curves.append(metrics.budget_curve(rankings[sid], pool, table))
            svg = charts.regret_chart(pool.pool_id, sid, rows_here)
            chart_path = out_dir / "charts" / f"regret_{pool.pool_id}_{sid}.svg"
            chart_path.parent.mkdir(parents=True, exist_ok=True)
            chart_path.write_text(svg, encoding="utf-8")
            chart_files.append(chart_path)

    metrics.save_regret_report(regret_rows, out_dir / "regret_report.csv")
    metrics.save_budget_curves(curves, out_dir / "budget_curves.csv")
    metrics.save_min_budgets(min_rows, out_dir / "min_budget.csv")
    print(f"report: {len(regret_rows)} regret rows, {len(curves)} curves, "
          f"{len(chart_files)} charts under {out_dir}")
    return 0


def cmd_demo(args) -> int:
    demo = metrics.correlation_limit_demo()
    print(f"pool {demo.pool_id}, task {demo.task_id}: every strategy at B=1")
    for sid, regret in sorted(demo.strategy_regrets.items()):
        print(f"  {sid:<16} relative regret {_fmt(regret)}")
    imnet = demo.imagenet_accuracy_correlation
    prox = demo.proxy_correlation
    print(f"  imagenet-accuracy vs downstream correlation: "
          f"{metrics.UNDEFINED_TOKEN if imnet is None else _fmt(imnet)}")
    print(f"  proxy-score vs downstream correlation:       "
          f"{metrics.UNDEFINED_TOKEN if prox is None else _fmt(prox)}")
    print("zero regret with undefined correlation: correlation alone cannot rank selectors")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ZooselectError as exc:
        print(f"ERROR {exc.code}: {exc.detail}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Dependency-free SVG bar charts for regret reports.

One chart per (pool, strategy): relative regret per task, budget 1 drawn as
a light bar behind the solid budget-2 bar, colors keyed by task group. Plain
generated SVG keeps the report diffable and viewer-free.
"""

from __future__ import annotations

from typing import Dict, List, Sequence

from .metrics import RegretRow

GROUP_COLORS = {
    "natural": "#4878cf",
    "specialized": "#6acc65",
    "structured": "#d65f5f",
}

_MARGIN_L = 52
_MARGIN_R = 16
_MARGIN_T = 40
_MARGIN_B = 76
_SLOT_W = 38
_BAR_W = 24
_PLOT_H = 240


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def regret_chart(pool_id: str, strategy_id: str, rows: Sequence[RegretRow]) -> str:
    """Render rows (one per task and budget) for a single pool + strategy."""
    tasks: List[str] = []
    groups: Dict[str, str] = {}
    by_cell: Dict[tuple, float] = {}
    for row in rows:
        if row.task_id not in groups:
            tasks.append(row.task_id)
            groups[row.task_id] = row.task_group
        by_cell[(row.task_id, row.budget)] = row.rel_regret
    budgets = sorted({b for _, b in by_cell})

    width = _MARGIN_L + _SLOT_W * max(1, len(tasks)) + _MARGIN_R
    height = _MARGIN_T + _PLOT_H + _MARGIN_B
    x0, y0 = _MARGIN_L, _MARGIN_T

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{x0}" y="22" font-size="14">{_esc(pool_id)} / {_esc(strategy_id)}: '
        f"relative regret by task</text>",
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = y0 + _PLOT_H * (1.0 - tick)
        parts.append(
            f'<line x1="{x0}" y1="{y:.1f}" x2="{width - _MARGIN_R}" y2="{y:.1f}" '
            f'stroke="#dddddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{y + 4:.1f}" font-size="10" text-anchor="end">{tick:.2f}</text>'
        )

    for i, task_id in enumerate(tasks):
        color = GROUP_COLORS.get(groups[task_id], "#888888")
        cx = x0 + _SLOT_W * i + _SLOT_W / 2
        for budget in budgets:
            if (task_id, budget) not in by_cell:
                continue
            value = max(0.0, min(1.0, by_cell[(task_id, budget)]))
            bar_h = _PLOT_H * value
            opacity = "0.35" if budget == min(budgets) else "1.0"
            parts.append(
                f'<rect x="{cx - _BAR_W / 2:.1f}" y="{y0 + _PLOT_H - bar_h:.1f}" '
                f'width="{_BAR_W}" height="{bar_h:.1f}" fill="{color}" '
                f'fill-opacity="{opacity}"/>'
            )
        ty = y0 + _PLOT_H + 14
        parts.append(
            f'<text x="{cx:.1f}" y="{ty}" font-size="10" text-anchor="end" '
            f'transform="rotate(-45 {cx:.1f} {ty})">{_esc(task_id)}</text>'
        )

    legend_y = height - 18
    swatch = GROUP_COLORS["natural"]
    parts.append(
        f'<rect x="{x0}" y="{legend_y - 10}" width="12" height="12" fill="{swatch}" fill-opacity="0.35"/>'
    )
    parts.append(f'<text x="{x0 + 16}" y="{legend_y}" font-size="10">B=1</text>')
    parts.append(
        f'<rect x="{x0 + 56}" y="{legend_y - 10}" width="12" height="12" fill="{swatch}"/>'
    )
    parts.append(f'<text x="{x0 + 72}" y="{legend_y}" font-size="10">B=2</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

"""Presentation-layer rendering: per-conversation effect tables with
3-decimal scores, impact summary tables, and an SVG timeline chart.

All output is assembled from plain strings so repeated runs over the
same inputs are byte-identical.
"""

from __future__ import annotations

import csv
from typing import IO, Sequence

from .counterfactual import CounterfactualResult
from .polarization import PolarizationScore

EFFECTS_TABLE_HEADER = [
    "influencer_id",
    "stance",
    "conversation_id",
    "day",
    "audience_size",
    "audience_source",
    "direction",
    "score_without",
    "score_with",
    "delta",
    "classification",
]

_SERIES_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def format_score(value: float | None) -> str:
    return "" if value is None else f"{value:.3f}"


def write_effects_table(results: Sequence[CounterfactualResult], fh: IO[str]) -> None:
    """Per-conversation, per-direction score table (one row per result)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(EFFECTS_TABLE_HEADER)
    for r in results:
        writer.writerow(
            [
                r.influencer_id,
                r.influencer_stance,
                r.conversation_id,
                r.day.isoformat() if r.day else "",
                r.audience_size,
                r.audience_source,
                r.direction_label,
                format_score(r.score_without),
                format_score(r.score_with),
                format_score(r.delta),
                r.classification,
            ]
        )


def timeline_svg(
    scores: Sequence[PolarizationScore],
    width: int = 800,
    height: int = 320,
    title: str = "Daily polarization",
) -> str:
    """Line chart of daily scores, one polyline per direction.

    Undefined days break the line rather than being interpolated.
    """
    margin = 50
    by_direction: dict[str, list[PolarizationScore]] = {}
    days = sorted({s.day for s in scores if s.day is not None})
    for score in scores:
        by_direction.setdefault(score.direction_label, []).append(score)
    day_index = {day: i for i, day in enumerate(days)}
    span = max(1, len(days) - 1)

    def x_pos(day) -> float:
        return margin + (width - 2 * margin) * day_index[day] / span

    def y_pos(value: float) -> float:
        return margin + (height - 2 * margin) * (1.0 - value) / 2.0

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14" '
        f'font-family="sans-serif">{title}</text>',
    ]
    for level in (-1.0, 0.0, 1.0):
        y = y_pos(level)
        dash = ' stroke-dasharray="4 4"' if level == 0.0 else ""
        parts.append(
            f'<line x1="{margin}" y1="{y:.2f}" x2="{width - margin}" y2="{y:.2f}" '
            f'stroke="#999999" stroke-width="1"{dash}/>'
        )
        parts.append(
            f'<text x="{margin - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">{level:+.0f}</text>'
        )
    if days:
        parts.append(
            f'<text x="{margin}" y="{height - 12}" font-size="11" '
            f'font-family="sans-serif">{days[0].isoformat()}</text>'
        )
        parts.append(
            f'<text x="{width - margin}" y="{height - 12}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">{days[-1].isoformat()}</text>'
        )

    for series_index, direction in enumerate(sorted(by_direction)):
        color = _SERIES_COLORS[series_index % len(_SERIES_COLORS)]
        segments: list[list[str]] = [[]]
        for score in sorted(by_direction[direction], key=lambda s: s.day):
            if not score.defined:
                if segments[-1]:
                    segments.append([])
                continue
            segments[-1].append(f"{x_pos(score.day):.2f},{y_pos(score.value):.2f}")
        for segment in segments:
            if len(segment) == 1:
                x, y = segment[0].split(",")
                parts.append(f'<circle cx="{x}" cy="{y}" r="2.5" fill="{color}"/>')
            elif len(segment) > 1:
                parts.append(
                    f'<polyline points="{" ".join(segment)}" fill="none" '
                    f'stroke="{color}" stroke-width="2"/>'
                )
        legend_y = 20 + 16 * series_index
        parts.append(
            f'<rect x="{width - margin - 120}" y="{legend_y}" width="12" height="12" '
            f'fill="{color}"/>'
        )
        parts.append(
            f'<text x="{width - margin - 102}" y="{legend_y + 10}" font-size="11" '
            f'font-family="sans-serif">{direction}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

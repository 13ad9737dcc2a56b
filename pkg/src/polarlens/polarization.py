"""Directional affective polarization via the E/I index.

For a direction A -> B, consider every non-self-loop interaction
authored by a user of stance group A whose target is stance-labeled.
Interactions toward B count as external weight, interactions back into A
as internal weight, and the score is the classic Krackhardt-style ratio

    (external - internal) / (external + internal)

so -1 means all in-group activity and +1 all out-group activity. Edges
touching undecided or unlabeled users are ignored. Three weight modes
control what an interaction contributes:

* count_all: every interaction counts 1;
* count_negative (default): 1 only when the authoring tweet's combined
  sentiment is below -tau, which reads the score as a ratio of hostile
  out-group to hostile in-group activity;
* sentiment_mass: the magnitude of negative sentiment, max(0, -s).

A day or graph with no contributing interactions yields an explicitly
undefined score, never a silent zero.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date, timedelta
from typing import IO, Iterable, Mapping

from .errors import InvalidArgumentError
from .graph import InteractionEdge, InteractionGraph, daily_slice
from .stance.thresholds import UNDECIDED

WEIGHT_MODES = ("count_all", "count_negative", "sentiment_mass")

TIMELINE_CSV_HEADER = ["date", "direction", "value", "ext_weight", "int_weight", "defined"]


@dataclass(frozen=True)
class PolarizationScore:
    direction: tuple[str, str]
    value: float | None
    ext_weight: float
    int_weight: float
    weight_mode: str
    day: date | None = None

    @property
    def defined(self) -> bool:
        return self.value is not None

    @property
    def direction_label(self) -> str:
        return f"{self.direction[0]}->{self.direction[1]}"


def edge_weight(edge: InteractionEdge, weight_mode: str, tau: float) -> float:
    if weight_mode == "count_all":
        return 1.0
    if weight_mode == "count_negative":
        return 1.0 if edge.sentiment < -tau else 0.0
    if weight_mode == "sentiment_mass":
        return max(0.0, -edge.sentiment)
    raise InvalidArgumentError(f"unknown weight mode {weight_mode!r}")


def _known_groups(stances: Mapping[str, str]) -> set[str]:
    return {label for label in stances.values() if label != UNDECIDED}


def ei_index(
    graph: InteractionGraph,
    stances: Mapping[str, str],
    direction: tuple[str, str],
    weight_mode: str = "count_negative",
    tau: float = 0.05,
    day: date | None = None,
) -> PolarizationScore:
    """Directional E/I score for edges authored by the source group.

    Returns an undefined score (value None) when no edge contributes
    weight; raises when the direction names a group with no members.
    """
    source, target = direction
    if source == target:
        raise InvalidArgumentError("direction must name two distinct groups")
    if weight_mode not in WEIGHT_MODES:
        raise InvalidArgumentError(f"unknown weight mode {weight_mode!r}")
    if tau < 0:
        raise InvalidArgumentError("tau must be >= 0")
    groups = _known_groups(stances)
    for group in (source, target):
        if group not in groups:
            raise InvalidArgumentError(f"direction references unknown group {group!r}")

    ext = 0.0
    internal = 0.0
    for edge in graph.edges:
        if edge.is_self_loop or stances.get(edge.author_id) != source:
            continue
        target_group = stances.get(edge.target_id)
        if target_group == target:
            ext += edge_weight(edge, weight_mode, tau)
        elif target_group == source:
            internal += edge_weight(edge, weight_mode, tau)
    total = ext + internal
    value = (ext - internal) / total if total > 0 else None
    return PolarizationScore(
        direction=(source, target),
        value=value,
        ext_weight=ext,
        int_weight=internal,
        weight_mode=weight_mode,
        day=day,
    )


def daily_timeline(
    graph: InteractionGraph,
    stances: Mapping[str, str],
    direction: tuple[str, str],
    start: date,
    end: date,
    weight_mode: str = "count_negative",
    tau: float = 0.05,
) -> list[PolarizationScore]:
    """One score per calendar day in [start, end]; empty days stay undefined."""
    if end < start:
        raise InvalidArgumentError("date range is reversed")
    out = []
    day = start
    while day <= end:
        out.append(
            ei_index(
                daily_slice(graph, day),
                stances,
                direction,
                weight_mode=weight_mode,
                tau=tau,
                day=day,
            )
        )
        day += timedelta(days=1)
    return out


def both_directions(
    graph: InteractionGraph,
    stances: Mapping[str, str],
    pair: tuple[str, str],
    weight_mode: str = "count_negative",
    tau: float = 0.05,
    day: date | None = None,
) -> tuple[PolarizationScore, PolarizationScore]:
    a, b = pair
    return (
        ei_index(graph, stances, (a, b), weight_mode=weight_mode, tau=tau, day=day),
        ei_index(graph, stances, (b, a), weight_mode=weight_mode, tau=tau, day=day),
    )


def write_timeline(scores: Iterable[PolarizationScore], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TIMELINE_CSV_HEADER)
    for score in scores:
        writer.writerow(
            [
                score.day.isoformat() if score.day else "",
                score.direction_label,
                repr(score.value) if score.defined else "",
                repr(score.ext_weight),
                repr(score.int_weight),
                "true" if score.defined else "false",
            ]
        )


def read_timeline(fh: IO[str]) -> list[PolarizationScore]:
    reader = csv.reader(fh)
    header = next(reader)
    if header != TIMELINE_CSV_HEADER:
        raise ValueError(f"unexpected timeline CSV header: {header!r}")
    out = []
    for row in reader:
        source, target = row[1].split("->")
        out.append(
            PolarizationScore(
                direction=(source, target),
                value=float(row[2]) if row[5] == "true" else None,
                ext_weight=float(row[3]),
                int_weight=float(row[4]),
                weight_mode="",
                day=date.fromisoformat(row[0]) if row[0] else None,
            )
        )
    return out

"""Counterfactual conversation effects on polarization.

For each influencer-led conversation the engine scores the surrounding
graph twice, with the conversation present and with it removed, and
reports the delta (with minus without). A positive delta means the
conversation's presence raises the directional polarization score.

The surrounding graph is either the influencer's one-hop audience
subgraph (default) or the daily slice of the conversation's root day.
Removal defaults to edge surgery, which isolates the conversation's own
interactions; node removal additionally erases its participants'
unrelated activity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import date
from typing import IO, Iterable, Mapping, Sequence

from .corpus import Conversation, InfluencerRecord
from .errors import InvalidArgumentError, NotFoundError
from .graph import InteractionGraph, daily_slice, influencer_subgraph, remove_conversation
from .polarization import ei_index
from .stance.thresholds import UNDECIDED

SCOPES = ("subgraph", "daily")
REMOVAL_MODES = ("edges", "nodes")

CLASS_INCREASE = "increase"
CLASS_DECREASE = "decrease"
CLASS_NO_CHANGE = "no_change"
CLASS_UNDEFINED = "undefined"

RESULTS_CSV_HEADER = [
    "conversation_id",
    "influencer_id",
    "stance",
    "direction",
    "day",
    "score_with",
    "score_without",
    "delta",
    "classification",
    "audience_size",
    "audience_source",
]


def classify_delta(
    score_with: float | None, score_without: float | None
) -> tuple[float | None, str]:
    """Delta and its classification from a with/without score pair."""
    if score_with is None or score_without is None:
        return None, CLASS_UNDEFINED
    delta = score_with - score_without
    if delta > 0:
        return delta, CLASS_INCREASE
    if delta < 0:
        return delta, CLASS_DECREASE
    return delta, CLASS_NO_CHANGE


@dataclass(frozen=True)
class CounterfactualResult:
    conversation_id: str
    influencer_id: str
    influencer_stance: str
    direction: tuple[str, str]
    day: date | None
    score_with: float | None
    score_without: float | None
    delta: float | None
    classification: str
    audience_size: int = 0
    audience_source: str = "neighbors"
    warnings: tuple[str, ...] = ()

    @property
    def direction_label(self) -> str:
        return f"{self.direction[0]}->{self.direction[1]}"

    @classmethod
    def from_scores(
        cls,
        conversation_id: str,
        influencer_id: str,
        influencer_stance: str,
        direction: tuple[str, str],
        day: date | None,
        score_with: float | None,
        score_without: float | None,
        **extra,
    ) -> "CounterfactualResult":
        delta, classification = classify_delta(score_with, score_without)
        return cls(
            conversation_id=conversation_id,
            influencer_id=influencer_id,
            influencer_stance=influencer_stance,
            direction=direction,
            day=day,
            score_with=score_with,
            score_without=score_without,
            delta=delta,
            classification=classification,
            **extra,
        )


def conversation_effect(
    graph: InteractionGraph,
    stances: Mapping[str, str],
    conversation: Conversation,
    influencer_id: str,
    direction: tuple[str, str],
    weight_mode: str = "count_negative",
    tau: float = 0.05,
    scope: str = "subgraph",
    removal_mode: str = "edges",
    audience: Sequence[str] | None = None,
) -> CounterfactualResult:
    """Score one conversation's with/without effect in one direction."""
    if scope not in SCOPES:
        raise InvalidArgumentError(f"unknown scope {scope!r}")
    if removal_mode not in REMOVAL_MODES:
        raise InvalidArgumentError(f"unknown removal mode {removal_mode!r}")
    if conversation.initiator_id != influencer_id:
        raise InvalidArgumentError(
            f"conversation {conversation.conversation_id!r} was not initiated by {influencer_id!r}"
        )
    if not graph.edges_in_conversation(conversation.conversation_id):
        raise NotFoundError(
            f"conversation {conversation.conversation_id!r} has no interactions in the graph"
        )

    audience_source = "followers" if audience is not None else "neighbors"
    if scope == "subgraph":
        base = influencer_subgraph(graph, influencer_id, audience=audience)
        audience_size = (
            len({a for a in audience if a in graph.nodes})
            if audience is not None
            else len(graph.neighbors(influencer_id))
        )
    else:
        base = daily_slice(graph, conversation.root_day)
        audience_size = base.n_nodes

    warnings: tuple[str, ...] = ()
    stance = stances.get(influencer_id, UNDECIDED)
    if stance == UNDECIDED:
        warnings = ("influencer stance is undecided",)

    score_with = ei_index(base, stances, direction, weight_mode=weight_mode, tau=tau)
    without_graph = remove_conversation(base, conversation.conversation_id, mode=removal_mode)
    score_without = ei_index(
        without_graph, stances, direction, weight_mode=weight_mode, tau=tau
    )
    return CounterfactualResult.from_scores(
        conversation_id=conversation.conversation_id,
        influencer_id=influencer_id,
        influencer_stance=stance,
        direction=direction,
        day=conversation.root_day,
        score_with=score_with.value,
        score_without=score_without.value,
        audience_size=audience_size,
        audience_source=audience_source,
        warnings=warnings,
    )


def batch_effects(
    graph: InteractionGraph,
    stances: Mapping[str, str],
    conversations: Sequence[Conversation],
    influencers: Sequence[InfluencerRecord],
    directions: Sequence[tuple[str, str]],
    weight_mode: str = "count_negative",
    tau: float = 0.05,
    scope: str = "subgraph",
    removal_mode: str = "edges",
    followers: Mapping[str, Sequence[str]] | None = None,
) -> tuple[list[CounterfactualResult], list[str]]:
    """One result per (conversation, direction), ordered by influencer
    rank, then conversation id, then direction position.

    Per-item failures are collected as messages instead of aborting the
    batch.
    """
    rank_by_user = {rec.user_id: rec.rank for rec in influencers}
    ordered = sorted(
        conversations,
        key=lambda c: (rank_by_user.get(c.initiator_id, len(rank_by_user) + 1), c.conversation_id),
    )
    results: list[CounterfactualResult] = []
    errors: list[str] = []
    for conversation in ordered:
        if conversation.initiator_id not in rank_by_user:
            errors.append(
                f"{conversation.conversation_id}: initiator {conversation.initiator_id!r}"
                " is not a ranked influencer"
            )
            continue
        audience = None
        if followers is not None and conversation.initiator_id in followers:
            audience = followers[conversation.initiator_id]
        for direction in directions:
            try:
                results.append(
                    conversation_effect(
                        graph,
                        stances,
                        conversation,
                        conversation.initiator_id,
                        direction,
                        weight_mode=weight_mode,
                        tau=tau,
                        scope=scope,
                        removal_mode=removal_mode,
                        audience=audience,
                    )
                )
            except (InvalidArgumentError, NotFoundError) as exc:
                errors.append(
                    f"{conversation.conversation_id} {direction[0]}->{direction[1]}: {exc}"
                )
    return results, errors


@dataclass
class InfluencerImpactSummary:
    influencer_id: str
    stance: str
    n_conversations: int
    per_direction: dict[str, dict[str, float]] = field(default_factory=dict)


def _percentages(classifications: Sequence[str]) -> dict[str, float]:
    n = len(classifications)
    if n == 0:
        return {"increase": 0.0, "decrease": 0.0, "other": 0.0}
    n_inc = sum(1 for c in classifications if c == CLASS_INCREASE)
    n_dec = sum(1 for c in classifications if c == CLASS_DECREASE)
    return {
        "increase": 100.0 * n_inc / n,
        "decrease": 100.0 * n_dec / n,
        "other": 100.0 * (n - n_inc - n_dec) / n,
    }


def summarize_influencer(
    results: Sequence[CounterfactualResult],
) -> list[InfluencerImpactSummary]:
    """Per-influencer percentage of conversations that increase or
    decrease polarization, per direction. Influencers keep their first
    appearance order, which batch_effects makes the rank order."""
    order: list[str] = []
    grouped: dict[str, list[CounterfactualResult]] = {}
    for result in results:
        if result.influencer_id not in grouped:
            order.append(result.influencer_id)
            grouped[result.influencer_id] = []
        grouped[result.influencer_id].append(result)

    summaries = []
    for influencer_id in order:
        rows = grouped[influencer_id]
        conversations = {r.conversation_id for r in rows}
        if not conversations:
            continue
        directions = sorted({r.direction_label for r in rows})
        per_direction = {
            label: _percentages(
                [r.classification for r in rows if r.direction_label == label]
            )
            for label in directions
        }
        summaries.append(
            InfluencerImpactSummary(
                influencer_id=influencer_id,
                stance=rows[0].influencer_stance,
                n_conversations=len(conversations),
                per_direction=per_direction,
            )
        )
    return summaries


@dataclass
class StanceGroupSummary:
    stance: str
    n_conversations: int
    per_direction: dict[str, dict[str, float]] = field(default_factory=dict)


def summarize_stance_group(
    results: Sequence[CounterfactualResult],
) -> list[StanceGroupSummary]:
    """Aggregate conversation effects by the initiator's stance."""
    grouped: dict[str, list[CounterfactualResult]] = {}
    for result in results:
        grouped.setdefault(result.influencer_stance, []).append(result)
    summaries = []
    for stance in sorted(grouped):
        rows = grouped[stance]
        directions = sorted({r.direction_label for r in rows})
        summaries.append(
            StanceGroupSummary(
                stance=stance,
                n_conversations=len({r.conversation_id for r in rows}),
                per_direction={
                    label: _percentages(
                        [r.classification for r in rows if r.direction_label == label]
                    )
                    for label in directions
                },
            )
        )
    return summaries


def format_percent(value: float, trim: bool = False) -> str:
    """Two-decimal percent text; ``trim`` drops one trailing zero so a
    whole-number share renders like "100.0"."""
    text = f"{value:.2f}"
    if trim and text.endswith("0"):
        text = text[:-1]
    return text


def majority_cell(percentages: Mapping[str, float], trim: bool = False) -> str:
    """Render the dominant change, e.g. "61.11% - increase"."""
    if percentages["increase"] >= percentages["decrease"]:
        return f"{format_percent(percentages['increase'], trim)}% - increase"
    return f"{format_percent(percentages['decrease'], trim)}% - decrease"


def write_results(results: Iterable[CounterfactualResult], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(RESULTS_CSV_HEADER)
    for r in results:
        writer.writerow(
            [
                r.conversation_id,
                r.influencer_id,
                r.influencer_stance,
                r.direction_label,
                r.day.isoformat() if r.day else "",
                repr(r.score_with) if r.score_with is not None else "",
                repr(r.score_without) if r.score_without is not None else "",
                repr(r.delta) if r.delta is not None else "",
                r.classification,
                r.audience_size,
                r.audience_source,
            ]
        )


def read_results(fh: IO[str]) -> list[CounterfactualResult]:
    reader = csv.reader(fh)
    header = next(reader)
    if header != RESULTS_CSV_HEADER:
        raise ValueError(f"unexpected results CSV header: {header!r}")
    out = []
    for row in reader:
        source, target = row[3].split("->")
        out.append(
            CounterfactualResult(
                conversation_id=row[0],
                influencer_id=row[1],
                influencer_stance=row[2],
                direction=(source, target),
                day=date.fromisoformat(row[4]) if row[4] else None,
                score_with=float(row[5]) if row[5] else None,
                score_without=float(row[6]) if row[6] else None,
                delta=float(row[7]) if row[7] else None,
                classification=row[8],
                audience_size=int(row[9]),
                audience_source=row[10],
            )
        )
    return out


def write_influencer_summary(
    summaries: Sequence[InfluencerImpactSummary], fh: IO[str]
) -> None:
    """Impact table: one row per influencer, one majority-change cell per
    direction plus the raw percentages."""
    directions = sorted({d for s in summaries for d in s.per_direction})
    writer = csv.writer(fh, lineterminator="\n")
    header = ["influencer_id", "stance", "n_conversations"]
    for d in directions:
        header += [f"change_{d}", f"pct_increase_{d}", f"pct_decrease_{d}"]
    writer.writerow(header)
    for s in summaries:
        row = [s.influencer_id, s.stance, s.n_conversations]
        for d in directions:
            pct = s.per_direction.get(d)
            if pct is None:
                row += ["", "", ""]
            else:
                row += [
                    majority_cell(pct, trim=True),
                    format_percent(pct["increase"]),
                    format_percent(pct["decrease"]),
                ]
        writer.writerow(row)


def write_stance_group_summary(
    summaries: Sequence[StanceGroupSummary], fh: IO[str]
) -> None:
    directions = sorted({d for s in summaries for d in s.per_direction})
    writer = csv.writer(fh, lineterminator="\n")
    header = ["stance", "n_conversations"]
    for d in directions:
        header += [f"change_{d}", f"pct_increase_{d}", f"pct_decrease_{d}"]
    writer.writerow(header)
    for s in summaries:
        row: list = [s.stance, s.n_conversations]
        for d in directions:
            pct = s.per_direction.get(d)
            if pct is None:
                row += ["", "", ""]
            else:
                row += [
                    majority_cell(pct),
                    format_percent(pct["increase"]),
                    format_percent(pct["decrease"]),
                ]
        writer.writerow(row)

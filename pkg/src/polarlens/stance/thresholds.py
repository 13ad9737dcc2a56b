"""Dual-threshold stance assignment and grid-search calibration.

Users carry a probability p of holding the anti stance. A threshold pair
(t1, t2) partitions them: p <= t1 is pro, p >= t2 is anti, anything in
between is undecided. Boundaries are inclusive toward the decided
classes, with one carve-out: the exact midpoint p = 0.5 always stays
undecided, so the degenerate grid pairs that touch 0.5 cannot claim it
for either side.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from sklearn.base import BaseEstimator

from ..errors import InvalidArgumentError

PRO = "pro"
ANTI = "anti"
UNDECIDED = "undecided"

STANCE_CSV_HEADER = ["user_id", "p_anti", "label", "source"]


@dataclass(frozen=True)
class ThresholdPair:
    t1: float
    t2: float

    def __post_init__(self) -> None:
        if not (0.0 < self.t1 <= 0.5 <= self.t2 < 1.0):
            raise InvalidArgumentError(
                f"thresholds must satisfy 0 < t1 <= 0.5 <= t2 < 1, got ({self.t1}, {self.t2})"
            )


@dataclass(frozen=True)
class StanceAssignment:
    user_id: str
    p_anti: float
    label: str
    source: str


def classify_probability(p: float, thresholds: ThresholdPair) -> str:
    if p <= thresholds.t1 and p < 0.5:
        return PRO
    if p >= thresholds.t2 and p > 0.5:
        return ANTI
    return UNDECIDED


def assign_stances(
    p_anti: Mapping[str, float],
    thresholds: ThresholdPair,
    source: str = "gnn",
) -> list[StanceAssignment]:
    """Label every user in the map; output sorted by user id."""
    return [
        StanceAssignment(
            user_id=user,
            p_anti=p_anti[user],
            label=classify_probability(p_anti[user], thresholds),
            source=source,
        )
        for user in sorted(p_anti)
    ]


def _grid(step: float, lo: float, hi: float) -> list[float]:
    values = []
    i = 0
    while True:
        value = round(lo + i * step, 10)
        if value > hi + 1e-12:
            break
        values.append(value)
        i += 1
    return values


def macro_f1(
    predictions: Sequence[str], reference: Sequence[str], classes: tuple[str, str] = (PRO, ANTI)
) -> float:
    """Macro F1 over the two decided classes.

    Undecided predictions are counted as misses: they never enter a
    precision denominator but still cost recall on their true class.
    """
    total = 0.0
    for cls in classes:
        tp = sum(1 for p, r in zip(predictions, reference) if p == cls and r == cls)
        fp = sum(1 for p, r in zip(predictions, reference) if p == cls and r != cls)
        fn = sum(1 for p, r in zip(predictions, reference) if p != cls and r == cls)
        if tp + fp == 0 or tp + fn == 0 or tp == 0:
            continue
        precision = tp / (tp + fp)
        recall = tp / (tp + fn)
        total += 2 * precision * recall / (precision + recall)
    return total / len(classes)


def calibrate_thresholds(
    p_anti: Mapping[str, float],
    reference: Mapping[str, str],
    grid_step: float = 0.05,
) -> tuple[ThresholdPair, float]:
    """Exhaustive grid search for the macro-F1-maximizing threshold pair.

    t1 ranges over {step, ..., 0.50} and t2 over {0.50, ..., 1 - step}.
    Ties prefer the widest undecided band (largest t2 - t1), then the
    smaller t1.
    """
    if not reference:
        raise InvalidArgumentError("reference label set is empty")
    unknown = {label for label in reference.values()} - {PRO, ANTI}
    if unknown:
        raise InvalidArgumentError(f"reference labels must be pro/anti, got {unknown}")
    users = sorted(u for u in reference if u in p_anti)
    if not users:
        raise InvalidArgumentError("no reference user has a probability")
    probs = [p_anti[u] for u in users]
    labels = [reference[u] for u in users]

    best: tuple[float, float, float] | None = None
    best_pair: ThresholdPair | None = None
    for t1 in _grid(grid_step, grid_step, 0.5):
        for t2 in _grid(grid_step, 0.5, 1.0 - grid_step):
            if t1 > t2:
                continue
            pair = ThresholdPair(t1, t2)
            predictions = [classify_probability(p, pair) for p in probs]
            score = macro_f1(predictions, labels)
            key = (score, round(t2 - t1, 10), -t1)
            if best is None or key > best:
                best = key
                best_pair = pair
    assert best is not None and best_pair is not None
    return best_pair, best[0]


class ThresholdCalibrator(BaseEstimator):
    """Estimator wrapper for the grid search.

    After ``fit`` the selected pair is available as ``thresholds_`` and
    its macro F1 as ``f1_``.
    """

    def __init__(self, grid_step: float = 0.05):
        self.grid_step = grid_step

    def fit(self, p_anti: Mapping[str, float], reference: Mapping[str, str]):
        self.thresholds_, self.f1_ = calibrate_thresholds(
            p_anti, reference, grid_step=self.grid_step
        )
        return self

    def predict(self, p_anti: Mapping[str, float]) -> dict[str, str]:
        return {
            user: classify_probability(p, self.thresholds_)
            for user, p in p_anti.items()
        }


def write_stances(assignments: Iterable[StanceAssignment], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(STANCE_CSV_HEADER)
    for a in assignments:
        writer.writerow([a.user_id, repr(a.p_anti), a.label, a.source])


def read_stances(fh: IO[str]) -> list[StanceAssignment]:
    reader = csv.reader(fh)
    header = next(reader)
    if header != STANCE_CSV_HEADER:
        raise ValueError(f"unexpected stance CSV header: {header!r}")
    return [
        StanceAssignment(user_id=row[0], p_anti=float(row[1]), label=row[2], source=row[3])
        for row in reader
    ]


def stance_map(assignments: Iterable[StanceAssignment]) -> dict[str, str]:
    return {a.user_id: a.label for a in assignments}

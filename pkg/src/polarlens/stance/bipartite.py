"""Seed-stance generation via reciprocal label propagation.

A user-hashtag bipartite graph is weighted by usage counts. A handful of
hashtags are clamped to side values (0.0 = pro, 1.0 = anti); everything
else starts at 0.5 and the two node sets alternately take weighted means
of each other until the values stop moving. Decisive, frequent hashtag
users become seed-labeled training users for the graph classifier.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import IO, Mapping, Sequence

from sklearn.base import BaseEstimator

from ..corpus import Tweet
from ..errors import InvalidArgumentError
from .thresholds import ANTI, PRO, StanceAssignment

logger = logging.getLogger(__name__)

SIDE_VALUES = {PRO: 0.0, ANTI: 1.0}


@dataclass
class BipartiteGraph:
    user_nodes: set[str]
    hashtag_nodes: set[str]
    weights: dict[tuple[str, str], int]
    seed_hashtags: dict[str, float]

    def user_usage(self, user: str) -> dict[str, int]:
        return {
            h: w for (u, h), w in self.weights.items() if u == user
        }

    def seed_usage_counts(self) -> dict[str, int]:
        """Per-user total uses of seed hashtags."""
        counts: dict[str, int] = {}
        for (user, tag), weight in self.weights.items():
            if tag in self.seed_hashtags:
                counts[user] = counts.get(user, 0) + weight
        return counts


def load_seed_hashtags(fh: IO[str]) -> dict[str, str]:
    """Read a "hashtag,side" CSV; side must be pro or anti."""
    reader = csv.reader(fh)
    sides: dict[str, str] = {}
    for row in reader:
        if not row or row[0].strip().lower() == "hashtag":
            continue
        if len(row) != 2:
            raise InvalidArgumentError(f"seed hashtag row must be hashtag,side: {row!r}")
        tag, side = row[0].strip().lower().lstrip("#"), row[1].strip().lower()
        if side not in SIDE_VALUES:
            raise InvalidArgumentError(f"unknown seed side {side!r} for {tag!r}")
        sides[tag] = side
    return sides


def build_bipartite(tweets: Sequence[Tweet], seed_sides: Mapping[str, str]) -> BipartiteGraph:
    """Count hashtag usage per user; clamp the seed hashtags.

    Users and hashtags with zero usage are excluded, except seed hashtags
    absent from the corpus, which are retained as isolated clamped nodes
    (with a warning) so the seed file round-trips.
    """
    for tag, side in seed_sides.items():
        if side not in SIDE_VALUES:
            raise InvalidArgumentError(f"unknown seed side {side!r} for {tag!r}")
    weights: dict[tuple[str, str], int] = {}
    for tweet in tweets:
        for tag in tweet.hashtags:
            key = (tweet.author_id, tag)
            weights[key] = weights.get(key, 0) + 1
    users = {u for u, _ in weights}
    hashtags = {h for _, h in weights}
    for tag in seed_sides:
        if tag not in hashtags:
            logger.warning("seed hashtag %r does not occur in the corpus", tag)
            hashtags.add(tag)
    return BipartiteGraph(
        user_nodes=users,
        hashtag_nodes=hashtags,
        weights=weights,
        seed_hashtags={tag: SIDE_VALUES[side] for tag, side in seed_sides.items()},
    )


@dataclass
class PropagationResult:
    p_anti: dict[str, float]
    hashtag_values: dict[str, float]
    converged: bool
    iterations: int


def propagate(
    bipartite: BipartiteGraph,
    damping: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 100,
) -> PropagationResult:
    """Alternate weighted-mean updates until values settle.

    User step: p_u = sum_h w(u,h) v_h / sum_h w(u,h). Hashtag step (only
    unclamped tags): v_h = sum_u w(u,h) p_u / sum_u w(u,h). A damping
    factor below 1 blends each update with the previous value. Stops when
    the largest absolute change over both node sets drops below ``tol``.
    """
    if not bipartite.seed_hashtags:
        raise InvalidArgumentError("propagation requires at least one seed hashtag")
    if not 0.0 < damping <= 1.0:
        raise InvalidArgumentError("damping must be in (0, 1]")

    user_edges: dict[str, list[tuple[str, int]]] = {}
    tag_edges: dict[str, list[tuple[str, int]]] = {}
    for (user, tag), weight in bipartite.weights.items():
        user_edges.setdefault(user, []).append((tag, weight))
        tag_edges.setdefault(tag, []).append((user, weight))

    values = {tag: 0.5 for tag in bipartite.hashtag_nodes}
    values.update(bipartite.seed_hashtags)
    p_anti = {user: 0.5 for user in bipartite.user_nodes}

    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        delta = 0.0
        for user, edges in user_edges.items():
            total = sum(w for _, w in edges)
            mean = sum(w * values[tag] for tag, w in edges) / total
            new = damping * mean + (1.0 - damping) * p_anti[user]
            delta = max(delta, abs(new - p_anti[user]))
            p_anti[user] = new
        for tag, edges in tag_edges.items():
            if tag in bipartite.seed_hashtags:
                continue
            total = sum(w for _, w in edges)
            mean = sum(w * p_anti[user] for user, w in edges) / total
            new = damping * mean + (1.0 - damping) * values[tag]
            delta = max(delta, abs(new - values[tag]))
            values[tag] = new
        if delta < tol:
            converged = True
            break
    if not converged:
        logger.warning("label propagation hit max_iter=%d without converging", max_iter)
    return PropagationResult(
        p_anti=p_anti,
        hashtag_values=values,
        converged=converged,
        iterations=iterations,
    )


class BipartiteLabelPropagation(BaseEstimator):
    """Estimator facade over :func:`propagate`.

    ``fit`` runs the propagation; per-user probabilities live in
    ``p_anti_`` afterwards, convergence info in ``converged_`` and
    ``n_iter_``.
    """

    def __init__(self, damping: float = 1.0, tol: float = 1e-6, max_iter: int = 100):
        self.damping = damping
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, bipartite: BipartiteGraph, y=None):
        result = propagate(
            bipartite, damping=self.damping, tol=self.tol, max_iter=self.max_iter
        )
        self.p_anti_ = result.p_anti
        self.hashtag_values_ = result.hashtag_values
        self.converged_ = result.converged
        self.n_iter_ = result.iterations
        return self


def select_seed_users(
    p_anti: Mapping[str, float],
    usage_counts: Mapping[str, int],
    min_uses: int = 3,
    lo: float = 0.25,
    hi: float = 0.75,
) -> list[StanceAssignment]:
    """Pick decisive, frequent hashtag users as seed labels.

    A user qualifies with at least ``min_uses`` seed-hashtag uses and a
    propagated value at or below ``lo`` (pro) or at or above ``hi``
    (anti); everyone else is left unlabeled.
    """
    if not 0.0 <= lo < hi <= 1.0:
        raise InvalidArgumentError("bands must satisfy 0 <= lo < hi <= 1")
    seeds = []
    for user in sorted(p_anti):
        if usage_counts.get(user, 0) < min_uses:
            continue
        p = p_anti[user]
        if p <= lo:
            seeds.append(StanceAssignment(user, p, PRO, "seed"))
        elif p >= hi:
            seeds.append(StanceAssignment(user, p, ANTI, "seed"))
    return seeds

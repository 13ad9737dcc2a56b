"""Rule-based valence scoring for tweet text.

Each tweet gets a score in [-1, 1] from a lexicon of term valences plus
negation and booster handling:

* tokens are matched case-insensitively against the lexicon;
* a negator within the 3 preceding tokens multiplies the hit by -0.74;
* booster increments within the same window are added, signed to match
  the current valence of the hit;
* a fully upper-case token (in otherwise mixed-case text) is emphasized
  by a factor of 1.15;
* raw contributions are summed into S and squashed to S / sqrt(S^2 + 15).

All constants are fixed defaults of this scorer, chosen so that scoring
is deterministic and dependency-free. External model scores (one file of
per-tweet, per-model values) can be merged in; the combined score is the
unweighted mean over all models present for a tweet.
"""

from __future__ import annotations

import json
import logging
import math
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence

from .errors import InvalidArgumentError

logger = logging.getLogger(__name__)

NEGATION_FACTOR = -0.74
CONTEXT_WINDOW = 3
CAPS_FACTOR = 1.15
NORMALIZATION = 15.0

LEXICON_MODEL_NAME = "lexicon"

_TOKEN_RE = re.compile(r"[A-Za-z0-9']+")

# Compact built-in lexicon. Valences are in [-4, 4]; boosters carry the
# increment they add, dampeners a negative one.
DEFAULT_ENTRIES: dict[str, float] = {
    "good": 1.9,
    "great": 3.1,
    "excellent": 2.7,
    "love": 3.2,
    "hopeful": 1.9,
    "hope": 1.9,
    "progress": 1.8,
    "support": 1.7,
    "agree": 1.5,
    "win": 2.4,
    "safe": 1.8,
    "right": 1.5,
    "smart": 1.7,
    "honest": 2.3,
    "fair": 1.6,
    "help": 1.7,
    "respect": 2.1,
    "strong": 1.5,
    "proud": 2.1,
    "happy": 2.7,
    "bad": -2.5,
    "terrible": -2.1,
    "awful": -2.0,
    "hate": -2.7,
    "disaster": -3.1,
    "wrong": -2.1,
    "lie": -1.8,
    "lies": -1.8,
    "liar": -2.3,
    "stupid": -2.4,
    "dumb": -2.3,
    "dangerous": -2.4,
    "corrupt": -3.2,
    "shameful": -2.4,
    "disgrace": -2.9,
    "fear": -2.2,
    "angry": -2.3,
    "fail": -2.5,
    "failure": -2.5,
    "worst": -3.1,
    "kill": -3.7,
    "threat": -2.4,
    "crisis": -2.3,
    "hoax": -2.2,
    "fraud": -2.8,
}

DEFAULT_BOOSTERS: dict[str, float] = {
    "very": 0.3,
    "really": 0.25,
    "extremely": 0.4,
    "so": 0.2,
    "totally": 0.3,
    "absolutely": 0.35,
    "utterly": 0.35,
    "slightly": -0.15,
    "somewhat": -0.15,
    "barely": -0.3,
    "hardly": -0.3,
}

DEFAULT_NEGATORS: frozenset[str] = frozenset(
    {
        "not", "no", "never", "none", "neither", "nor", "without",
        "cant", "can't", "cannot", "wont", "won't", "dont", "don't",
        "isnt", "isn't", "wasnt", "wasn't", "arent", "aren't",
        "werent", "weren't", "didnt", "didn't", "doesnt", "doesn't",
        "shouldnt", "shouldn't", "wouldnt", "wouldn't", "couldnt",
        "couldn't", "aint", "ain't",
    }
)


@dataclass(frozen=True)
class Lexicon:
    """Term valences plus booster increments and negator terms."""

    entries: Mapping[str, float]
    boosters: Mapping[str, float]
    negators: frozenset[str]

    def __post_init__(self) -> None:
        for term, valence in self.entries.items():
            if term != term.lower():
                raise InvalidArgumentError(f"lexicon term {term!r} is not lowercase")
            if not -4.0 <= valence <= 4.0:
                raise InvalidArgumentError(
                    f"valence {valence} for {term!r} outside [-4, 4]"
                )


def default_lexicon() -> Lexicon:
    return Lexicon(
        entries=dict(DEFAULT_ENTRIES),
        boosters=dict(DEFAULT_BOOSTERS),
        negators=DEFAULT_NEGATORS,
    )


def load_lexicon(entries_path, boosters_path=None, negators_path=None) -> Lexicon:
    """Load a lexicon from tab-separated "term<TAB>valence" files.

    Boosters use the same format; negators are one term per line. Any
    file left unspecified falls back to the built-in set.
    """
    entries = _load_tsv(entries_path)
    boosters = _load_tsv(boosters_path) if boosters_path else dict(DEFAULT_BOOSTERS)
    if negators_path:
        with open(negators_path, "r", encoding="utf-8") as fh:
            negators = frozenset(
                line.strip().lower() for line in fh if line.strip()
            )
    else:
        negators = DEFAULT_NEGATORS
    return Lexicon(entries=entries, boosters=boosters, negators=negators)


def _load_tsv(path) -> dict[str, float]:
    out: dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise InvalidArgumentError(f"{path}: line {line_no} is not term<TAB>value")
            term, raw = parts
            out[term.strip().lower()] = float(raw)
    return out


def score_text(text: str, lexicon: Lexicon | None = None) -> float:
    """Score ``text`` in (-1, 1); unknown tokens contribute nothing."""
    if lexicon is None:
        lexicon = default_lexicon()
    tokens = _TOKEN_RE.findall(text)
    if not tokens:
        return 0.0
    lowered = [t.lower() for t in tokens]
    text_all_caps = text.isupper()
    total = 0.0
    for i, token in enumerate(lowered):
        valence = lexicon.entries.get(token)
        if valence is None:
            continue
        window = lowered[max(0, i - CONTEXT_WINDOW) : i]
        if any(w in lexicon.negators for w in window):
            valence *= NEGATION_FACTOR
        for w in window:
            increment = lexicon.boosters.get(w)
            if increment is not None and valence != 0.0:
                valence += increment if valence > 0 else -increment
        if tokens[i].isupper() and not text_all_caps:
            valence *= CAPS_FACTOR
        total += valence
    return total / math.sqrt(total * total + NORMALIZATION)


@dataclass(frozen=True)
class SentimentRecord:
    """Per-tweet scores: one per model, plus their unweighted mean."""

    tweet_id: str
    per_model: Mapping[str, float]
    combined: float

    @classmethod
    def from_scores(cls, tweet_id: str, per_model: Mapping[str, float]) -> "SentimentRecord":
        if not per_model:
            raise InvalidArgumentError("at least one model score is required")
        combined = sum(per_model.values()) / len(per_model)
        return cls(tweet_id=tweet_id, per_model=dict(per_model), combined=combined)


def score_corpus(tweets, lexicon: Lexicon | None = None) -> list[SentimentRecord]:
    if lexicon is None:
        lexicon = default_lexicon()
    return [
        SentimentRecord.from_scores(t.id, {LEXICON_MODEL_NAME: score_text(t.text, lexicon)})
        for t in tweets
    ]


@dataclass
class MergeReport:
    n_merged: int = 0
    n_rejected_range: int = 0
    n_unknown_tweet: int = 0
    errors: list[str] = field(default_factory=list)


def merge_external_scores(
    records: Sequence[SentimentRecord],
    external_rows: Iterable[Mapping],
) -> tuple[list[SentimentRecord], MergeReport]:
    """Union externally supplied model scores into existing records.

    Rows must carry tweet_id, model, and a score in [-1, 1]; out-of-range
    rows are rejected and counted, unknown tweet ids are skipped with a
    warning. Combined scores are recomputed as the mean over all models.
    """
    by_tweet: dict[str, dict[str, float]] = {
        r.tweet_id: dict(r.per_model) for r in records
    }
    order = [r.tweet_id for r in records]
    report = MergeReport()
    for row in external_rows:
        tweet_id = row.get("tweet_id")
        model = row.get("model")
        score = row.get("score")
        if not isinstance(tweet_id, str) or not isinstance(model, str) or not isinstance(
            score, (int, float)
        ):
            report.n_rejected_range += 1
            report.errors.append(f"malformed external row: {row!r}")
            continue
        if not -1.0 <= float(score) <= 1.0:
            report.n_rejected_range += 1
            report.errors.append(
                f"score {score} for tweet {tweet_id!r} model {model!r} outside [-1, 1]"
            )
            continue
        if tweet_id not in by_tweet:
            report.n_unknown_tweet += 1
            logger.warning("external score for unknown tweet %r skipped", tweet_id)
            continue
        by_tweet[tweet_id][model] = float(score)
        report.n_merged += 1
    return [
        SentimentRecord.from_scores(tweet_id, by_tweet[tweet_id]) for tweet_id in order
    ], report


def classify_valence(score: float, tau: float = 0.05) -> str:
    """Bucket a score into negative / neutral / positive around a +-tau band."""
    if tau < 0:
        raise InvalidArgumentError("tau must be >= 0")
    if not -1.0 <= score <= 1.0:
        raise InvalidArgumentError(f"score {score} outside [-1, 1]")
    if score < -tau:
        return "negative"
    if score > tau:
        return "positive"
    return "neutral"


def write_sentiments(records: Iterable[SentimentRecord], fh: IO[str]) -> None:
    for record in records:
        fh.write(
            json.dumps(
                {
                    "tweet_id": record.tweet_id,
                    "per_model": dict(sorted(record.per_model.items())),
                    "combined": record.combined,
                },
                sort_keys=True,
            )
            + "\n"
        )


def read_sentiments(fh: IO[str]) -> list[SentimentRecord]:
    records = []
    for line in fh:
        if not line.strip():
            continue
        row = json.loads(line)
        records.append(
            SentimentRecord(
                tweet_id=row["tweet_id"],
                per_model=row["per_model"],
                combined=row["combined"],
            )
        )
    return records


def read_external_scores(fh: IO[str]) -> list[dict]:
    return [json.loads(line) for line in fh if line.strip()]


def combined_by_tweet(records: Iterable[SentimentRecord]) -> dict[str, float]:
    return {r.tweet_id: r.combined for r in records}

"""Corpus ingestion: tweet records, conversation assembly, engagement
filtering, and influencer ranking.

Input is JSON Lines, one tweet record per line with the fields listed in
:data:`REQUIRED_FIELDS`. Unknown fields are ignored. Malformed lines are
skipped and counted unless strict mode is requested.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from typing import IO, Iterable, Iterator, Mapping, Sequence

from .errors import InvalidArgumentError, MalformedRecordError

logger = logging.getLogger(__name__)

REFERENCE_KINDS = ("replied_to", "retweeted", "quoted")

REQUIRED_FIELDS = (
    "id",
    "author_id",
    "conversation_id",
    "created_at",
    "text",
    "references",
    "like_count",
    "reply_count",
    "retweet_count",
    "quote_count",
    "hashtags",
)

COUNT_FIELDS = ("like_count", "reply_count", "retweet_count", "quote_count")


def parse_utc(value: str) -> datetime:
    """Parse an ISO-8601 timestamp into a tz-aware UTC datetime (second precision)."""
    if not isinstance(value, str) or not value:
        raise ValueError("timestamp must be a non-empty string")
    text = value.replace("Z", "+00:00") if value.endswith("Z") else value
    parsed = datetime.fromisoformat(text)
    if parsed.tzinfo is None:
        raise ValueError(f"timestamp {value!r} has no UTC offset")
    return parsed.astimezone(timezone.utc).replace(microsecond=0)


def format_utc(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class Tweet:
    """One ingested post.

    Hashtags are normalized on construction input: lowercased, leading '#'
    stripped, deduplicated in first-seen order.
    """

    id: str
    author_id: str
    conversation_id: str
    created_at: datetime
    text: str
    references: tuple[tuple[str, str], ...]
    like_count: int
    reply_count: int
    retweet_count: int
    quote_count: int
    hashtags: tuple[str, ...]


@dataclass(frozen=True)
class Conversation:
    """A cascade: all tweets sharing one conversation id.

    ``tweet_ids`` is ordered by (created_at, id). The root is the tweet
    whose id equals the conversation id; when that tweet is missing from
    the corpus (deleted roots), the earliest tweet stands in.
    """

    conversation_id: str
    root_tweet_id: str
    tweet_ids: tuple[str, ...]
    participant_ids: frozenset[str]
    initiator_id: str
    root_created_at: datetime

    @property
    def root_day(self) -> date:
        return self.root_created_at.date()

    @property
    def n_tweets(self) -> int:
        return len(self.tweet_ids)

    @property
    def n_users(self) -> int:
        return len(self.participant_ids)


@dataclass(frozen=True)
class InfluencerRecord:
    user_id: str
    tweet_count: int
    total_likes: int
    total_retweets: int
    total_replies: int
    rank: int


@dataclass
class ParseReport:
    """Counts kept alongside a parse; ``errors`` holds up to 50 samples."""

    n_lines: int = 0
    n_tweets: int = 0
    n_malformed: int = 0
    n_duplicates: int = 0
    errors: list[str] = field(default_factory=list)

    def record_error(self, line_no: int, reason: str) -> None:
        if len(self.errors) < 50:
            self.errors.append(f"line {line_no}: {reason}")


def _normalize_hashtags(raw) -> tuple[str, ...]:
    if not isinstance(raw, list) or any(not isinstance(h, str) for h in raw):
        raise ValueError("hashtags must be a list of strings")
    seen: dict[str, None] = {}
    for tag in raw:
        cleaned = tag.lower().lstrip("#").strip()
        if cleaned:
            seen.setdefault(cleaned, None)
    return tuple(seen)


def _parse_references(raw) -> tuple[tuple[str, str], ...]:
    if not isinstance(raw, list):
        raise ValueError("references must be a list")
    out = []
    for ref in raw:
        if not isinstance(ref, Mapping):
            raise ValueError("reference entries must be objects")
        kind = ref.get("kind")
        target = ref.get("target_tweet_id")
        if kind not in REFERENCE_KINDS:
            raise ValueError(f"unknown reference kind {kind!r}")
        if not isinstance(target, str) or not target:
            raise ValueError("reference target_tweet_id must be a non-empty string")
        out.append((kind, target))
    return tuple(out)


def tweet_from_record(record: Mapping) -> Tweet:
    """Validate one decoded JSON record and build a Tweet.

    Raises ValueError on any contract violation.
    """
    missing = [f for f in REQUIRED_FIELDS if f not in record]
    if missing:
        raise ValueError(f"missing fields: {', '.join(missing)}")
    for name in ("id", "author_id", "conversation_id"):
        value = record[name]
        if not isinstance(value, str) or not value:
            raise ValueError(f"{name} must be a non-empty string")
    if not isinstance(record["text"], str):
        raise ValueError("text must be a string")
    counts = {}
    for name in COUNT_FIELDS:
        value = record[name]
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise ValueError(f"{name} must be a non-negative integer")
        counts[name] = value
    return Tweet(
        id=record["id"],
        author_id=record["author_id"],
        conversation_id=record["conversation_id"],
        created_at=parse_utc(record["created_at"]),
        text=record["text"],
        references=_parse_references(record["references"]),
        hashtags=_normalize_hashtags(record["hashtags"]),
        **counts,
    )


def tweet_to_record(tweet: Tweet) -> dict:
    return {
        "id": tweet.id,
        "author_id": tweet.author_id,
        "conversation_id": tweet.conversation_id,
        "created_at": format_utc(tweet.created_at),
        "text": tweet.text,
        "references": [
            {"kind": kind, "target_tweet_id": target} for kind, target in tweet.references
        ],
        "like_count": tweet.like_count,
        "reply_count": tweet.reply_count,
        "retweet_count": tweet.retweet_count,
        "quote_count": tweet.quote_count,
        "hashtags": list(tweet.hashtags),
    }


def parse_corpus(lines: Iterable[str], strict: bool = False) -> tuple[list[Tweet], ParseReport]:
    """Parse a JSON Lines stream into tweets.

    Duplicate ids keep the first occurrence. Malformed lines are skipped
    and counted; with ``strict=True`` the first malformed line raises
    :class:`MalformedRecordError` instead.
    """
    tweets: list[Tweet] = []
    seen_ids: set[str] = set()
    report = ParseReport()
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        report.n_lines += 1
        try:
            record = json.loads(line)
            if not isinstance(record, Mapping):
                raise ValueError("record must be a JSON object")
            tweet = tweet_from_record(record)
        except (ValueError, TypeError) as exc:
            if strict:
                raise MalformedRecordError(f"line {line_no}: {exc}") from exc
            report.n_malformed += 1
            report.record_error(line_no, str(exc))
            continue
        if tweet.id in seen_ids:
            report.n_duplicates += 1
            report.record_error(line_no, f"duplicate id {tweet.id!r}")
            continue
        seen_ids.add(tweet.id)
        tweets.append(tweet)
    report.n_tweets = len(tweets)
    return tweets, report


def load_corpus(path, strict: bool = False) -> tuple[list[Tweet], ParseReport]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_corpus(fh, strict=strict)


def assemble_conversations(tweets: Sequence[Tweet]) -> list[Conversation]:
    """Group tweets by conversation id, one Conversation per distinct id.

    Output is sorted by conversation id so shard merges are deterministic.
    """
    by_conv: dict[str, list[Tweet]] = {}
    for tweet in tweets:
        by_conv.setdefault(tweet.conversation_id, []).append(tweet)
    conversations = []
    for conv_id in sorted(by_conv):
        members = sorted(by_conv[conv_id], key=lambda t: (t.created_at, t.id))
        root = next((t for t in members if t.id == conv_id), members[0])
        conversations.append(
            Conversation(
                conversation_id=conv_id,
                root_tweet_id=root.id,
                tweet_ids=tuple(t.id for t in members),
                participant_ids=frozenset(t.author_id for t in members),
                initiator_id=root.author_id,
                root_created_at=root.created_at,
            )
        )
    return conversations


def filter_conversations(
    conversations: Iterable[Conversation],
    min_tweets: int = 20,
    min_users: int = 10,
) -> list[Conversation]:
    """Keep conversations with at least ``min_tweets`` tweets and ``min_users`` users."""
    if min_tweets < 1 or min_users < 1:
        raise InvalidArgumentError("min_tweets and min_users must be >= 1")
    return [
        c for c in conversations if c.n_tweets >= min_tweets and c.n_users >= min_users
    ]


def rank_influencers(tweets: Sequence[Tweet], k: int) -> list[InfluencerRecord]:
    """Top-k users by accumulated likes over their authored tweets.

    Ties break by total retweets, then total replies, then user id
    ascending, so the ranking is a deterministic total order.
    """
    if k < 1:
        raise InvalidArgumentError("k must be >= 1")
    totals: dict[str, list[int]] = {}
    for tweet in tweets:
        agg = totals.setdefault(tweet.author_id, [0, 0, 0, 0])
        agg[0] += 1
        agg[1] += tweet.like_count
        agg[2] += tweet.retweet_count
        agg[3] += tweet.reply_count
    ordered = sorted(
        totals.items(), key=lambda item: (-item[1][1], -item[1][2], -item[1][3], item[0])
    )
    return [
        InfluencerRecord(
            user_id=user_id,
            tweet_count=agg[0],
            total_likes=agg[1],
            total_retweets=agg[2],
            total_replies=agg[3],
            rank=rank,
        )
        for rank, (user_id, agg) in enumerate(ordered[:k], start=1)
    ]


def write_conversation_index(conversations: Iterable[Conversation], fh: IO[str]) -> None:
    """Emit the conversation index as JSON Lines."""
    for conv in conversations:
        fh.write(
            json.dumps(
                {
                    "conversation_id": conv.conversation_id,
                    "root_tweet_id": conv.root_tweet_id,
                    "n_tweets": conv.n_tweets,
                    "n_users": conv.n_users,
                    "initiator_id": conv.initiator_id,
                },
                sort_keys=True,
            )
            + "\n"
        )


def iter_conversation_index(fh: IO[str]) -> Iterator[dict]:
    for line in fh:
        if line.strip():
            yield json.loads(line)


INFLUENCER_CSV_HEADER = [
    "rank",
    "user_id",
    "tweet_count",
    "total_likes",
    "total_retweets",
    "total_replies",
]


def write_influencers(records: Iterable[InfluencerRecord], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(INFLUENCER_CSV_HEADER)
    for r in records:
        writer.writerow(
            [r.rank, r.user_id, r.tweet_count, r.total_likes, r.total_retweets, r.total_replies]
        )


def read_influencers(fh: IO[str]) -> list[InfluencerRecord]:
    reader = csv.reader(fh)
    header = next(reader)
    if header != INFLUENCER_CSV_HEADER:
        raise ValueError(f"unexpected influencer CSV header: {header!r}")
    return [
        InfluencerRecord(
            rank=int(row[0]),
            user_id=row[1],
            tweet_count=int(row[2]),
            total_likes=int(row[3]),
            total_retweets=int(row[4]),
            total_replies=int(row[5]),
        )
        for row in reader
    ]

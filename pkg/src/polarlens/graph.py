"""Directed user-user interaction multigraph and its surgical edits.

One edge per (tweet, reference) pair whose target tweet exists in the
corpus; the edge runs from the authoring user to the author of the
referenced tweet and carries the authoring tweet's combined sentiment.
Graphs are immutable after construction: slices and removals return new
values.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import IO, Iterable, Mapping, Sequence

from .corpus import Conversation, Tweet, format_utc, parse_utc
from .errors import NotFoundError

logger = logging.getLogger(__name__)

EDGE_KINDS = ("reply", "retweet", "quote")

_REFERENCE_TO_KIND = {"replied_to": "reply", "retweeted": "retweet", "quoted": "quote"}

CSV_HEADER = [
    "author_id",
    "target_id",
    "kind",
    "tweet_id",
    "conversation_id",
    "timestamp",
    "sentiment",
]


@dataclass(frozen=True)
class InteractionEdge:
    author_id: str
    target_id: str
    kind: str
    tweet_id: str
    conversation_id: str
    timestamp: datetime
    sentiment: float

    @property
    def is_self_loop(self) -> bool:
        return self.author_id == self.target_id

    @property
    def day(self) -> date:
        return self.timestamp.date()


@dataclass(frozen=True)
class InteractionGraph:
    """Node set plus edge multiset with author / conversation / day indexes.

    ``conversation_participants`` maps conversation ids to the authors of
    all tweets in that conversation (not only those with edges); node-mode
    conversation removal uses it.
    """

    nodes: frozenset[str]
    edges: tuple[InteractionEdge, ...]
    conversation_participants: Mapping[str, frozenset[str]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        by_author: dict[str, list[int]] = {}
        by_conversation: dict[str, list[int]] = {}
        by_day: dict[date, list[int]] = {}
        for i, edge in enumerate(self.edges):
            by_author.setdefault(edge.author_id, []).append(i)
            by_conversation.setdefault(edge.conversation_id, []).append(i)
            by_day.setdefault(edge.day, []).append(i)
        object.__setattr__(self, "_by_author", by_author)
        object.__setattr__(self, "_by_conversation", by_conversation)
        object.__setattr__(self, "_by_day", by_day)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def conversation_ids(self) -> set[str]:
        return set(self._by_conversation)

    def days(self) -> list[date]:
        return sorted(self._by_day)

    def edges_by_author(self, author_id: str) -> list[InteractionEdge]:
        return [self.edges[i] for i in self._by_author.get(author_id, ())]

    def edges_in_conversation(self, conversation_id: str) -> list[InteractionEdge]:
        return [self.edges[i] for i in self._by_conversation.get(conversation_id, ())]

    def edges_on_day(self, day: date) -> list[InteractionEdge]:
        return [self.edges[i] for i in self._by_day.get(day, ())]

    def neighbors(self, user_id: str) -> set[str]:
        """Users with at least one edge to or from ``user_id`` (self excluded)."""
        out: set[str] = set()
        for edge in self.edges:
            if edge.author_id == user_id:
                out.add(edge.target_id)
            if edge.target_id == user_id:
                out.add(edge.author_id)
        out.discard(user_id)
        return out


@dataclass
class GraphBuildReport:
    n_edges: int = 0
    n_nodes: int = 0
    n_dropped_references: int = 0
    n_tweets_missing_sentiment: int = 0


def build_graph(
    conversations: Sequence[Conversation] | None,
    tweets: Sequence[Tweet],
    sentiments: Mapping[str, float],
    include_quotes: bool = True,
) -> tuple[InteractionGraph, GraphBuildReport]:
    """Build the interaction graph for the given conversations.

    When ``conversations`` is provided only their tweets participate;
    passing None uses the whole tweet list. References whose target tweet
    is absent from the corpus are dropped and counted. Tweets missing a
    sentiment score get 0.0 and are counted.
    """
    author_by_tweet = {t.id: t.author_id for t in tweets}
    if conversations is None:
        scoped = list(tweets)
    else:
        kept_conversations = {c.conversation_id for c in conversations}
        scoped = [t for t in tweets if t.conversation_id in kept_conversations]

    report = GraphBuildReport()
    edges: list[InteractionEdge] = []
    nodes: set[str] = set()
    participants: dict[str, set[str]] = {}
    for tweet in scoped:
        nodes.add(tweet.author_id)
        participants.setdefault(tweet.conversation_id, set()).add(tweet.author_id)
        sentiment = sentiments.get(tweet.id)
        if sentiment is None:
            sentiment = 0.0
            report.n_tweets_missing_sentiment += 1
        for ref_kind, target_tweet in tweet.references:
            kind = _REFERENCE_TO_KIND[ref_kind]
            if kind == "quote" and not include_quotes:
                continue
            target_author = author_by_tweet.get(target_tweet)
            if target_author is None:
                report.n_dropped_references += 1
                continue
            nodes.add(target_author)
            edges.append(
                InteractionEdge(
                    author_id=tweet.author_id,
                    target_id=target_author,
                    kind=kind,
                    tweet_id=tweet.id,
                    conversation_id=tweet.conversation_id,
                    timestamp=tweet.created_at,
                    sentiment=sentiment,
                )
            )
    graph = InteractionGraph(
        nodes=frozenset(nodes),
        edges=tuple(edges),
        conversation_participants={
            cid: frozenset(users) for cid, users in participants.items()
        },
    )
    report.n_edges = graph.n_edges
    report.n_nodes = graph.n_nodes
    return graph, report


def daily_slice(graph: InteractionGraph, day: date) -> InteractionGraph:
    """Edges whose timestamp falls within the UTC day; nodes are edge endpoints."""
    edges = tuple(graph.edges_on_day(day))
    nodes: set[str] = set()
    for edge in edges:
        nodes.add(edge.author_id)
        nodes.add(edge.target_id)
    return InteractionGraph(
        nodes=frozenset(nodes),
        edges=edges,
        conversation_participants=graph.conversation_participants,
    )


def influencer_subgraph(
    graph: InteractionGraph,
    influencer_id: str,
    audience: Iterable[str] | None = None,
) -> InteractionGraph:
    """One-hop-closed subgraph around an influencer's audience.

    The audience defaults to the influencer's interaction neighbors when
    no follower list is supplied. The node set is the audience, the
    influencer, and every user adjacent to an audience member; all edges
    among that set are kept.
    """
    if influencer_id not in graph.nodes:
        raise NotFoundError(f"influencer {influencer_id!r} not in graph")
    if audience is None:
        audience_set = graph.neighbors(influencer_id)
    else:
        audience_set = {a for a in audience if a in graph.nodes}
    keep = set(audience_set)
    keep.add(influencer_id)
    for edge in graph.edges:
        if edge.author_id in audience_set:
            keep.add(edge.target_id)
        if edge.target_id in audience_set:
            keep.add(edge.author_id)
    edges = tuple(
        e for e in graph.edges if e.author_id in keep and e.target_id in keep
    )
    return InteractionGraph(
        nodes=frozenset(keep),
        edges=edges,
        conversation_participants=graph.conversation_participants,
    )


def remove_conversation(
    graph: InteractionGraph,
    conversation_id: str,
    mode: str = "edges",
) -> InteractionGraph:
    """Return a graph without a conversation's contribution.

    mode="edges" removes exactly the edges tagged with the conversation
    id, then drops nodes that lost their last incident edge. mode="nodes"
    removes every user who authored a tweet in the conversation together
    with all their incident edges, whatever conversation those belong to.
    """
    if mode not in ("edges", "nodes"):
        raise ValueError(f"unknown removal mode {mode!r}")
    known = conversation_id in graph.conversation_participants or bool(
        graph.edges_in_conversation(conversation_id)
    )
    if not known:
        logger.warning("conversation %r not present in graph; removal is a no-op", conversation_id)
        return InteractionGraph(
            nodes=graph.nodes,
            edges=graph.edges,
            conversation_participants=graph.conversation_participants,
        )

    if mode == "edges":
        kept = tuple(e for e in graph.edges if e.conversation_id != conversation_id)
        before = _touched_nodes(graph.edges)
        after = _touched_nodes(kept)
        newly_isolated = before - after
        nodes = frozenset(n for n in graph.nodes if n not in newly_isolated)
        return InteractionGraph(
            nodes=nodes,
            edges=kept,
            conversation_participants=graph.conversation_participants,
        )

    involved = set(graph.conversation_participants.get(conversation_id, frozenset()))
    involved.update(e.author_id for e in graph.edges_in_conversation(conversation_id))
    involved &= graph.nodes
    kept = tuple(
        e
        for e in graph.edges
        if e.author_id not in involved and e.target_id not in involved
    )
    return InteractionGraph(
        nodes=frozenset(graph.nodes - involved),
        edges=kept,
        conversation_participants=graph.conversation_participants,
    )


def _touched_nodes(edges: Iterable[InteractionEdge]) -> set[str]:
    touched: set[str] = set()
    for edge in edges:
        touched.add(edge.author_id)
        touched.add(edge.target_id)
    return touched


def write_graph_csv(graph: InteractionGraph, fh: IO[str]) -> None:
    """Canonical serialization: rows sorted by (timestamp, tweet_id, target_id)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for edge in sorted(graph.edges, key=lambda e: (e.timestamp, e.tweet_id, e.target_id)):
        writer.writerow(
            [
                edge.author_id,
                edge.target_id,
                edge.kind,
                edge.tweet_id,
                edge.conversation_id,
                format_utc(edge.timestamp),
                repr(edge.sentiment),
            ]
        )


def read_graph_csv(fh: IO[str]) -> InteractionGraph:
    """Load a canonical graph CSV. Participant info is reconstructed from
    edge authors only, so node-mode removal on a re-loaded graph covers
    just the users visible in edges."""
    reader = csv.reader(fh)
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected graph CSV header: {header!r}")
    edges = []
    participants: dict[str, set[str]] = {}
    for row in reader:
        edge = InteractionEdge(
            author_id=row[0],
            target_id=row[1],
            kind=row[2],
            tweet_id=row[3],
            conversation_id=row[4],
            timestamp=parse_utc(row[5]),
            sentiment=float(row[6]),
        )
        edges.append(edge)
        participants.setdefault(edge.conversation_id, set()).add(edge.author_id)
    return InteractionGraph(
        nodes=frozenset(_touched_nodes(edges)),
        edges=tuple(edges),
        conversation_participants={c: frozenset(u) for c, u in participants.items()},
    )

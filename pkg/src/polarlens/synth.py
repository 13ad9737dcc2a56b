"""Seeded synthetic corpora with known stances and planted effects.

The generator emits a tweet corpus whose ground truth is known exactly:
stance groups are assigned by quota, interaction probabilities differ
within and across groups, reply sentiment follows clipped Gaussians, and
a configurable list of influencer-led conversations is planted with a
chosen size, cross-group share, and sentiment bias. The manifest records
each planted conversation together with its expected with/without scores
precomputed by the naive oracles in this module.

The oracles (``oracle_ei``, ``oracle_delta``) are deliberately separate,
single-pass reimplementations of the polarization math over plain edge
tuples; the test suite compares the production code against them.

Everything is driven by one seeded generator, so identical configs give
byte-identical outputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from typing import IO, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .corpus import Tweet, format_utc, tweet_from_record
from .errors import InvalidArgumentError
from .sentiment import Lexicon, default_lexicon, score_text

PRO = "pro"
ANTI = "anti"
UNDECIDED = "undecided"

GROUND_TRUTH_HEADER = "user_id,true_stance"

_FILLERS = ("policy", "debate", "thread", "update", "report", "question", "statement")
_POSITIVE_TOKENS = ("good", "great", "hopeful", "progress", "support")
_NEGATIVE_TOKENS = ("bad", "awful", "wrong", "disaster", "hate")
_SIDE_VOCAB = {
    PRO: ("bluefield", "northway"),
    ANTI: ("redfield", "southway"),
}
_SIDE_VOCAB_RATE = 0.75

_KIND_CHOICES = ("replied_to", "retweeted", "quoted")
_KIND_WEIGHTS = (0.7, 0.2, 0.1)

_INFLUENCER_LIKE_STEP = 10_000_000


@dataclass(frozen=True)
class PlantedConversation:
    """One influencer-led conversation with controlled structure.

    ``size`` counts participants including the initiator; the
    conversation carries 2 * size reply edges, of which a
    ``cross_fraction`` share crosses stance groups. Reply sentiment
    targets ``sentiment_bias``.
    """

    day: int
    initiator_stance: str
    size: int
    cross_fraction: float
    sentiment_bias: float


@dataclass(frozen=True)
class SynthConfig:
    rng_seed: int = 7
    n_users: int = 200
    frac_pro: float = 0.5
    frac_undecided: float = 0.1
    days: int = 4
    conversations_per_day: int = 4
    participants_per_conversation: int = 30
    p_in: float = 0.05
    p_out: float = 0.005
    mu_in: float = 0.3
    mu_out: float = -0.4
    sigma: float = 0.2
    hashtags_per_side: int = 3
    seed_hashtags_per_side: int = 2
    hashtag_rate: float = 0.3
    n_vocal_per_side: int = 10
    vocal_standalone_tweets: int = 3
    n_influencers: int = 4
    planted: tuple[PlantedConversation, ...] = ()
    start_day: date = date(2024, 3, 1)

    def counts(self) -> tuple[int, int, int]:
        n_pro = int(round(self.frac_pro * self.n_users))
        n_undecided = int(round(self.frac_undecided * self.n_users))
        return n_pro, self.n_users - n_pro - n_undecided, n_undecided

    def validate(self) -> None:
        if self.n_users < 4:
            raise InvalidArgumentError("n_users must be >= 4")
        if not 0.0 < self.frac_pro < 1.0 or not 0.0 <= self.frac_undecided < 1.0:
            raise InvalidArgumentError("stance fractions out of range")
        if self.frac_pro + self.frac_undecided >= 1.0:
            raise InvalidArgumentError("frac_pro + frac_undecided must be < 1")
        for name, value in (("p_in", self.p_in), ("p_out", self.p_out), ("hashtag_rate", self.hashtag_rate)):
            if not 0.0 <= value <= 1.0:
                raise InvalidArgumentError(f"{name} must be in [0, 1]")
        if self.sigma < 0:
            raise InvalidArgumentError("sigma must be >= 0")
        if self.days < 1 or self.conversations_per_day < 0:
            raise InvalidArgumentError("days must be >= 1 and conversations_per_day >= 0")
        if self.participants_per_conversation < 2:
            raise InvalidArgumentError("participants_per_conversation must be >= 2")
        if self.participants_per_conversation > self.n_users:
            raise InvalidArgumentError("participants_per_conversation exceeds n_users")
        if not 1 <= self.seed_hashtags_per_side <= self.hashtags_per_side:
            raise InvalidArgumentError("seed_hashtags_per_side must be in [1, hashtags_per_side]")
        if self.n_influencers < 1:
            raise InvalidArgumentError("n_influencers must be >= 1")
        n_pro, n_anti, _ = self.counts()
        if n_pro < 1 or n_anti < 1:
            raise InvalidArgumentError("both decided groups must be non-empty")
        n_core = self.n_influencers + 2 * self.n_vocal_per_side
        if n_core > n_pro + n_anti:
            raise InvalidArgumentError("not enough decided users for influencers and vocal users")
        influencer_stances = [PRO if i % 2 == 0 else ANTI for i in range(self.n_influencers)]
        for planted in self.planted:
            if planted.initiator_stance not in (PRO, ANTI):
                raise InvalidArgumentError(
                    f"planted initiator stance must be pro or anti, got {planted.initiator_stance!r}"
                )
            if planted.initiator_stance not in influencer_stances:
                raise InvalidArgumentError(
                    f"no influencer carries planted stance {planted.initiator_stance!r};"
                    " raise n_influencers"
                )
            if not 0 <= planted.day < self.days:
                raise InvalidArgumentError(f"planted day {planted.day} outside [0, {self.days})")
            if planted.size < 4:
                raise InvalidArgumentError("planted size must be >= 4")
            if not 0.0 <= planted.cross_fraction <= 1.0:
                raise InvalidArgumentError("cross_fraction must be in [0, 1]")
            if not -1.0 <= planted.sentiment_bias <= 1.0:
                raise InvalidArgumentError("sentiment_bias must be in [-1, 1]")


class EdgeTuple(NamedTuple):
    """Minimal interaction view used by the oracles."""

    author: str
    target: str
    conversation_id: str
    sentiment: float


def as_edge_tuples(edges) -> list[EdgeTuple]:
    """Project production graph edges onto oracle tuples."""
    return [
        EdgeTuple(e.author_id, e.target_id, e.conversation_id, e.sentiment) for e in edges
    ]


def oracle_ei(
    edges: Iterable[EdgeTuple],
    stances: Mapping[str, str],
    direction: tuple[str, str],
    weight_mode: str = "count_negative",
    tau: float = 0.05,
) -> float | None:
    """Naive single-pass E/I tally, kept independent of the production path."""
    source, target = direction
    if source == target:
        raise InvalidArgumentError("direction must name two distinct groups")
    ext = 0.0
    internal = 0.0
    for author, tgt, _cid, sentiment in edges:
        if author == tgt or stances.get(author) != source:
            continue
        if weight_mode == "count_all":
            w = 1.0
        elif weight_mode == "count_negative":
            w = 1.0 if sentiment < -tau else 0.0
        elif weight_mode == "sentiment_mass":
            w = -sentiment if sentiment < 0 else 0.0
        else:
            raise InvalidArgumentError(f"unknown weight mode {weight_mode!r}")
        group = stances.get(tgt)
        if group == target:
            ext += w
        elif group == source:
            internal += w
    if ext + internal == 0:
        return None
    return (ext - internal) / (ext + internal)


def oracle_subgraph(
    edges: Sequence[EdgeTuple],
    influencer_id: str,
    audience: Iterable[str] | None = None,
) -> list[EdgeTuple]:
    """Independent audience-closure subgraph: audience, influencer, and
    every neighbor of an audience member."""
    if audience is None:
        audience_set = set()
        for author, target, _cid, _s in edges:
            if author == influencer_id:
                audience_set.add(target)
            if target == influencer_id:
                audience_set.add(author)
        audience_set.discard(influencer_id)
    else:
        audience_set = set(audience)
    keep = set(audience_set) | {influencer_id}
    for author, target, _cid, _s in edges:
        if author in audience_set:
            keep.add(target)
        if target in audience_set:
            keep.add(author)
    return [e for e in edges if e.author in keep and e.target in keep]


def oracle_delta(
    edges: Sequence[EdgeTuple],
    stances: Mapping[str, str],
    conversation_id: str,
    direction: tuple[str, str],
    weight_mode: str = "count_negative",
    tau: float = 0.05,
    removal_mode: str = "edges",
    participants: Mapping[str, Iterable[str]] | None = None,
) -> tuple[float | None, float | None, float | None]:
    """Recompute (with, without, delta) from scratch on filtered tuples."""
    score_with = oracle_ei(edges, stances, direction, weight_mode, tau)
    if removal_mode == "edges":
        remaining = [e for e in edges if e.conversation_id != conversation_id]
    elif removal_mode == "nodes":
        involved = set(participants.get(conversation_id, ())) if participants else set()
        involved.update(e.author for e in edges if e.conversation_id == conversation_id)
        remaining = [
            e for e in edges if e.author not in involved and e.target not in involved
        ]
    else:
        raise InvalidArgumentError(f"unknown removal mode {removal_mode!r}")
    score_without = oracle_ei(remaining, stances, direction, weight_mode, tau)
    if score_with is None or score_without is None:
        return score_with, score_without, None
    return score_with, score_without, score_with - score_without


@dataclass
class SynthCorpus:
    records: list[dict]
    tweets: list[Tweet]
    ground_truth: dict[str, str]
    seed_hashtags: dict[str, str]
    manifest: dict
    config: SynthConfig


class _Emitter:
    """Sequences tweet ids and per-day timestamps."""

    def __init__(self, start_day: date):
        self.start_day = start_day
        self.records: list[dict] = []
        self.seconds: dict[int, int] = {}

    def emit(
        self,
        author: str,
        day: int,
        text: str,
        hashtags: list[str],
        conversation_id: str | None = None,
        reference: tuple[str, str] | None = None,
        likes: int = 0,
    ) -> str:
        tweet_id = f"t{len(self.records):08d}"
        second = self.seconds.get(day, 0)
        if second >= 86_400:
            raise InvalidArgumentError("too many tweets for one synthetic day")
        self.seconds[day] = second + 1
        moment = datetime.combine(
            self.start_day + timedelta(days=day), datetime.min.time(), tzinfo=timezone.utc
        ) + timedelta(seconds=second)
        self.records.append(
            {
                "id": tweet_id,
                "author_id": author,
                "conversation_id": conversation_id or tweet_id,
                "created_at": format_utc(moment),
                "text": text,
                "references": (
                    [{"kind": reference[0], "target_tweet_id": reference[1]}]
                    if reference
                    else []
                ),
                "like_count": likes,
                "reply_count": 0,
                "retweet_count": 0,
                "quote_count": 0,
                "hashtags": hashtags,
            }
        )
        return tweet_id


def _compose_text(rng: np.random.Generator, valence: float, stance: str) -> str:
    tokens = [str(rng.choice(_FILLERS)), str(rng.choice(_FILLERS))]
    magnitude = abs(valence)
    if magnitude >= 0.05:
        pool = _POSITIVE_TOKENS if valence > 0 else _NEGATIVE_TOKENS
        k = 1 + (magnitude > 0.4) + (magnitude > 0.7)
        tokens.extend(str(rng.choice(pool)) for _ in range(k))
    if rng.random() < _SIDE_VOCAB_RATE:
        if stance == UNDECIDED:
            vocab = _SIDE_VOCAB[PRO] + _SIDE_VOCAB[ANTI]
        else:
            vocab = _SIDE_VOCAB[stance]
        tokens.append(str(rng.choice(vocab)))
    return " ".join(tokens)


class _UserCycle:
    """Draws users evenly: a reshuffled full pass before anyone repeats."""

    def __init__(self, rng: np.random.Generator, users: Sequence[str]):
        self.rng = rng
        self.users = list(users)
        self.pool: list[str] = []

    def draw_distinct(self, k: int) -> list[str]:
        out: list[str] = []
        seen: set[str] = set()
        while len(out) < k:
            if not self.pool:
                order = self.rng.permutation(len(self.users))
                self.pool = [self.users[i] for i in order]
            candidate = self.pool.pop()
            if candidate not in seen:
                seen.add(candidate)
                out.append(candidate)
        return out


def generate_corpus(config: SynthConfig, lexicon: Lexicon | None = None) -> SynthCorpus:
    """Build the corpus, ground truth, seed hashtag sides, and manifest."""
    config.validate()
    if lexicon is None:
        lexicon = default_lexicon()
    rng = np.random.default_rng(config.rng_seed)
    width = max(5, len(str(config.n_users - 1)))
    users = [f"u{i:0{width}d}" for i in range(config.n_users)]

    n_pro, n_anti, _ = config.counts()
    order = rng.permutation(config.n_users)
    stance_of: dict[str, str] = {}
    pro_users: list[str] = []
    anti_users: list[str] = []
    for position, user_index in enumerate(order):
        user = users[user_index]
        if position < n_pro:
            stance_of[user] = PRO
            pro_users.append(user)
        elif position < n_pro + n_anti:
            stance_of[user] = ANTI
            anti_users.append(user)
        else:
            stance_of[user] = UNDECIDED

    influencers: list[str] = []
    pro_iter, anti_iter = iter(pro_users), iter(anti_users)
    for i in range(config.n_influencers):
        influencers.append(next(pro_iter) if i % 2 == 0 else next(anti_iter))
    influencer_set = set(influencers)

    vocal: dict[str, str] = {}
    for side_users, side in ((pro_users, PRO), (anti_users, ANTI)):
        picked = [u for u in side_users if u not in influencer_set][: config.n_vocal_per_side]
        if len(picked) < config.n_vocal_per_side:
            raise InvalidArgumentError("not enough non-influencer users for vocal quota")
        for user in picked:
            vocal[user] = side

    pools = {
        PRO: [f"pro{i}" for i in range(config.hashtags_per_side)],
        ANTI: [f"anti{i}" for i in range(config.hashtags_per_side)],
    }
    seed_hashtags = {}
    for side in (PRO, ANTI):
        for tag in pools[side][: config.seed_hashtags_per_side]:
            seed_hashtags[tag] = side
    unseeded = {
        side: pools[side][config.seed_hashtags_per_side :] for side in (PRO, ANTI)
    }

    vocal_tag_count: dict[str, int] = {}

    def hashtags_for(user: str) -> list[str]:
        side = vocal.get(user)
        if side is not None:
            tags = pools[side][: config.seed_hashtags_per_side]
            count = vocal_tag_count.get(user, 0)
            vocal_tag_count[user] = count + 1
            return [tags[count % len(tags)]]
        stance = stance_of[user]
        if rng.random() >= config.hashtag_rate:
            return []
        if stance == UNDECIDED:
            candidates = unseeded[PRO] + unseeded[ANTI]
        else:
            candidates = unseeded[stance]
        if not candidates:
            return []
        return [str(rng.choice(candidates))]

    emitter = _Emitter(config.start_day)

    # Influencer profile tweets carry the engagement that fixes the ranking.
    for rank_index, user in enumerate(influencers):
        emitter.emit(
            author=user,
            day=0,
            text=_compose_text(rng, 0.0, stance_of[user]),
            hashtags=hashtags_for(user),
            likes=_INFLUENCER_LIKE_STEP * (config.n_influencers - rank_index),
        )

    # Standalone tweets give every vocal user enough seed-hashtag uses.
    for user in vocal:
        for _ in range(config.vocal_standalone_tweets):
            emitter.emit(
                author=user,
                day=0,
                text=_compose_text(rng, 0.0, stance_of[user]),
                hashtags=hashtags_for(user),
                likes=int(rng.integers(0, 5)),
            )

    def same_group(a: str, b: str) -> bool:
        return (
            stance_of[a] != UNDECIDED
            and stance_of[a] == stance_of[b]
        )

    def run_conversation(
        day: int,
        participants: Sequence[str],
        reply_plan: Iterable[tuple[str, str, float]],
        join_replies: bool = False,
    ) -> str:
        """Emit the root, one presence tweet per participant, then the
        planned replies.

        With ``join_replies`` the presence tweets are neutral replies to
        the root: every participant lands in the initiator's audience
        while the zero valence leaves negative-count tallies untouched.
        Planted conversations use this so the influencer subgraph always
        contains them. ``reply_plan`` yields (author, target participant,
        valence).
        """
        initiator = participants[0]
        root_id = emitter.emit(
            author=initiator,
            day=day,
            text=_compose_text(rng, 0.0, stance_of[initiator]),
            hashtags=hashtags_for(initiator),
            likes=int(rng.integers(0, 5)),
        )
        presence = {initiator: root_id}
        for user in participants[1:]:
            presence[user] = emitter.emit(
                author=user,
                day=day,
                text=_compose_text(rng, 0.0, stance_of[user]),
                hashtags=hashtags_for(user),
                conversation_id=root_id,
                reference=("replied_to", root_id) if join_replies else None,
                likes=int(rng.integers(0, 5)),
            )
        for author, target, valence in reply_plan:
            kind = _KIND_CHOICES[rng.choice(len(_KIND_CHOICES), p=_KIND_WEIGHTS)]
            emitter.emit(
                author=author,
                day=day,
                text=_compose_text(rng, valence, stance_of[author]),
                hashtags=hashtags_for(author),
                conversation_id=root_id,
                reference=(kind, presence[target]),
                likes=int(rng.integers(0, 5)),
            )
        return root_id

    cycle = _UserCycle(rng, users)
    for day in range(config.days):
        for _ in range(config.conversations_per_day):
            participants = cycle.draw_distinct(config.participants_per_conversation)

            def background_plan():
                for author in participants:
                    for target in participants:
                        if author == target:
                            continue
                        p = config.p_in if same_group(author, target) else config.p_out
                        if rng.random() < p:
                            mu = config.mu_in if same_group(author, target) else config.mu_out
                            valence = float(
                                np.clip(rng.normal(mu, config.sigma), -1.0, 1.0)
                            )
                            yield author, target, valence

            run_conversation(day, participants, background_plan())

    # Planted conversations, one per config entry, initiated by
    # influencers of the requested stance in rotation.
    stance_rotation: dict[str, int] = {PRO: 0, ANTI: 0}
    planted_entries: list[dict] = []
    for planted in config.planted:
        side_influencers = [u for u in influencers if stance_of[u] == planted.initiator_stance]
        initiator = side_influencers[stance_rotation[planted.initiator_stance] % len(side_influencers)]
        stance_rotation[planted.initiator_stance] += 1

        same_pool = [u for u in (pro_users if planted.initiator_stance == PRO else anti_users) if u != initiator]
        opp_pool = anti_users if planted.initiator_stance == PRO else pro_users
        n_opp = (planted.size - 1) // 2
        n_same = planted.size - 1 - n_opp
        same_members = [initiator] + [
            same_pool[i] for i in rng.choice(len(same_pool), size=n_same, replace=False)
        ]
        opp_members = [opp_pool[i] for i in rng.choice(len(opp_pool), size=n_opp, replace=False)]
        participants = same_members + opp_members

        n_edges = 2 * planted.size
        n_cross = int(round(planted.cross_fraction * n_edges))
        n_within = n_edges - n_cross

        def planted_plan():
            def pick_pair(authors: Sequence[str], targets: Sequence[str]):
                while True:
                    author = authors[rng.choice(len(authors))]
                    target = targets[rng.choice(len(targets))]
                    if author != target:
                        return author, target

            for i in range(n_cross):
                if i % 2 == 0:
                    author, target = pick_pair(same_members, opp_members)
                else:
                    author, target = pick_pair(opp_members, same_members)
                valence = float(
                    np.clip(rng.normal(planted.sentiment_bias, config.sigma / 2), -1.0, 1.0)
                )
                yield author, target, valence
            # a group needs two members to host a within-group edge
            hosts = [g for g in (same_members, opp_members) if len(g) >= 2]
            for i in range(n_within):
                group = hosts[i % len(hosts)]
                author, target = pick_pair(group, group)
                valence = float(np.clip(rng.normal(config.mu_in, config.sigma), -1.0, 1.0))
                yield author, target, valence

        conversation_id = run_conversation(
            planted.day, participants, planted_plan(), join_replies=True
        )
        planted_entries.append(
            {
                "conversation_id": conversation_id,
                "influencer_id": initiator,
                "influencer_stance": planted.initiator_stance,
                "day": (config.start_day + timedelta(days=planted.day)).isoformat(),
                "size": planted.size,
                "cross_fraction": planted.cross_fraction,
                "sentiment_bias": planted.sentiment_bias,
                "n_edges": n_edges,
            }
        )

    tweets = [tweet_from_record(record) for record in emitter.records]

    # Expected planted effects, precomputed with the oracle path on the
    # ground-truth stances (subgraph scope, edge removal).
    sentiments = {t.id: score_text(t.text, lexicon) for t in tweets}
    author_of = {t.id: t.author_id for t in tweets}
    edges: list[EdgeTuple] = []
    for tweet in tweets:
        for _kind, target_id in tweet.references:
            target_author = author_of.get(target_id)
            if target_author is not None:
                edges.append(
                    EdgeTuple(
                        tweet.author_id,
                        target_author,
                        tweet.conversation_id,
                        sentiments[tweet.id],
                    )
                )

    directions = ((PRO, ANTI), (ANTI, PRO))
    for entry in planted_entries:
        base = oracle_subgraph(edges, entry["influencer_id"])
        expected: dict[str, dict] = {}
        for direction in directions:
            per_mode = {}
            for mode in ("count_negative", "count_all", "sentiment_mass"):
                with_, without, delta = oracle_delta(
                    base, stance_of, entry["conversation_id"], direction, weight_mode=mode
                )
                sign = None if delta is None else (delta > 0) - (delta < 0)
                per_mode[mode] = {
                    "with": with_,
                    "without": without,
                    "delta": delta,
                    "sign": sign,
                }
            expected[f"{direction[0]}->{direction[1]}"] = per_mode
        entry["expected"] = expected

    manifest = {
        "scope": "subgraph",
        "removal_mode": "edges",
        "tau": 0.05,
        "rng_seed": config.rng_seed,
        "n_users": config.n_users,
        "planted": planted_entries,
    }
    return SynthCorpus(
        records=emitter.records,
        tweets=tweets,
        ground_truth=dict(sorted(stance_of.items())),
        seed_hashtags=seed_hashtags,
        manifest=manifest,
        config=config,
    )


def write_corpus_jsonl(records: Iterable[dict], fh: IO[str]) -> None:
    for record in records:
        fh.write(json.dumps(record, sort_keys=True) + "\n")


def write_ground_truth(ground_truth: Mapping[str, str], fh: IO[str]) -> None:
    fh.write(GROUND_TRUTH_HEADER + "\n")
    for user in sorted(ground_truth):
        fh.write(f"{user},{ground_truth[user]}\n")


def read_ground_truth(fh: IO[str]) -> dict[str, str]:
    header = fh.readline().strip()
    if header != GROUND_TRUTH_HEADER:
        raise ValueError(f"unexpected ground truth header: {header!r}")
    out = {}
    for line in fh:
        if line.strip():
            user, stance = line.strip().split(",")
            out[user] = stance
    return out


def write_seed_hashtag_csv(seed_hashtags: Mapping[str, str], fh: IO[str]) -> None:
    fh.write("hashtag,side\n")
    for tag in sorted(seed_hashtags):
        fh.write(f"{tag},{seed_hashtags[tag]}\n")


def write_manifest(manifest: Mapping, fh: IO[str]) -> None:
    json.dump(manifest, fh, sort_keys=True, indent=2)
    fh.write("\n")


def read_manifest(fh: IO[str]) -> dict:
    return json.load(fh)

"""Stage orchestration behind the CLI.

Each stage reads its inputs from disk, runs the owning module, and
writes its artifacts into the output directory, so stages can be run
individually or chained with ``run_pipeline``. Outputs are pure
functions of the inputs plus the configuration; re-running a stage
overwrites its artifacts byte-identically.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from . import counterfactual as cf
from . import graph as graph_mod
from . import polarization as pol
from . import report as report_mod
from . import sentiment as sent
from . import stance
from . import synth as synth_mod
from .errors import InvalidArgumentError, MissingInputError

logger = logging.getLogger(__name__)

DIRECTIONS = ((stance.PRO, stance.ANTI), (stance.ANTI, stance.PRO))


@dataclass
class PipelineConfig:
    corpus_path: str = "corpus.jsonl"
    out_dir: str = "out"
    lexicon_path: str | None = None
    boosters_path: str | None = None
    negators_path: str | None = None
    seed_hashtags_path: str | None = None
    external_scores_path: str | None = None
    external_embeddings_path: str | None = None
    followers_path: str | None = None
    min_tweets: int = 20
    min_users: int = 10
    top_k: int = 10
    tau: float = 0.05
    weight_mode: str = "count_negative"
    removal_mode: str = "edges"
    scope: str = "subgraph"
    include_quotes: bool = True
    rng_seed: int = 7
    feature_dim: int = 256
    hidden: int = 64
    lr: float = 0.01
    weight_decay: float = 5e-4
    epochs: int = 200
    propagation_damping: float = 1.0
    propagation_tol: float = 1e-6
    propagation_max_iter: int = 100
    seed_min_uses: int = 3
    seed_lo: float = 0.25
    seed_hi: float = 0.75
    grid_step: float = 0.05
    t1: float | None = None
    t2: float | None = None

    @classmethod
    def known_keys(cls) -> set[str]:
        return {f.name for f in dataclasses.fields(cls)}

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls().with_overrides(raw)

    def with_overrides(self, overrides: dict) -> "PipelineConfig":
        unknown = set(overrides) - self.known_keys()
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        return dataclasses.replace(self, **overrides)

    def validate(self, require_corpus: bool = True) -> None:
        if require_corpus and not Path(self.corpus_path).is_file():
            raise MissingInputError(f"corpus file not found: {self.corpus_path}")
        for name in (
            "lexicon_path",
            "boosters_path",
            "negators_path",
            "seed_hashtags_path",
            "external_scores_path",
            "external_embeddings_path",
            "followers_path",
        ):
            value = getattr(self, name)
            if value is not None and not Path(value).is_file():
                raise MissingInputError(f"{name} not found: {value}")
        if self.min_tweets < 1 or self.min_users < 1:
            raise InvalidArgumentError("min_tweets and min_users must be >= 1")
        if self.top_k < 1:
            raise InvalidArgumentError("top_k must be >= 1")
        if self.tau < 0:
            raise InvalidArgumentError("tau must be >= 0")
        if self.weight_mode not in pol.WEIGHT_MODES:
            raise InvalidArgumentError(f"unknown weight_mode {self.weight_mode!r}")
        if self.removal_mode not in cf.REMOVAL_MODES:
            raise InvalidArgumentError(f"unknown removal_mode {self.removal_mode!r}")
        if self.scope not in cf.SCOPES:
            raise InvalidArgumentError(f"unknown scope {self.scope!r}")
        if (self.t1 is None) != (self.t2 is None):
            raise InvalidArgumentError("t1 and t2 must be given together")
        if self.t1 is not None and self.t2 is not None:
            stance.ThresholdPair(self.t1, self.t2)

    def out_path(self, name: str) -> Path:
        return Path(self.out_dir) / name


def _write_text(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(content)


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _open_out(cfg: PipelineConfig, name: str):
    path = cfg.out_path(name)
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", encoding="utf-8", newline="")


def _load_tweets(cfg: PipelineConfig):
    tweets, report = corpus_mod.load_corpus(cfg.corpus_path)
    return tweets, report


def _load_lexicon(cfg: PipelineConfig) -> sent.Lexicon:
    if cfg.lexicon_path is None:
        return sent.default_lexicon()
    return sent.load_lexicon(cfg.lexicon_path, cfg.boosters_path, cfg.negators_path)


def _filtered_conversations(cfg: PipelineConfig, tweets):
    conversations = corpus_mod.assemble_conversations(tweets)
    return corpus_mod.filter_conversations(
        conversations, min_tweets=cfg.min_tweets, min_users=cfg.min_users
    )


def _read_sentiment_map(cfg: PipelineConfig) -> dict[str, float]:
    path = cfg.out_path("sentiments.jsonl")
    if not path.is_file():
        raise MissingInputError(f"sentiment stage output missing: {path} (run sentiment first)")
    with open(path, "r", encoding="utf-8") as fh:
        return sent.combined_by_tweet(sent.read_sentiments(fh))


def _build_graph(cfg: PipelineConfig, tweets, conversations, sentiment_map):
    return graph_mod.build_graph(
        conversations, tweets, sentiment_map, include_quotes=cfg.include_quotes
    )


def run_synth(synth_config: synth_mod.SynthConfig, out_dir: str) -> dict[str, str]:
    """Generate a corpus and its companion files into ``out_dir``."""
    result = synth_mod.generate_corpus(synth_config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "corpus.jsonl", "w", encoding="utf-8", newline="") as fh:
        synth_mod.write_corpus_jsonl(result.records, fh)
    with open(out / "ground_truth.csv", "w", encoding="utf-8", newline="") as fh:
        synth_mod.write_ground_truth(result.ground_truth, fh)
    with open(out / "seed_hashtags.csv", "w", encoding="utf-8", newline="") as fh:
        synth_mod.write_seed_hashtag_csv(result.seed_hashtags, fh)
    with open(out / "manifest.json", "w", encoding="utf-8", newline="") as fh:
        synth_mod.write_manifest(result.manifest, fh)
    logger.info("synth: %d tweets, %d planted conversations", len(result.records), len(result.manifest["planted"]))
    return {
        "corpus": str(out / "corpus.jsonl"),
        "ground_truth": str(out / "ground_truth.csv"),
        "seed_hashtags": str(out / "seed_hashtags.csv"),
        "manifest": str(out / "manifest.json"),
    }


def run_ingest(cfg: PipelineConfig) -> None:
    tweets, report = _load_tweets(cfg)
    kept = _filtered_conversations(cfg, tweets)
    with _open_out(cfg, "conversations.jsonl") as fh:
        corpus_mod.write_conversation_index(kept, fh)
    influencers = corpus_mod.rank_influencers(tweets, cfg.top_k)
    with _open_out(cfg, "influencers.csv") as fh:
        corpus_mod.write_influencers(influencers, fh)
    _write_json(
        cfg.out_path("parse_report.json"),
        {
            "n_lines": report.n_lines,
            "n_tweets": report.n_tweets,
            "n_malformed": report.n_malformed,
            "n_duplicates": report.n_duplicates,
            "n_conversations_kept": len(kept),
            "errors": report.errors,
        },
    )
    logger.info("ingest: %d tweets, %d conversations kept", report.n_tweets, len(kept))


def run_sentiment(cfg: PipelineConfig) -> None:
    tweets, _ = _load_tweets(cfg)
    lexicon = _load_lexicon(cfg)
    records = sent.score_corpus(tweets, lexicon)
    merge_info = {}
    if cfg.external_scores_path is not None:
        with open(cfg.external_scores_path, "r", encoding="utf-8") as fh:
            rows = sent.read_external_scores(fh)
        records, merge_report = sent.merge_external_scores(records, rows)
        merge_info = {
            "n_merged": merge_report.n_merged,
            "n_rejected_range": merge_report.n_rejected_range,
            "n_unknown_tweet": merge_report.n_unknown_tweet,
            "errors": merge_report.errors[:50],
        }
    with _open_out(cfg, "sentiments.jsonl") as fh:
        sent.write_sentiments(records, fh)
    _write_json(
        cfg.out_path("sentiment_report.json"),
        {"n_scored": len(records), "external": merge_info},
    )


def run_stance(cfg: PipelineConfig) -> None:
    if cfg.seed_hashtags_path is None:
        raise MissingInputError("stance stage requires seed_hashtags_path")
    tweets, _ = _load_tweets(cfg)
    with open(cfg.seed_hashtags_path, "r", encoding="utf-8") as fh:
        seed_sides = stance.load_seed_hashtags(fh)

    bipartite = stance.build_bipartite(tweets, seed_sides)
    propagation = stance.propagate(
        bipartite,
        damping=cfg.propagation_damping,
        tol=cfg.propagation_tol,
        max_iter=cfg.propagation_max_iter,
    )
    seeds = stance.select_seed_users(
        propagation.p_anti,
        bipartite.seed_usage_counts(),
        min_uses=cfg.seed_min_uses,
        lo=cfg.seed_lo,
        hi=cfg.seed_hi,
    )

    conversations = _filtered_conversations(cfg, tweets)
    sentiment_map = _read_sentiment_map(cfg)
    interaction_graph, _ = _build_graph(cfg, tweets, conversations, sentiment_map)
    users = sorted(interaction_graph.nodes)
    if not users:
        raise InvalidArgumentError("interaction graph is empty; nothing to label")

    external = None
    if cfg.external_embeddings_path is not None:
        with open(cfg.external_embeddings_path, "r", encoding="utf-8") as fh:
            external = stance.read_external_embeddings(fh)
    texts = stance.concatenated_texts(tweets)
    features = stance.extract_features(
        {u: texts.get(u, "") for u in users}, dim=cfg.feature_dim, external=external
    )

    a_hat = stance.normalize_adjacency(interaction_graph, users)
    x = np.vstack([features[u] for u in users])
    user_index = {u: i for i, u in enumerate(users)}
    labels = {
        user_index[s.user_id]: (0 if s.label == stance.PRO else 1)
        for s in seeds
        if s.user_id in user_index
    }
    for side, class_index in ((stance.PRO, 0), (stance.ANTI, 1)):
        if class_index not in set(labels.values()):
            raise InvalidArgumentError(
                f"no {side} seed users among graph participants; check the seed"
                " hashtag file, seed_min_uses, and the seed_lo/seed_hi bands"
            )
    classifier = stance.GcnStanceClassifier(
        hidden=cfg.hidden,
        lr=cfg.lr,
        weight_decay=cfg.weight_decay,
        epochs=cfg.epochs,
        rng_seed=cfg.rng_seed,
    ).fit(a_hat, x, labels)
    probs = classifier.predict_proba(a_hat, x)
    p_anti = {u: float(probs[i, 1]) for u, i in user_index.items()}

    if cfg.t1 is not None and cfg.t2 is not None:
        thresholds = stance.ThresholdPair(cfg.t1, cfg.t2)
        f1 = None
    else:
        reference = {
            s.user_id: s.label for s in seeds if s.user_id in user_index
        }
        thresholds, f1 = stance.calibrate_thresholds(
            p_anti, reference, grid_step=cfg.grid_step
        )

    assignments = {
        a.user_id: a for a in stance.assign_stances(p_anti, thresholds, source="gnn")
    }
    for seed in seeds:
        assignments[seed.user_id] = seed
    ordered = [assignments[u] for u in sorted(assignments)]
    with _open_out(cfg, "stances.csv") as fh:
        stance.write_stances(ordered, fh)
    with _open_out(cfg, "gcn_model.json") as fh:
        stance.write_model(classifier.model_, fh)
    _write_json(
        cfg.out_path("stance_report.json"),
        {
            "propagation": {
                "converged": propagation.converged,
                "iterations": propagation.iterations,
            },
            "n_seed_users": len(seeds),
            "n_seed_pro": sum(1 for s in seeds if s.label == stance.PRO),
            "n_seed_anti": sum(1 for s in seeds if s.label == stance.ANTI),
            "n_labeled_users": len(ordered),
            "thresholds": {"t1": thresholds.t1, "t2": thresholds.t2},
            "calibration_f1": f1,
            "training": {
                "best_epoch": classifier.trace_.best_epoch,
                "final_train_loss": classifier.trace_.train_loss[-1],
                "train_loss": classifier.trace_.train_loss,
                "val_loss": classifier.trace_.val_loss,
            },
        },
    )
    logger.info(
        "stance: %d seeds -> %d labeled users, thresholds (%.2f, %.2f)",
        len(seeds),
        len(ordered),
        thresholds.t1,
        thresholds.t2,
    )


def _read_stance_map(cfg: PipelineConfig) -> dict[str, str]:
    path = cfg.out_path("stances.csv")
    if not path.is_file():
        raise MissingInputError(f"stance stage output missing: {path} (run stance first)")
    with open(path, "r", encoding="utf-8") as fh:
        return stance.stance_map(stance.read_stances(fh))


def run_polarize(cfg: PipelineConfig) -> None:
    tweets, _ = _load_tweets(cfg)
    conversations = _filtered_conversations(cfg, tweets)
    sentiment_map = _read_sentiment_map(cfg)
    interaction_graph, build_report = _build_graph(cfg, tweets, conversations, sentiment_map)
    stances = _read_stance_map(cfg)

    with _open_out(cfg, "graph.csv") as fh:
        graph_mod.write_graph_csv(interaction_graph, fh)

    days = interaction_graph.days()
    scores: list[pol.PolarizationScore] = []
    whole: dict[str, dict] = {}
    if days:
        for direction in DIRECTIONS:
            scores.extend(
                pol.daily_timeline(
                    interaction_graph,
                    stances,
                    direction,
                    days[0],
                    days[-1],
                    weight_mode=cfg.weight_mode,
                    tau=cfg.tau,
                )
            )
    for direction in DIRECTIONS:
        score = pol.ei_index(
            interaction_graph, stances, direction, weight_mode=cfg.weight_mode, tau=cfg.tau
        )
        whole[score.direction_label] = {
            "value": score.value,
            "ext_weight": score.ext_weight,
            "int_weight": score.int_weight,
            "defined": score.defined,
        }
    with _open_out(cfg, "timeline.csv") as fh:
        pol.write_timeline(scores, fh)
    _write_json(
        cfg.out_path("polarize_report.json"),
        {
            "whole_graph": whole,
            "weight_mode": cfg.weight_mode,
            "tau": cfg.tau,
            "n_edges": build_report.n_edges,
            "n_nodes": build_report.n_nodes,
            "n_dropped_references": build_report.n_dropped_references,
        },
    )


def run_counterfactual(cfg: PipelineConfig) -> None:
    tweets, _ = _load_tweets(cfg)
    conversations = _filtered_conversations(cfg, tweets)
    sentiment_map = _read_sentiment_map(cfg)
    interaction_graph, _ = _build_graph(cfg, tweets, conversations, sentiment_map)
    stances = _read_stance_map(cfg)
    influencers = corpus_mod.rank_influencers(tweets, cfg.top_k)
    influencer_ids = {rec.user_id for rec in influencers}
    led = [c for c in conversations if c.initiator_id in influencer_ids]
    followers = None
    if cfg.followers_path is not None:
        with open(cfg.followers_path, "r", encoding="utf-8") as fh:
            followers = json.load(fh)

    results, errors = cf.batch_effects(
        interaction_graph,
        stances,
        led,
        influencers,
        DIRECTIONS,
        weight_mode=cfg.weight_mode,
        tau=cfg.tau,
        scope=cfg.scope,
        removal_mode=cfg.removal_mode,
        followers=followers,
    )
    with _open_out(cfg, "counterfactual.csv") as fh:
        cf.write_results(results, fh)
    with _open_out(cfg, "influencer_summary.csv") as fh:
        cf.write_influencer_summary(cf.summarize_influencer(results), fh)
    with _open_out(cfg, "stance_group_summary.csv") as fh:
        cf.write_stance_group_summary(cf.summarize_stance_group(results), fh)
    _write_json(
        cfg.out_path("counterfactual_report.json"),
        {
            "n_results": len(results),
            "n_conversations": len({r.conversation_id for r in results}),
            "n_undefined": sum(1 for r in results if r.classification == cf.CLASS_UNDEFINED),
            "errors": errors,
        },
    )
    logger.info("counterfactual: %d results, %d errors", len(results), len(errors))


def run_report(cfg: PipelineConfig) -> None:
    """Render presentation tables and the SVG timeline from existing CSVs."""
    results_path = cfg.out_path("counterfactual.csv")
    if not results_path.is_file():
        raise MissingInputError(f"results CSV missing: {results_path} (run counterfactual first)")
    with open(results_path, "r", encoding="utf-8") as fh:
        results = cf.read_results(fh)
    with _open_out(cfg, "effects_table.csv") as fh:
        report_mod.write_effects_table(results, fh)
    with _open_out(cfg, "influencer_summary.csv") as fh:
        cf.write_influencer_summary(cf.summarize_influencer(results), fh)
    with _open_out(cfg, "stance_group_summary.csv") as fh:
        cf.write_stance_group_summary(cf.summarize_stance_group(results), fh)

    timeline_path = cfg.out_path("timeline.csv")
    if timeline_path.is_file():
        with open(timeline_path, "r", encoding="utf-8") as fh:
            scores = pol.read_timeline(fh)
        _write_text(cfg.out_path("timeline.svg"), report_mod.timeline_svg(scores))


def run_pipeline(cfg: PipelineConfig) -> None:
    run_ingest(cfg)
    run_sentiment(cfg)
    run_stance(cfg)
    run_polarize(cfg)
    run_counterfactual(cfg)
    run_report(cfg)

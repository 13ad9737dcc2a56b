"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its criterion number."""

import hashlib
import json
import time
from contextlib import contextmanager
from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np
import pytest

from polarlens import pipeline as pipeline_mod
from polarlens.counterfactual import CounterfactualResult, majority_cell
from polarlens.corpus import assemble_conversations, filter_conversations
from polarlens.graph import InteractionEdge, InteractionGraph
from polarlens.polarization import ei_index
from polarlens.stance import (
    ThresholdPair,
    build_bipartite,
    calibrate_thresholds,
    classify_probability,
    gcn_loss_and_grads,
    propagate,
    read_stances,
)
from polarlens.synth import (
    EdgeTuple,
    PlantedConversation,
    SynthConfig,
    oracle_ei,
    read_ground_truth,
    read_manifest,
)

from conftest import make_tweet
from test_stance_gcn import finite_difference_grads, six_node_fixture
from test_stance_thresholds import brute_force_calibration


@contextmanager
def criterion(number: int, description: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number:02d} FAIL: {description}")
        raise
    print(f"ACCEPTANCE {number:02d} PASS: {description}")


def random_case(rng):
    n_users = int(rng.integers(2, 51))
    users = [f"u{i}" for i in range(n_users)]
    stances = {u: ("pro", "anti", "undecided")[int(rng.integers(0, 3))] for u in users}
    stances[users[0]] = "pro"
    stances[users[1]] = "anti"
    n_edges = int(rng.integers(0, 150))
    edges = []
    for i in range(n_edges):
        a = users[int(rng.integers(0, n_users))]
        b = users[int(rng.integers(0, n_users))]
        sentiment = float(rng.uniform(-1, 1))
        edges.append(
            InteractionEdge(
                author_id=a,
                target_id=b,
                kind="reply",
                tweet_id=f"t{i}",
                conversation_id="c",
                timestamp=datetime(2022, 5, 24, tzinfo=timezone.utc),
                sentiment=sentiment,
            )
        )
    nodes = frozenset(users)
    return InteractionGraph(nodes=nodes, edges=tuple(edges)), stances


def test_criterion_1_ei_oracle_equivalence():
    with criterion(1, "ei_index equals the brute-force oracle on 1000 random graphs"):
        rng = np.random.default_rng(424242)
        start = time.monotonic()
        for i in range(1000):
            graph, stances = random_case(rng)
            tuples = [
                EdgeTuple(e.author_id, e.target_id, e.conversation_id, e.sentiment)
                for e in graph.edges
            ]
            mode = ("count_all", "count_negative", "sentiment_mass")[i % 3]
            mine = ei_index(graph, stances, ("pro", "anti"), weight_mode=mode)
            reference = oracle_ei(tuples, stances, ("pro", "anti"), weight_mode=mode)
            if reference is None:
                assert mine.value is None
            elif mode == "sentiment_mass":
                assert mine.value == pytest.approx(reference, abs=1e-12)
            else:
                assert mine.value == reference
        elapsed = time.monotonic() - start
        assert elapsed < 10.0, f"took {elapsed:.1f}s"


def _edge(author, target, sentiment):
    return InteractionEdge(
        author_id=author, target_id=target, kind="reply",
        tweet_id=f"{author}->{target}:{sentiment}", conversation_id="c",
        timestamp=datetime(2022, 5, 24, tzinfo=timezone.utc), sentiment=sentiment,
    )


def test_criterion_2_ei_extremes():
    with criterion(2, "E/I extremes: all-internal -1, all-external +1, 0/0 undefined"):
        stances = {"a1": "pro", "a2": "pro", "b1": "anti"}
        internal = [_edge("a1", "a2", -0.5) for _ in range(4)]
        graph = InteractionGraph(nodes=frozenset(stances), edges=tuple(internal))
        assert ei_index(graph, stances, ("pro", "anti")).value == -1.0

        external = [_edge("a1", "b1", -0.5), _edge("a2", "b1", -0.9)]
        graph = InteractionGraph(nodes=frozenset(stances), edges=tuple(external))
        assert ei_index(graph, stances, ("pro", "anti")).value == 1.0

        graph = InteractionGraph(nodes=frozenset(stances), edges=())
        score = ei_index(graph, stances, ("pro", "anti"))
        assert score.value is None and not score.defined


def test_criterion_3_counterfactual_regression():
    with criterion(3, "reference with/without score pairs give -0.162 and +0.150"):
        decrease = CounterfactualResult.from_scores(
            "c1", "u3", "anti", ("pro", "anti"), date(2022, 6, 1),
            score_with=0.471, score_without=0.633,
        )
        assert round(decrease.delta, 3) == -0.162
        assert decrease.classification == "decrease"

        increase = CounterfactualResult.from_scores(
            "c2", "u2", "anti", ("anti", "pro"), date(2022, 6, 1),
            score_with=0.229, score_without=0.079,
        )
        assert round(increase.delta, 3) == 0.150
        assert increase.classification == "increase"


def _result(classification, conversation, direction):
    deltas = {"increase": 0.1, "decrease": -0.1}
    delta = deltas[classification]
    return CounterfactualResult(
        conversation_id=conversation, influencer_id="inf", influencer_stance="pro",
        direction=direction, day=None, score_with=0.5, score_without=0.5 - delta,
        delta=delta, classification=classification,
    )


def test_criterion_4_summary_formatting():
    with criterion(4, 'summary cells render "100.0% - decrease" and "61.11%"'):
        from polarlens.counterfactual import format_percent, summarize_influencer

        all_decrease = [
            _result("decrease", f"c{i}", ("pro", "anti")) for i in range(5)
        ]
        (summary,) = summarize_influencer(all_decrease)
        cell = majority_cell(summary.per_direction["pro->anti"], trim=True)
        assert cell == "100.0% - decrease"

        mixed = [
            _result("increase" if i < 11 else "decrease", f"c{i}", ("anti", "pro"))
            for i in range(18)
        ]
        (summary,) = summarize_influencer(mixed)
        pct = summary.per_direction["anti->pro"]
        assert format_percent(pct["increase"]) == "61.11"
        assert majority_cell(pct, trim=True) == "61.11% - increase"


def test_criterion_5_threshold_semantics():
    with criterion(5, "p=0.40 pro, p=0.60 anti, p=0.50 undecided at (0.40, 0.60)"):
        pair = ThresholdPair(0.40, 0.60)
        assert classify_probability(0.40, pair) == "pro"
        assert classify_probability(0.60, pair) == "anti"
        assert classify_probability(0.50, pair) == "undecided"


def test_criterion_6_grid_search_optimality():
    with criterion(6, "calibration matches the exhaustive scorer on 100 random sets"):
        rng = np.random.default_rng(77)
        for _ in range(100):
            n = int(rng.integers(2, 30))
            p_anti, reference = {}, {}
            for i in range(n):
                label = "pro" if rng.random() < 0.5 else "anti"
                center = 0.3 if label == "pro" else 0.7
                p_anti[f"u{i}"] = float(np.clip(rng.normal(center, 0.3), 0, 1))
                reference[f"u{i}"] = label
            reference["u0"] = "pro"
            reference[f"u{n - 1}"] = "anti"
            pair, f1 = calibrate_thresholds(p_anti, reference)
            oracle_pair, oracle_f1, _ = brute_force_calibration(p_anti, reference)
            assert (pair.t1, pair.t2) == oracle_pair
            assert f1 == oracle_f1


def test_criterion_7_gcn_gradient_check():
    with criterion(7, "analytic gradients match central differences within 1e-4"):
        start = time.monotonic()
        model, a_hat, x, train_idx, train_y = six_node_fixture()
        _, analytic = gcn_loss_and_grads(model, a_hat, x, train_idx, train_y, 5e-4)
        numeric = finite_difference_grads(model, a_hat, x, train_idx, train_y, 5e-4,
                                          eps=1e-5)
        worst = 0.0
        for name in analytic:
            diff = np.abs(analytic[name] - numeric[name])
            scale = np.maximum(
                np.maximum(np.abs(analytic[name]), np.abs(numeric[name])), 1e-8
            )
            worst = max(worst, float((diff / scale).max()))
        elapsed = time.monotonic() - start
        assert worst < 1e-4, f"max relative error {worst:.2e}"
        assert elapsed < 5.0, f"took {elapsed:.1f}s"


RECOVERY_CONFIG = SynthConfig(
    rng_seed=20240301,
    n_users=1000,
    frac_pro=0.5,
    frac_undecided=0.1,
    days=10,
    conversations_per_day=12,
    participants_per_conversation=40,
    p_in=0.05,
    p_out=0.005,
    sigma=0.5,
    n_vocal_per_side=20,
    n_influencers=10,
    planted=(
        PlantedConversation(2, "pro", 50, 0.9, -0.85),
        PlantedConversation(3, "anti", 50, 0.9, -0.85),
        PlantedConversation(5, "pro", 50, 0.9, -0.85),
        PlantedConversation(7, "anti", 50, 0.9, -0.85),
    ),
)


def test_criterion_8_synthetic_recovery(tmp_path):
    with criterion(8, "pipeline recovers >=90% stances and planted delta signs"):
        start = time.monotonic()
        data = tmp_path / "data"
        out = tmp_path / "out"
        pipeline_mod.run_synth(RECOVERY_CONFIG, str(data))
        cfg = pipeline_mod.PipelineConfig(
            corpus_path=str(data / "corpus.jsonl"),
            seed_hashtags_path=str(data / "seed_hashtags.csv"),
            out_dir=str(out),
        )
        cfg.validate()
        pipeline_mod.run_pipeline(cfg)
        elapsed = time.monotonic() - start
        assert elapsed < 120.0, f"pipeline took {elapsed:.1f}s"

        with open(data / "ground_truth.csv") as fh:
            truth = read_ground_truth(fh)
        with open(out / "stances.csv") as fh:
            predicted = {a.user_id: a.label for a in read_stances(fh)}
        stance_report = json.loads((out / "stance_report.json").read_text())
        assert stance_report["n_seed_users"] == 40

        decided = {u: s for u, s in truth.items() if s != "undecided"}
        accuracy = sum(
            1 for u, s in decided.items() if predicted.get(u) == s
        ) / len(decided)
        assert accuracy >= 0.90, f"stance accuracy {accuracy:.4f}"

        with open(data / "manifest.json") as fh:
            manifest = read_manifest(fh)
        import csv as csv_mod

        with open(out / "counterfactual.csv") as fh:
            rows = {
                (r["conversation_id"], r["direction"]): r
                for r in csv_mod.DictReader(fh)
            }
        assert manifest["planted"], "manifest lists the planted conversations"
        for entry in manifest["planted"]:
            for direction, modes in entry["expected"].items():
                expected = modes["count_negative"]
                row = rows[(entry["conversation_id"], direction)]
                engine_delta = float(row["delta"]) if row["delta"] else None
                engine_sign = (
                    None
                    if engine_delta is None
                    else (engine_delta > 0) - (engine_delta < 0)
                )
                assert engine_sign == expected["sign"], (
                    f"{entry['conversation_id']} {direction}: engine {engine_sign} "
                    f"vs manifest {expected['sign']}"
                )


def _conversation_fixture(n_tweets, n_users):
    tweets = [
        make_tweet(
            id=f"t{i}",
            author_id=f"u{i % n_users}",
            conversation_id="c1",
            created_at=f"2022-05-24T18:{i // 60:02d}:{i % 60:02d}Z",
        )
        for i in range(n_tweets)
    ]
    return assemble_conversations(tweets)


def test_criterion_9_engagement_filter_boundary():
    with criterion(9, "filter keeps 20/10 and drops 19/10 and 20/9"):
        assert len(filter_conversations(_conversation_fixture(20, 10))) == 1
        assert filter_conversations(_conversation_fixture(19, 10)) == []
        assert filter_conversations(_conversation_fixture(20, 9)) == []


DETERMINISM_CONFIG = SynthConfig(
    rng_seed=99,
    n_users=240,
    frac_pro=0.5,
    frac_undecided=0.1,
    days=4,
    conversations_per_day=5,
    participants_per_conversation=24,
    sigma=0.5,
    n_vocal_per_side=8,
    n_influencers=4,
    planted=(
        PlantedConversation(1, "pro", 24, 0.9, -0.8),
        PlantedConversation(2, "anti", 24, 0.9, -0.8),
    ),
)


def _tree_digest(root: Path) -> dict[str, str]:
    return {
        str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_criterion_10_pipeline_determinism(tmp_path):
    with criterion(10, "two identical pipeline runs produce byte-identical trees"):
        digests = []
        for run in ("one", "two"):
            data = tmp_path / run / "data"
            out = tmp_path / run / "out"
            pipeline_mod.run_synth(DETERMINISM_CONFIG, str(data))
            cfg = pipeline_mod.PipelineConfig(
                corpus_path=str(data / "corpus.jsonl"),
                seed_hashtags_path=str(data / "seed_hashtags.csv"),
                out_dir=str(out),
            )
            cfg.validate()
            pipeline_mod.run_pipeline(cfg)
            digests.append((_tree_digest(data), _tree_digest(out)))
        assert digests[0] == digests[1]


def test_criterion_11_propagation_fixed_points():
    with criterion(11, "label propagation reproduces the three fixed points"):
        # clamped average: one pro seed hashtag
        single = [make_tweet(id="t1", author_id="u1", hashtags=["stop"])]
        result = propagate(build_bipartite(single, {"stop": "pro"}), tol=1e-6)
        assert result.converged and result.iterations <= 100
        assert result.p_anti["u1"] == 0.0

        # weighted mean: weights 2 and 1 on opposing seeds -> exactly 1/3
        weighted = [
            make_tweet(id="t1", author_id="u1", hashtags=["a"]),
            make_tweet(id="t2", author_id="u1", hashtags=["a"],
                       created_at="2022-05-24T18:00:01Z"),
            make_tweet(id="t3", author_id="u1", hashtags=["b"],
                       created_at="2022-05-24T18:00:02Z"),
        ]
        result = propagate(build_bipartite(weighted, {"a": "pro", "b": "anti"}), tol=1e-6)
        assert result.converged and result.iterations <= 100
        assert result.p_anti["u1"] == pytest.approx(1.0 / 3.0, abs=1e-6)

        # linear fixed point: everything drains to the seed value 0
        chain = [
            make_tweet(id="t1", author_id="u1", hashtags=["seed0"]),
            make_tweet(id="t2", author_id="u1", hashtags=["hx"],
                       created_at="2022-05-24T18:00:01Z"),
            make_tweet(id="t3", author_id="u2", hashtags=["hx"],
                       created_at="2022-05-24T18:00:02Z"),
        ]
        result = propagate(build_bipartite(chain, {"seed0": "pro"}), tol=1e-6)
        assert result.converged and result.iterations <= 100
        assert result.p_anti["u1"] == pytest.approx(0.0, abs=1e-5)
        assert result.p_anti["u2"] == pytest.approx(0.0, abs=1e-5)
        assert result.hashtag_values["hx"] == pytest.approx(0.0, abs=1e-5)

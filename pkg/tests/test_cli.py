import hashlib
import json
from datetime import date
from pathlib import Path

import pytest
from click.testing import CliRunner

from polarlens.cli import main
from polarlens.counterfactual import CounterfactualResult, write_results
from polarlens.synth import PlantedConversation, SynthConfig
from polarlens import pipeline as pipeline_mod


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    config = SynthConfig(
        rng_seed=3,
        n_users=120,
        frac_pro=0.5,
        frac_undecided=0.1,
        days=3,
        conversations_per_day=3,
        participants_per_conversation=20,
        sigma=0.5,
        n_vocal_per_side=6,
        n_influencers=4,
        planted=(PlantedConversation(1, "pro", 20, 0.9, -0.8),),
    )
    pipeline_mod.run_synth(config, str(out))
    return out


def run_cli(*args):
    return CliRunner().invoke(main, args)


def tree_digest(root: Path) -> dict[str, str]:
    return {
        str(path.relative_to(root)): hashlib.sha256(path.read_bytes()).hexdigest()
        for path in sorted(root.rglob("*"))
        if path.is_file()
    }


class TestErrors:
    def test_unknown_subcommand_usage_exit_2(self):
        result = run_cli("frobnicate")
        assert result.exit_code == 2
        assert "Usage" in result.stderr or "Usage" in result.output

    def test_missing_corpus_exit_2_with_json(self, tmp_path):
        result = run_cli("ingest", "--corpus", str(tmp_path / "nope.jsonl"),
                         "--out", str(tmp_path / "out"))
        assert result.exit_code == 2
        payload = json.loads(result.stderr.strip().splitlines()[-1])
        assert payload["exit_code"] == 2
        assert "nope.jsonl" in payload["message"]

    def test_validation_failure_exit_3(self, synth_dir, tmp_path):
        result = run_cli(
            "ingest", "--corpus", str(synth_dir / "corpus.jsonl"),
            "--out", str(tmp_path / "out"), "--min-tweets", "0",
        )
        assert result.exit_code == 3
        payload = json.loads(result.stderr.strip().splitlines()[-1])
        assert payload["exit_code"] == 3

    def test_unknown_config_key_exit_3(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"no_such_key": 1}))
        result = run_cli("ingest", "--config", str(config))
        assert result.exit_code == 3

    def test_report_without_results_exit_2(self, tmp_path):
        result = run_cli("report", "--out", str(tmp_path))
        assert result.exit_code == 2


class TestSynthCommand:
    def test_writes_all_artifacts(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "synth_n_users": 60, "synth_days": 2, "synth_conversations_per_day": 2,
            "synth_participants_per_conversation": 12, "synth_n_vocal_per_side": 4,
            "synth_n_influencers": 2, "synth_sigma": 0.5,
        }))
        out = tmp_path / "data"
        result = run_cli("synth", "--config", str(config), "--out", str(out), "--seed", "9")
        assert result.exit_code == 0, result.stderr
        for name in ("corpus.jsonl", "ground_truth.csv", "seed_hashtags.csv", "manifest.json"):
            assert (out / name).is_file()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["rng_seed"] == 9

    def test_invalid_synth_config_exit_3(self, tmp_path):
        config = tmp_path / "config.json"
        config.write_text(json.dumps({"synth_frac_pro": 0.0}))
        result = run_cli("synth", "--config", str(config), "--out", str(tmp_path / "x"))
        assert result.exit_code == 3


class TestStages:
    def test_ingest_outputs(self, synth_dir, tmp_path):
        out = tmp_path / "out"
        result = run_cli("ingest", "--corpus", str(synth_dir / "corpus.jsonl"),
                         "--out", str(out), "--top-k", "4")
        assert result.exit_code == 0, result.stderr
        assert (out / "conversations.jsonl").is_file()
        influencers = (out / "influencers.csv").read_text().splitlines()
        assert influencers[0] == "rank,user_id,tweet_count,total_likes,total_retweets,total_replies"
        assert len(influencers) == 5
        report = json.loads((out / "parse_report.json").read_text())
        assert report["n_malformed"] == 0

    def test_stage_chain_matches_pipeline(self, synth_dir, tmp_path):
        staged = tmp_path / "staged"
        args = ["--corpus", str(synth_dir / "corpus.jsonl"),
                "--seed-hashtags", str(synth_dir / "seed_hashtags.csv"),
                "--out", str(staged)]
        for stage in ("ingest", "sentiment", "stance", "polarize", "counterfactual", "report"):
            result = run_cli(stage, *args)
            assert result.exit_code == 0, f"{stage}: {result.stderr}"
        allatonce = tmp_path / "allatonce"
        result = run_cli("pipeline", "--corpus", str(synth_dir / "corpus.jsonl"),
                         "--seed-hashtags", str(synth_dir / "seed_hashtags.csv"),
                         "--out", str(allatonce))
        assert result.exit_code == 0, result.stderr
        assert tree_digest(staged) == tree_digest(allatonce)

    def test_rerun_overwrites_byte_identically(self, synth_dir, tmp_path):
        out = tmp_path / "out"
        args = ["pipeline", "--corpus", str(synth_dir / "corpus.jsonl"),
                "--seed-hashtags", str(synth_dir / "seed_hashtags.csv"),
                "--out", str(out)]
        assert run_cli(*args).exit_code == 0
        first = tree_digest(out)
        assert run_cli(*args).exit_code == 0
        assert tree_digest(out) == first

    def test_manual_thresholds_skip_calibration(self, synth_dir, tmp_path):
        out = tmp_path / "out"
        args = ["--corpus", str(synth_dir / "corpus.jsonl"),
                "--seed-hashtags", str(synth_dir / "seed_hashtags.csv"),
                "--out", str(out)]
        assert run_cli("sentiment", *args).exit_code == 0
        result = run_cli("stance", *args, "--t1", "0.4", "--t2", "0.6")
        assert result.exit_code == 0, result.stderr
        report = json.loads((out / "stance_report.json").read_text())
        assert report["thresholds"] == {"t1": 0.4, "t2": 0.6}
        assert report["calibration_f1"] is None


class TestReportRegression:
    def test_renders_reference_scores_in_anti_pro_columns(self, tmp_path):
        results = [
            CounterfactualResult(
                conversation_id="conv-2", influencer_id="user2",
                influencer_stance="anti", direction=("anti", "pro"),
                day=date(2022, 6, 1), score_with=0.229, score_without=0.079,
                delta=0.15, classification="increase",
            ),
            CounterfactualResult(
                conversation_id="conv-2", influencer_id="user2",
                influencer_stance="anti", direction=("pro", "anti"),
                day=date(2022, 6, 1), score_with=-0.087, score_without=0.220,
                delta=-0.307, classification="decrease",
            ),
        ]
        out = tmp_path / "out"
        out.mkdir()
        with open(out / "counterfactual.csv", "w", newline="") as fh:
            write_results(results, fh)
        result = run_cli("report", "--out", str(out))
        assert result.exit_code == 0, result.stderr
        table = (out / "effects_table.csv").read_text()
        anti_pro_row = next(
            line for line in table.splitlines() if ",anti->pro," in line
        )
        cells = anti_pro_row.split(",")
        assert cells[7] == "0.079"
        assert cells[8] == "0.229"

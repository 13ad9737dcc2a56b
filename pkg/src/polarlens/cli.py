"""Command line driver.

Every subcommand reads a flat JSON config (``--config``) whose keys match
the pipeline configuration fields; command line flags win over file
values. Synthetic-corpus keys use a ``synth_`` prefix. Failures exit
with a machine-readable JSON line on stderr: missing inputs exit 2,
validation failures 3, internal errors 4.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
import sys
from functools import wraps

import click

from . import pipeline as pipeline_mod
from . import synth as synth_mod
from .errors import (
    InvalidArgumentError,
    MalformedRecordError,
    MissingInputError,
    PolarlensError,
)

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}

_FLAG_TO_KEY = {
    "corpus": "corpus_path",
    "out": "out_dir",
    "seed": "rng_seed",
    "weight_mode": "weight_mode",
    "removal_mode": "removal_mode",
    "scope": "scope",
    "min_tweets": "min_tweets",
    "min_users": "min_users",
    "top_k": "top_k",
    "tau": "tau",
    "t1": "t1",
    "t2": "t2",
    "lexicon": "lexicon_path",
    "boosters": "boosters_path",
    "negators": "negators_path",
    "seed_hashtags": "seed_hashtags_path",
    "external_scores": "external_scores_path",
    "embeddings": "external_embeddings_path",
    "followers": "followers_path",
}


def _setup_logging() -> None:
    level_name = os.environ.get("POLARLENS_LOG", "warn").lower()
    logging.basicConfig(
        level=_LOG_LEVELS.get(level_name, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _fail(exc: BaseException, code: int) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    click.echo(json.dumps(payload, sort_keys=True), err=True)
    sys.exit(code)


def _guarded(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except MissingInputError as exc:
            _fail(exc, 2)
        except (InvalidArgumentError, MalformedRecordError) as exc:
            _fail(exc, 3)
        except PolarlensError as exc:
            _fail(exc, 4)
        except Exception as exc:  # noqa: BLE001 - last-resort CLI boundary
            logging.getLogger(__name__).debug("internal error", exc_info=True)
            _fail(exc, 4)

    return wrapper


def _load_config_file(path: str | None) -> tuple[dict, dict]:
    """Split a flat config file into pipeline keys and synth_ keys."""
    if path is None:
        return {}, {}
    if not os.path.isfile(path):
        raise MissingInputError(f"config file not found: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise InvalidArgumentError("config file must hold a JSON object")
    pipeline_keys = {}
    synth_keys = {}
    for key, value in raw.items():
        if key.startswith("synth_"):
            synth_keys[key[len("synth_"):]] = value
        else:
            pipeline_keys[key] = value
    return pipeline_keys, synth_keys


def _pipeline_config(options: dict) -> pipeline_mod.PipelineConfig:
    file_overrides, _ = _load_config_file(options.get("config"))
    cfg = pipeline_mod.PipelineConfig().with_overrides(file_overrides)
    flag_overrides = {
        _FLAG_TO_KEY[flag]: value
        for flag, value in options.items()
        if flag in _FLAG_TO_KEY and value is not None
    }
    return cfg.with_overrides(flag_overrides)


def _synth_config(options: dict) -> synth_mod.SynthConfig:
    _, synth_keys = _load_config_file(options.get("config"))
    planted_raw = synth_keys.pop("planted", [])
    planted = tuple(
        synth_mod.PlantedConversation(
            day=entry["day"],
            initiator_stance=entry["initiator_stance"],
            size=entry["size"],
            cross_fraction=entry["cross_fraction"],
            sentiment_bias=entry["sentiment_bias"],
        )
        for entry in planted_raw
    )
    known = {f.name for f in synth_mod.SynthConfig.__dataclass_fields__.values()}
    unknown = set(synth_keys) - known
    if unknown:
        raise InvalidArgumentError(f"unknown synth config keys: {sorted(unknown)}")
    config = synth_mod.SynthConfig(planted=planted, **synth_keys)
    if options.get("seed") is not None:
        config = dataclasses.replace(config, rng_seed=options["seed"])
    return config


def _common_options(fn):
    decorators = [
        click.option("--config", type=click.Path(), default=None, help="Flat JSON config file."),
        click.option("--corpus", type=click.Path(), default=None, help="Corpus JSON Lines path."),
        click.option("--out", type=click.Path(), default=None, help="Output directory."),
        click.option("--seed", type=int, default=None, help="Random seed."),
        click.option("--weight-mode", type=click.Choice(["count_all", "count_negative", "sentiment_mass"]), default=None),
        click.option("--removal-mode", type=click.Choice(["edges", "nodes"]), default=None),
        click.option("--scope", type=click.Choice(["subgraph", "daily"]), default=None),
        click.option("--min-tweets", type=int, default=None),
        click.option("--min-users", type=int, default=None),
        click.option("--top-k", type=int, default=None),
        click.option("--tau", type=float, default=None),
        click.option("--t1", type=float, default=None, help="Manual pro threshold (skips calibration)."),
        click.option("--t2", type=float, default=None, help="Manual anti threshold (skips calibration)."),
        click.option("--lexicon", type=click.Path(), default=None),
        click.option("--boosters", type=click.Path(), default=None),
        click.option("--negators", type=click.Path(), default=None),
        click.option("--seed-hashtags", type=click.Path(), default=None),
        click.option("--external-scores", type=click.Path(), default=None),
        click.option("--embeddings", type=click.Path(), default=None),
        click.option("--followers", type=click.Path(), default=None),
    ]
    for decorator in reversed(decorators):
        fn = decorator(fn)
    return fn


@click.group()
def main() -> None:
    """Polarization analysis over conversation corpora."""
    _setup_logging()


def _stage_command(name: str, runner, help_text: str, require_corpus: bool = True):
    @main.command(name=name, help=help_text)
    @_common_options
    @_guarded
    def command(**options):
        cfg = _pipeline_config(options)
        cfg.validate(require_corpus=require_corpus)
        runner(cfg)

    return command


_stage_command("ingest", pipeline_mod.run_ingest,
               "Parse the corpus, filter conversations, rank influencers.")
_stage_command("sentiment", pipeline_mod.run_sentiment,
               "Score tweet valence with the lexicon, merging external scores.")
_stage_command("stance", pipeline_mod.run_stance,
               "Label user stances: hashtag propagation seeds a graph classifier.")
_stage_command("polarize", pipeline_mod.run_polarize,
               "Compute directional E/I scores and the daily timeline.")
_stage_command("counterfactual", pipeline_mod.run_counterfactual,
               "Score influencer conversations with and without their presence.")
_stage_command("report", pipeline_mod.run_report,
               "Render effect tables and the SVG timeline from existing CSVs.",
               require_corpus=False)
_stage_command("pipeline", pipeline_mod.run_pipeline,
               "Run every stage in order on one corpus.")


@main.command()
@_common_options
@_guarded
def synth(**options):
    """Generate a seeded synthetic corpus with ground truth and manifest."""
    config = _synth_config(options)
    out_dir = options.get("out") or "out"
    pipeline_mod.run_synth(config, out_dir)


if __name__ == "__main__":
    main()

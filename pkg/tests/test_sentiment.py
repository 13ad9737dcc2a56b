import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarlens.errors import InvalidArgumentError
from polarlens.sentiment import (
    Lexicon,
    SentimentRecord,
    classify_valence,
    default_lexicon,
    load_lexicon,
    merge_external_scores,
    score_text,
)

LEX = Lexicon(
    entries={"good": 1.9, "bad": -2.5, "great": 3.1},
    boosters={"very": 0.3},
    negators=frozenset({"not", "never"}),
)


def squash(total):
    return total / math.sqrt(total * total + 15.0)


class TestScoreText:
    def test_empty_text(self):
        assert score_text("", LEX) == 0.0

    def test_single_positive_token(self):
        # 1.9 / sqrt(1.9^2 + 15) = 0.4404
        assert score_text("good", LEX) == pytest.approx(0.4404, abs=1e-4)

    def test_negated_token(self):
        # (-0.74 * 1.9) / sqrt(1.406^2 + 15) = -0.3412
        assert score_text("not good", LEX) == pytest.approx(-0.3412, abs=1e-4)

    def test_booster_amplifies(self):
        assert score_text("very good", LEX) == pytest.approx(squash(2.2), abs=1e-12)

    def test_booster_follows_negated_sign(self):
        # negation first, then the booster increments along the flipped sign
        expected = squash(1.9 * -0.74 - 0.3)
        assert score_text("not very good", LEX) == pytest.approx(expected, abs=1e-12)

    def test_negator_outside_window_ignored(self):
        text = "not a b c good"
        assert score_text(text, LEX) == pytest.approx(squash(1.9), abs=1e-12)

    def test_caps_emphasis(self):
        assert score_text("this is GOOD", LEX) == pytest.approx(squash(1.9 * 1.15), abs=1e-12)

    def test_all_caps_text_gets_no_emphasis(self):
        assert score_text("GOOD DAY", LEX) == pytest.approx(squash(1.9), abs=1e-12)

    def test_unknown_tokens_contribute_nothing(self):
        assert score_text("filler words only", LEX) == 0.0

    def test_multiple_hits_sum(self):
        expected = squash(1.9 - 2.5)
        assert score_text("good bad", LEX) == pytest.approx(expected, abs=1e-12)

    def test_output_strictly_inside_unit_interval(self):
        assert -1.0 < score_text("bad " * 50, LEX) < 1.0

    def test_determinism(self):
        text = "not very GOOD but bad"
        assert score_text(text, LEX) == score_text(text, LEX)

    @given(st.integers(1, 6))
    @settings(max_examples=20, deadline=None)
    def test_appending_positive_token_never_decreases(self, n):
        base = "good " * n
        assert score_text(base + " good", LEX) >= score_text(base, LEX)
        assert score_text("bad " * n + " bad", LEX) <= score_text("bad " * n, LEX)

    def test_default_lexicon_valences_in_range(self):
        lexicon = default_lexicon()
        assert all(-4.0 <= v <= 4.0 for v in lexicon.entries.values())
        assert all(term == term.lower() for term in lexicon.entries)

    def test_lexicon_rejects_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            Lexicon(entries={"x": 5.0}, boosters={}, negators=frozenset())


class TestLexiconFiles:
    def test_round_trip(self, tmp_path):
        entries = tmp_path / "lex.tsv"
        entries.write_text("good\t1.9\nbad\t-2.5\n")
        boosters = tmp_path / "boost.tsv"
        boosters.write_text("very\t0.3\n")
        negators = tmp_path / "neg.txt"
        negators.write_text("not\n")
        lexicon = load_lexicon(entries, boosters, negators)
        assert lexicon.entries == {"good": 1.9, "bad": -2.5}
        assert lexicon.boosters == {"very": 0.3}
        assert lexicon.negators == frozenset({"not"})

    def test_bad_row_raises(self, tmp_path):
        path = tmp_path / "lex.tsv"
        path.write_text("good 1.9\n")
        with pytest.raises(InvalidArgumentError):
            load_lexicon(path)


class TestMergeExternalScores:
    def test_mean_of_two_models(self):
        records = [SentimentRecord.from_scores("t1", {"lexicon": 0.40})]
        merged, report = merge_external_scores(
            records, [{"tweet_id": "t1", "model": "ext", "score": 0.20}]
        )
        assert merged[0].combined == pytest.approx(0.30)
        assert report.n_merged == 1

    def test_no_external_rows_is_identity(self):
        records = [SentimentRecord.from_scores("t1", {"lexicon": 0.4})]
        merged, _ = merge_external_scores(records, [])
        assert merged[0].combined == pytest.approx(0.4)

    def test_out_of_range_rejected(self):
        records = [SentimentRecord.from_scores("t1", {"lexicon": 0.4})]
        merged, report = merge_external_scores(
            records, [{"tweet_id": "t1", "model": "ext", "score": 1.5}]
        )
        assert report.n_rejected_range == 1
        assert merged[0].per_model == {"lexicon": 0.4}

    def test_unknown_tweet_skipped_with_warning(self):
        records = [SentimentRecord.from_scores("t1", {"lexicon": 0.4})]
        merged, report = merge_external_scores(
            records, [{"tweet_id": "ghost", "model": "ext", "score": 0.1}]
        )
        assert report.n_unknown_tweet == 1
        assert merged[0].per_model == {"lexicon": 0.4}

    def test_combined_is_mean_invariant(self):
        records = [SentimentRecord.from_scores("t1", {"lexicon": -0.5})]
        merged, _ = merge_external_scores(
            records,
            [
                {"tweet_id": "t1", "model": "a", "score": 0.5},
                {"tweet_id": "t1", "model": "b", "score": 0.3},
            ],
        )
        assert merged[0].combined == pytest.approx((-0.5 + 0.5 + 0.3) / 3)


class TestClassifyValence:
    def test_zero_is_neutral(self):
        assert classify_valence(0.0) == "neutral"

    def test_below_band_is_negative(self):
        assert classify_valence(-0.06, tau=0.05) == "negative"

    def test_boundary_is_neutral(self):
        assert classify_valence(0.05, tau=0.05) == "neutral"

    def test_invalid_inputs(self):
        with pytest.raises(InvalidArgumentError):
            classify_valence(0.0, tau=-0.1)
        with pytest.raises(InvalidArgumentError):
            classify_valence(1.5)

    @given(st.floats(-1, 1), st.floats(0, 0.5))
    @settings(max_examples=100, deadline=None)
    def test_partition(self, score, tau):
        label = classify_valence(score, tau)
        assert label in ("negative", "neutral", "positive")
        if label == "negative":
            assert score < -tau
        elif label == "positive":
            assert score > tau
        else:
            assert -tau <= score <= tau


def test_record_requires_at_least_one_model():
    with pytest.raises(InvalidArgumentError):
        SentimentRecord.from_scores("t1", {})


def test_sentiment_jsonl_round_trip():
    import io

    from polarlens.sentiment import read_sentiments, write_sentiments

    records = [
        SentimentRecord.from_scores("t1", {"lexicon": 0.25, "ext": -0.5}),
        SentimentRecord.from_scores("t2", {"lexicon": 0.0}),
    ]
    buffer = io.StringIO()
    write_sentiments(records, buffer)
    loaded = read_sentiments(io.StringIO(buffer.getvalue()))
    assert [r.tweet_id for r in loaded] == ["t1", "t2"]
    assert loaded[0].combined == records[0].combined
    assert loaded[0].per_model == dict(records[0].per_model)

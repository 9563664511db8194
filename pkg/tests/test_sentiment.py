from datetime import date, datetime, timedelta, timezone
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from discourse.corpus import Token, TweetRecord, tokenize
from discourse.sentiment import (
    Label,
    Metric,
    SentimentLexicon,
    SentimentScore,
    aggregate,
    label,
    load_lexicon,
    read_series,
    score,
    score_text,
    write_series,
)

DAY = date(2021, 3, 1)
WINDOW = (DAY, DAY + timedelta(days=2))


def rec(i, day=DAY, hour=12):
    return TweetRecord(str(i), datetime(day.year, day.month, day.day, hour, tzinfo=timezone.utc), "de", "")


def test_no_sentiment_terms(lexicon):
    s = score_text("heute ist dienstag", lexicon)
    assert (s.pos, s.neg) == (1, -1)
    assert (s.pos_rescaled, s.neg_rescaled) == (0, 0)


def test_mixed_terms(lexicon):
    s = score_text("super aber schrecklich", lexicon)
    assert (s.pos, s.neg) == (3, -4)
    assert label(s) is Label.NEGATIVE


def test_negator_flips(lexicon):
    s = score_text("nicht super", lexicon)
    assert (s.pos, s.neg) == (1, -3)


def test_negation_scope_is_one_token(lexicon):
    assert score_text("nicht heute super", lexicon) == SentimentScore(3, -1)


def test_booster_and_cap(lexicon):
    assert score_text("sehr gut", lexicon) == SentimentScore(3, -1)
    assert score_text("sehr furchtbar", lexicon) == SentimentScore(1, -5)


def test_lemma_fallback():
    lex = SentimentLexicon({"gut": 2})
    assert score([Token("guten", "gut")], lex) == SentimentScore(2, -1)


@pytest.mark.parametrize(
    "s, expected",
    [((3, -1), Label.POSITIVE), ((2, -2), Label.NEUTRAL_MIXED), ((1, -4), Label.NEGATIVE)],
)
def test_labels(s, expected):
    assert label(SentimentScore(*s)) is expected


def test_lexicon_validation(tmp_path):
    with pytest.raises(ValueError):
        SentimentLexicon({"gut": 1})
    with pytest.raises(ValueError):
        SentimentLexicon({"gut": 2}, negators=frozenset({"gut"}))
    p = tmp_path / "lex.tsv"
    p.write_text("gut\tpositive\t2\n")
    with pytest.raises(ValueError):
        load_lexicon(p)


def test_single_record_day():
    pairs = [(rec(1), SentimentScore(3, -1))]
    values = {m: aggregate(pairs, m, WINDOW).exact[0] for m in Metric}
    assert values == {Metric.SUM: 2, Metric.REL: 2, Metric.POS: 1, Metric.NEG: 0, Metric.COUNT: 1}


def test_two_record_day():
    pairs = [(rec(1), SentimentScore(3, -1)), (rec(2), SentimentScore(1, -4))]
    got = {m: aggregate(pairs, m, WINDOW).exact[0] for m in Metric}
    assert got == {Metric.SUM: -1, Metric.REL: Fraction(-1, 2), Metric.POS: 1, Metric.NEG: 1, Metric.COUNT: 2}


def test_empty_day_flagged():
    s = aggregate([(rec(1), SentimentScore(3, -1))], Metric.REL, WINDOW)
    assert list(s.rows())[1] == (DAY + timedelta(days=1), 0.0, 0, 1)
    assert len(s) == 3


def test_record_outside_window_rejected():
    with pytest.raises(ValueError):
        aggregate([(rec(1, DAY - timedelta(days=1)), SentimentScore())], Metric.SUM, WINDOW)


def test_series_round_trip(tmp_path):
    pairs = [(rec(i, DAY + timedelta(days=i % 3)), SentimentScore(1 + i % 5, -1 - (i * 2) % 5)) for i in range(17)]
    s = aggregate(pairs, Metric.REL, WINDOW)
    write_series(s, tmp_path / "rel.csv")
    again = read_series(tmp_path / "rel.csv", "REL")
    assert again.values.tolist() == s.values.tolist()
    assert again.counts.tolist() == s.counts.tolist()
    assert again.empty_days == s.empty_days


# properties

score_st = st.builds(SentimentScore, st.integers(1, 5), st.integers(-5, -1))
pairs_st = st.lists(st.tuples(st.integers(0, 2), st.integers(0, 23), score_st), max_size=40).map(
    lambda xs: [(rec(i, DAY + timedelta(days=d), h), s) for i, (d, h, s) in enumerate(xs)]
)


@given(pairs_st)
def test_daily_identities(pairs):
    series = {m: aggregate(pairs, m, WINDOW) for m in Metric}
    for i in range(3):
        count = series[Metric.COUNT].exact[i]
        if count:
            assert series[Metric.REL].exact[i] * count == series[Metric.SUM].exact[i]
        assert series[Metric.POS].exact[i] + series[Metric.NEG].exact[i] <= count
    total_count = sum(series[Metric.COUNT].exact)
    if total_count:
        weighted = sum(r * c for r, c in zip(series[Metric.REL].exact, series[Metric.COUNT].exact))
        assert weighted / total_count == Fraction(sum(series[Metric.SUM].exact), total_count)


@given(pairs_st, st.randoms(use_true_random=False))
def test_permutation_invariant(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    for m in Metric:
        a, b = aggregate(pairs, m, WINDOW), aggregate(shuffled, m, WINDOW)
        assert list(a.rows()) == list(b.rows())


@given(score_st)
def test_label_invariant_under_rescale(s):
    p, n = s.pos_rescaled, -s.neg_rescaled
    expected = Label.POSITIVE if p > n else Label.NEGATIVE if n > p else Label.NEUTRAL_MIXED
    assert label(s) is expected


@given(st.lists(st.sampled_from(["super", "gut", "nicht", "sehr", "schlecht", "furchtbar", "haus"]), max_size=8))
def test_scores_in_range(lexicon, words):
    s = score(tokenize(" ".join(words)), lexicon)
    assert 1 <= s.pos <= 5 and -5 <= s.neg <= -1

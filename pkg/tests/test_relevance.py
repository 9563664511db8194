from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from discourse.corpus import TweetRecord
from discourse.relevance import ExclusionRule, MatchResult, filter_corpus, is_relevant, match
from discourse.seedex import CandidateTerm, SeedList

SEEDS = ["impfung", "impfstoff", "impfzentrum", "infektion"]


def rec(text, hashtags=(), id="1"):
    return TweetRecord(id, datetime(2021, 3, 1, tzinfo=timezone.utc), "de", text, tuple(hashtags))


def test_text_match():
    m = match(rec("die impfung hilft"), ["impfung"])
    assert m.matched_terms == {"impfung"} and m.locations == {"text"}


def test_hashtag_field_match():
    m = match(rec("heute", ["impfpflicht"]), ["impfpflicht"])
    assert m.locations == {"hashtag"}


def test_inline_hashtag_counts_as_hashtag():
    assert match(rec("#Impfung jetzt"), ["impfung"]).locations == {"hashtag"}


def test_token_exact_by_default():
    assert not match(rec("impfungen"), ["impfung"]).matched_terms
    assert match(rec("impfungen"), ["impfung"], substring=True).matched_terms == {"impfung"}


def test_seed_list_includes_query():
    seeds = SeedList("impfung", [CandidateTerm("impfstoff", "noun", 3, 0.9)])
    assert match(rec("impfung"), seeds).matched_terms == {"impfung"}
    assert match(rec("impfstoff"), seeds).matched_terms == {"impfstoff"}


@pytest.mark.parametrize(
    "terms, expected",
    [({"infektion"}, False), ({"infektion", "impfung"}, True), (set(), False)],
)
def test_exclusion_rule(terms, expected):
    assert is_relevant(MatchResult("1", frozenset(terms))) is expected


def test_fixture_counts(relevance_corpus):
    kept, stats = filter_corpus(relevance_corpus, SEEDS)
    assert (stats.total, stats.matched, stats.excluded, stats.relevant) == (10, 6, 1, 5)
    assert [r.id for r in kept] == ["t01", "t02", "t03", "t05", "t06"]


def test_empty_corpus():
    _, stats = filter_corpus([], SEEDS)
    assert (stats.total, stats.matched, stats.excluded, stats.relevant) == (0, 0, 0, 0)


words = st.sampled_from(["impfung", "impfstoff", "infektion", "maske", "heute", "impfungen", "test"])
docs_st = st.lists(st.lists(words, max_size=5).map(" ".join), max_size=20).map(
    lambda texts: [rec(t, id=str(i)) for i, t in enumerate(texts)]
)
seed_st = st.sets(st.sampled_from(["impfung", "impfstoff", "infektion", "maske"]))
excl_st = st.sets(st.sampled_from(["infektion", "maske", "impfung"]))


@given(docs_st, seed_st, excl_st, st.sampled_from(["impfung", "impfstoff", "maske", "heute"]))
def test_more_seeds_never_fewer_relevant(docs, seeds, excl, extra):
    rule = ExclusionRule(frozenset(excl))
    _, a = filter_corpus(docs, seeds, rule)
    _, b = filter_corpus(docs, seeds | {extra}, rule)
    assert b.relevant >= a.relevant
    assert a.consistent() and b.consistent()


@given(docs_st, seed_st, excl_st, st.sampled_from(["impfung", "impfstoff", "maske"]))
def test_more_exclusions_never_more_relevant(docs, seeds, excl, extra):
    _, a = filter_corpus(docs, seeds, ExclusionRule(frozenset(excl)))
    _, b = filter_corpus(docs, seeds, ExclusionRule(frozenset(excl | {extra})))
    assert b.relevant <= a.relevant


@given(docs_st, seed_st, excl_st)
def test_idempotent_and_witnessed(docs, seeds, excl):
    rule = ExclusionRule(frozenset(excl))
    once, _ = filter_corpus(docs, seeds, rule)
    twice, _ = filter_corpus(once, seeds, rule)
    assert twice == once
    for r in once:
        assert match(r, seeds).matched_terms - rule.terms

"""Select topic-relevant documents by seed-term matching."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .corpus import TweetRecord, tokenize
from .seedex import SeedList

TEXT = "text"
HASHTAG = "hashtag"


@dataclass(frozen=True)
class MatchResult:
    tweet_id: str
    matched_terms: frozenset = frozenset()
    locations: frozenset = frozenset()


@dataclass(frozen=True)
class ExclusionRule:
    """A document is dropped when *every* term it matched is in ``terms``."""

    terms: frozenset = frozenset({"infektion"})

    def __post_init__(self):
        object.__setattr__(self, "terms", frozenset(t.lower() for t in self.terms))


@dataclass
class FilterStats:
    total: int = 0
    matched: int = 0
    excluded: int = 0
    relevant: int = 0

    def consistent(self) -> bool:
        return (
            self.relevant == self.matched - self.excluded
            and 0 <= self.excluded <= self.matched <= self.total
        )


def _terms(seeds) -> set[str]:
    if isinstance(seeds, SeedList):
        return seeds.match_terms()
    return {s.lower() for s in seeds}


def match(record: TweetRecord, seeds: SeedList | Iterable[str], substring: bool = False) -> MatchResult:
    """Token-exact, case-insensitive match of seed terms against the text
    tokens and hashtags of ``record``.

    With ``substring=True`` a seed also matches when it occurs inside a
    token (compounds); off by default.
    """
    terms = _terms(seeds)
    matched: set[str] = set()
    locs: set[str] = set()

    def check(token: str, where: str):
        if substring:
            hits = {t for t in terms if t in token}
        else:
            hits = {token} & terms
        if hits:
            matched.update(hits)
            locs.add(where)

    for tok in tokenize(record.text):
        check(tok.surface, HASHTAG if tok.is_hashtag else TEXT)
    for tag in record.hashtags:
        check(tag.lower(), HASHTAG)
    return MatchResult(record.id, frozenset(matched), frozenset(locs))


def is_relevant(m: MatchResult, excl: ExclusionRule = ExclusionRule()) -> bool:
    return bool(m.matched_terms) and not m.matched_terms <= excl.terms


def filter_corpus(
    corpus: Sequence[TweetRecord],
    seeds: SeedList | Iterable[str],
    excl: ExclusionRule = ExclusionRule(),
    substring: bool = False,
) -> tuple[list[TweetRecord], FilterStats]:
    """Keep relevant records in input order."""
    terms = _terms(seeds)
    stats = FilterStats(total=len(corpus))
    kept = []
    for rec in corpus:
        m = match(rec, terms, substring=substring)
        if not m.matched_terms:
            continue
        stats.matched += 1
        if is_relevant(m, excl):
            kept.append(rec)
        else:
            stats.excluded += 1
    stats.relevant = len(kept)
    return kept, stats

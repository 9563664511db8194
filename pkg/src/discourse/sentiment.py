"""Dual-polarity lexicon sentiment scoring and daily aggregation.

Every document gets a positive strength in 1..5 and a negative strength in
-5..-1 (1 and -1 meaning "none"). For series these are shifted to 0..4 and
-4..0 so that a document without sentiment contributes zero.
"""

from __future__ import annotations

import enum
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import Token, TweetRecord, tokenize


class Label(str, enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL_MIXED = "neutral_mixed"


class Metric(str, enum.Enum):
    SUM = "SUM"
    REL = "REL"
    POS = "POS"
    NEG = "NEG"
    COUNT = "COUNT"


SENTIMENT_METRICS = (Metric.SUM, Metric.REL, Metric.POS, Metric.NEG)


@dataclass
class SentimentLexicon:
    entries: dict[str, int] = field(default_factory=dict)
    boosters: frozenset = frozenset()
    negators: frozenset = frozenset()

    def __post_init__(self):
        self.entries = {k.lower(): int(v) for k, v in self.entries.items()}
        self.boosters = frozenset(b.lower() for b in self.boosters)
        self.negators = frozenset(n.lower() for n in self.negators)
        for term, s in self.entries.items():
            if not (2 <= abs(s) <= 5):
                raise ValueError(f"strength of {term!r} must be in +-2..5, got {s}")
        overlap = (set(self.entries) & self.boosters) | (set(self.entries) & self.negators) | (
            self.boosters & self.negators
        )
        if overlap:
            raise ValueError(f"terms in more than one lexicon class: {sorted(overlap)}")


def load_lexicon(path: str | Path) -> SentimentLexicon:
    """Read a ``term<TAB>class<TAB>strength`` file; class is one of
    sentiment, booster, negator."""
    entries, boosters, negators = {}, set(), set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if lineno == 1 and cols[0].strip().lower() == "term":
                continue
            while len(cols) < 3:
                cols.append("")
            term, cls, strength = (c.strip() for c in cols[:3])
            term = term.lower()
            if cls == "sentiment":
                try:
                    entries[term] = int(strength)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: bad strength {strength!r}") from None
            elif cls == "booster":
                boosters.add(term)
            elif cls == "negator":
                negators.add(term)
            else:
                raise ValueError(f"{path}:{lineno}: unknown class {cls!r}")
    return SentimentLexicon(entries, frozenset(boosters), frozenset(negators))


@dataclass(frozen=True)
class SentimentScore:
    pos: int = 1
    neg: int = -1

    def __post_init__(self):
        if not (1 <= self.pos <= 5 and -5 <= self.neg <= -1):
            raise ValueError(f"score out of range: ({self.pos}, {self.neg})")

    @property
    def pos_rescaled(self) -> int:
        return self.pos - 1

    @property
    def neg_rescaled(self) -> int:
        return self.neg + 1

    @property
    def rel(self) -> int:
        """Per-document contribution to SUM."""
        return self.pos_rescaled + self.neg_rescaled


def _strength(tok: Token, lexicon: SentimentLexicon):
    s = lexicon.entries.get(tok.surface)
    if s is None and tok.lemma != tok.surface:
        s = lexicon.entries.get(tok.lemma)
    return s


def score(tokens: Sequence[Token], lexicon: SentimentLexicon) -> SentimentScore:
    """Max-strength dual score.

    A negator directly before a sentiment term flips its sign; a booster
    directly before it adds one to its magnitude (capped at 5).
    """
    pos, neg = 1, 1
    for i, tok in enumerate(tokens):
        s = _strength(tok, lexicon)
        if s is None:
            continue
        if i > 0:
            prev = tokens[i - 1].surface
            if prev in lexicon.negators:
                s = -s
            elif prev in lexicon.boosters:
                s = (1 if s > 0 else -1) * min(5, abs(s) + 1)
        if s > 0:
            pos = max(pos, s)
        else:
            neg = max(neg, -s)
    return SentimentScore(pos, -neg)


def score_text(text: str, lexicon: SentimentLexicon) -> SentimentScore:
    return score(tokenize(text), lexicon)


def label(s: SentimentScore) -> Label:
    if s.pos > -s.neg:
        return Label.POSITIVE
    if -s.neg > s.pos:
        return Label.NEGATIVE
    return Label.NEUTRAL_MIXED


def day_of(ts: datetime) -> date:
    return ts.astimezone(timezone.utc).date()


def date_range(begin: date, end: date) -> list[date]:
    return [begin + timedelta(days=i) for i in range((end - begin).days + 1)]


@dataclass
class DailySeries:
    """One value per calendar day, contiguous from ``dates[0]``.

    ``exact`` holds the values as rationals; ``values`` is their float view.
    """

    metric: str
    dates: list[date]
    exact: list[Fraction]
    counts: np.ndarray
    empty_days: set = field(default_factory=set)
    name: str = ""

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if not self.name:
            self.name = str(getattr(self.metric, "value", self.metric))
        if len(self.dates) != len(self.exact) or len(self.dates) != len(self.counts):
            raise ValueError("dates, values and counts differ in length")
        for a, b in zip(self.dates, self.dates[1:]):
            if b - a != timedelta(days=1):
                raise ValueError(f"dates not contiguous at {a} -> {b}")

    @property
    def values(self) -> np.ndarray:
        return np.array([float(v) for v in self.exact], dtype=float)

    @property
    def begin(self) -> date:
        return self.dates[0]

    def __len__(self):
        return len(self.dates)

    def rows(self):
        for d, v, c in zip(self.dates, self.exact, self.counts):
            yield d, float(v), int(c), int(d in self.empty_days)


SERIES_COLUMNS = ("date", "value", "count", "empty_flag")


def _per_day(scored: Iterable[tuple[TweetRecord, SentimentScore]]):
    days: dict[date, list[SentimentScore]] = defaultdict(list)
    for rec, s in scored:
        days[day_of(rec.created_at)].append(s)
    return days


def aggregate(
    scored: Iterable[tuple[TweetRecord, SentimentScore]],
    metric: Metric | str,
    window: tuple[date, date],
) -> DailySeries:
    """Aggregate per-document scores into a contiguous daily series."""
    metric = Metric(metric)
    begin, end = window
    if isinstance(begin, datetime):
        begin, end = day_of(begin), day_of(end)
    days = _per_day(scored)
    outside = [d for d in days if d < begin or d > end]
    if outside:
        raise ValueError(f"records outside window, e.g. {min(outside)}")
    dates = date_range(begin, end)
    exact, counts, empty = [], [], set()
    for d in dates:
        scores = days.get(d, [])
        n = len(scores)
        counts.append(n)
        total = sum(s.rel for s in scores)
        if n == 0:
            empty.add(d)
        if metric is Metric.SUM:
            v = Fraction(total)
        elif metric is Metric.REL:
            v = Fraction(total, n) if n else Fraction(0)
        elif metric is Metric.POS:
            v = Fraction(sum(label(s) is Label.POSITIVE for s in scores))
        elif metric is Metric.NEG:
            v = Fraction(sum(label(s) is Label.NEGATIVE for s in scores))
        else:
            v = Fraction(n)
        exact.append(v)
    return DailySeries(metric.value, dates, exact, np.array(counts), empty)


def count_series(dates_of_docs: Iterable[date], window: tuple[date, date], name: str) -> DailySeries:
    """Plain per-day document count series."""
    begin, end = window
    tally: dict[date, int] = defaultdict(int)
    for d in dates_of_docs:
        tally[d] += 1
    dates = date_range(begin, end)
    counts = [tally.get(d, 0) for d in dates]
    empty = {d for d, c in zip(dates, counts) if c == 0}
    return DailySeries(Metric.COUNT.value, dates, [Fraction(c) for c in counts], np.array(counts), empty, name)


def score_corpus(records: Sequence[TweetRecord], lexicon: SentimentLexicon) -> list[SentimentScore]:
    return [score_text(r.text, lexicon) for r in records]


def label_shares(scores: Sequence[SentimentScore]) -> dict[str, float]:
    n = len(scores)
    out = {lab.value: 0.0 for lab in Label}
    if not n:
        return out
    for s in scores:
        out[label(s).value] += 1
    return {k: v / n for k, v in out.items()}


def write_series(series: DailySeries, path: str | Path) -> Path:
    from .io import write_csv

    return write_csv(path, SERIES_COLUMNS, series.rows())


def read_series(path: str | Path, metric: str = "", name: str = "") -> DailySeries:
    from .io import read_csv

    rows = read_csv(path)
    dates = [date.fromisoformat(r["date"]) for r in rows]
    exact = [Fraction(r["value"]) for r in rows]
    counts = [int(r["count"]) for r in rows]
    empty = {d for d, r in zip(dates, rows) if r["empty_flag"] == "1"}
    return DailySeries(metric or "COUNT", dates, exact, np.array(counts), empty, name)

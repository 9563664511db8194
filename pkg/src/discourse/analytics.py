"""Trend, peak and change-point detection on daily series, and alignment
of detected points with phase tables and policy events."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

INCREASING = "increasing"
DECREASING = "decreasing"
NO_TREND = "no_trend"


# -- Mann-Kendall ------------------------------------------------------------

@dataclass(frozen=True)
class TrendResult:
    direction: str
    S: int
    varS: float
    Z: float
    p: float
    alpha: float = 0.05

    @property
    def significant(self) -> bool:
        return self.direction != NO_TREND


def mk_statistic(x) -> int:
    """S = sum over i < j of sign(x_j - x_i)."""
    x = np.asarray(x, dtype=float)
    i, j = np.triu_indices(len(x), k=1)
    return int(np.sign(x[j] - x[i]).sum())


def mk_variance(x) -> float:
    x = np.asarray(x, dtype=float)
    n = len(x)
    _, t = np.unique(x, return_counts=True)
    ties = float(np.sum(t * (t - 1) * (2 * t + 5)))
    return (n * (n - 1) * (2 * n + 5) - ties) / 18.0


def normal_two_sided_p(z: float) -> float:
    return math.erfc(abs(z) / math.sqrt(2.0))


def mann_kendall(series, alpha: float = 0.05) -> TrendResult:
    """Original Mann-Kendall test: tie-corrected variance, continuity
    correction, two-sided normal p-value. No serial-correlation or seasonal
    adjustment."""
    x = np.asarray(getattr(series, "values", series), dtype=float)
    n = len(x)
    if n < 4:
        raise ValueError(f"Mann-Kendall needs at least 4 values, got {n}")
    s = mk_statistic(x)
    var_s = mk_variance(x)
    if var_s <= 0:
        return TrendResult(NO_TREND, s, 0.0, 0.0, 1.0, alpha)
    if s > 0:
        z = (s - 1) / math.sqrt(var_s)
    elif s < 0:
        z = (s + 1) / math.sqrt(var_s)
    else:
        z = 0.0
    p = normal_two_sided_p(z)
    if s == 0 or p >= alpha:
        direction = NO_TREND
    else:
        direction = INCREASING if z > 0 else DECREASING
    return TrendResult(direction, s, var_s, z, p, alpha)


# -- peaks -------------------------------------------------------------------

@dataclass
class PeakSet:
    multiplier: float
    upper_threshold: float
    lower_threshold: float
    peaks: list[tuple[object, float, str]] = field(default_factory=list)
    indices: list[int] = field(default_factory=list)

    def dates(self, side: str | None = None):
        return [d for d, _, s in self.peaks if side is None or s == side]


def peak_thresholds(mean: float, std: float, multiplier: float = 1.5) -> tuple[float, float]:
    """Expected interval mean +- std, widened by ``multiplier`` times the
    absolute value of each bound."""
    hi = mean + std
    lo = mean - std
    return hi + multiplier * abs(hi), lo - multiplier * abs(lo)


def detect_peaks(series, multiplier: float = 1.5, dates: Sequence | None = None) -> PeakSet:
    """Flag values above the upper or below the lower threshold.

    Mean and (population) standard deviation are taken over the whole
    series. ``series`` is a DailySeries or a plain sequence; in the latter
    case ``dates`` labels the points (defaults to indices).
    """
    if hasattr(series, "dates"):
        dates = series.dates
        x = series.values
    else:
        x = np.asarray(series, dtype=float)
    if len(x) < 2:
        raise ValueError("peak detection needs at least 2 values")
    dates = list(range(len(x))) if dates is None else list(dates)
    upper, lower = peak_thresholds(float(np.mean(x)), float(np.std(x)), multiplier)
    out = PeakSet(multiplier, upper, lower)
    for i, v in enumerate(x):
        if v > upper:
            out.peaks.append((dates[i], float(v), "high"))
            out.indices.append(i)
        elif v < lower:
            out.peaks.append((dates[i], float(v), "low"))
            out.indices.append(i)
    return out


# -- PELT --------------------------------------------------------------------

@dataclass(frozen=True)
class ChangePointResult:
    indices: tuple[int, ...]
    penalty: float
    total_cost: float

    @property
    def change_points(self) -> tuple[int, ...]:
        """Segment starts, i.e. all boundaries except the series end."""
        return self.indices[:-1]


class SquaredCost:
    """Sum of squared deviations from the segment mean, via prefix sums.

    Values are shifted by the first observation first, which keeps the
    prefix sums small and makes the cost exactly translation-invariant for
    integer-valued data.
    """

    def __init__(self, x):
        x = np.asarray(x, dtype=float)
        y = x - x[0] if len(x) else x
        self.n = len(x)
        self.s1 = np.concatenate([[0.0], np.cumsum(y)])
        self.s2 = np.concatenate([[0.0], np.cumsum(y * y)])

    def __call__(self, a: int, b: int) -> float:
        m = b - a
        s = self.s1[b] - self.s1[a]
        c = (self.s2[b] - self.s2[a]) - s * s / m
        return float(c) if c > 0.0 else 0.0


def segmentation_cost(cost, bkps: Sequence[int], penalty: float) -> float:
    """Objective of a segmentation: sum of segment costs plus one penalty
    per segment, accumulated left to right."""
    total, start = 0.0, 0
    for end in bkps:
        total = total + cost(start, end) + penalty
        start = end
    return total


def default_penalty(x) -> float:
    x = np.asarray(x, dtype=float)
    n = len(x)
    return 2.0 * float(np.var(x)) * math.log(n) if n > 1 else 0.0


def pelt(series, penalty: float | None = None) -> ChangePointResult:
    """Penalised optimal segmentation under squared-error cost (PELT).

    Minimises sum(segment costs) + penalty * (number of segments) over all
    segmentations with segments of length >= 1. The default penalty is
    2 * variance * log(n).
    """
    x = np.asarray(getattr(series, "values", series), dtype=float)
    n = len(x)
    if n < 2:
        raise ValueError("PELT needs at least 2 values")
    if penalty is None:
        penalty = default_penalty(x)
    if penalty < 0 or math.isnan(penalty):
        raise ValueError("penalty must be >= 0")
    cost = SquaredCost(x)
    if math.isinf(penalty):
        return ChangePointResult((n,), penalty, math.inf)

    F = [0.0] + [math.inf] * n
    last = [0] * (n + 1)
    candidates = [0]
    for s in range(1, n + 1):
        vals = [F[t] + cost(t, s) for t in candidates]
        best_i = 0
        best = vals[0] + penalty
        for i in range(1, len(candidates)):
            v = vals[i] + penalty
            if v < best:
                best, best_i = v, i
        F[s] = best
        last[s] = candidates[best_i]
        # keep t only if it could still be optimal later; the slack only
        # makes pruning more conservative
        slack = 1e-9 * (abs(best) + 1.0)
        candidates = [t for t, v in zip(candidates, vals) if v <= best + slack]
        candidates.append(s)

    bkps = []
    s = n
    while s > 0:
        bkps.append(s)
        s = last[s]
    bkps.reverse()
    return ChangePointResult(tuple(bkps), float(penalty), F[n])


# -- phases, events, alignment -----------------------------------------------

@dataclass(frozen=True)
class Phase:
    name: str
    begin: date
    end: date


class PhaseTable:
    """Ordered, non-overlapping named intervals.

    A phase covers begin <= d < end so adjoining phases may share a
    boundary date; the last phase also includes its end date.
    """

    def __init__(self, rows: Sequence[Phase], name: str = ""):
        self.rows = list(rows)
        self.name = name
        for r in self.rows:
            if r.end < r.begin:
                raise ValueError(f"phase {r.name!r} ends before it begins")
        for a, b in zip(self.rows, self.rows[1:]):
            if b.begin < a.end:
                raise ValueError(f"phases {a.name!r} and {b.name!r} overlap or are out of order")

    def find(self, d: date) -> Phase | None:
        for i, r in enumerate(self.rows):
            if r.begin <= d < r.end or (i == len(self.rows) - 1 and d == r.end):
                return r
        return None

    def name_at(self, d: date) -> str:
        p = self.find(d)
        return p.name if p else ""

    def boundaries(self) -> list[date]:
        return [r.begin for r in self.rows]

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


PHASE_COLUMNS = ("name", "begin", "end")
EVENT_COLUMNS = ("date", "description", "country", "source", "rki_phase", "policy_phase")
COUNTRIES = ("DE", "AT", "CH")


def load_phases(path: str | Path, name: str = "") -> PhaseTable:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [
            Phase(r["name"], date.fromisoformat(r["begin"]), date.fromisoformat(r["end"]))
            for r in csv.DictReader(fh)
        ]
    return PhaseTable(rows, name or Path(path).stem)


def write_phases(table: PhaseTable, path: str | Path) -> Path:
    from .io import write_csv

    return write_csv(path, PHASE_COLUMNS, [(r.name, r.begin, r.end) for r in table.rows])


@dataclass(frozen=True)
class PolicyEvent:
    date: date
    description: str
    country: str
    source: str = ""
    rki_phase: str = ""
    policy_phase: str = ""

    def __post_init__(self):
        if self.country not in COUNTRIES:
            raise ValueError(f"unknown country {self.country!r}")


def load_events(path: str | Path, window: tuple[date, date] | None = None) -> list[PolicyEvent]:
    """Read the events CSV. With ``window`` given, events outside it are
    dropped."""
    with open(path, encoding="utf-8", newline="") as fh:
        events = [
            PolicyEvent(
                date.fromisoformat(r["date"]), r["description"], r["country"],
                r["source"], r["rki_phase"], r["policy_phase"],
            )
            for r in csv.DictReader(fh)
        ]
    if window is not None:
        events = [e for e in events if window[0] <= e.date <= window[1]]
    return events


def write_events(events: Sequence[PolicyEvent], path: str | Path) -> Path:
    from .io import write_csv

    return write_csv(
        path, EVENT_COLUMNS,
        [(e.date, e.description, e.country, e.source, e.rki_phase, e.policy_phase) for e in events],
    )


@dataclass(frozen=True)
class DetectedPoint:
    kind: str  # "peak" | "changepoint"
    date: date
    series: str = ""


@dataclass
class AlignedPoint:
    point: DetectedPoint
    phases: dict[str, str]
    events: list[tuple[PolicyEvent, int]]


@dataclass
class AlignmentReport:
    window_days: int
    points: list[AlignedPoint] = field(default_factory=list)

    def rows(self, phase_names: Sequence[str] = ("rki", "policy")):
        for ap in self.points:
            phases = [ap.phases.get(n, "") for n in phase_names]
            if not ap.events:
                yield (ap.point.kind, ap.point.date, *phases, "", "", "")
            for ev, dist in ap.events:
                yield (ap.point.kind, ap.point.date, *phases, ev.date, ev.description, dist)


ALIGNMENT_COLUMNS = ("kind", "date", "phase_rki", "phase_policy", "event_date", "event_desc", "distance_days")


def align(
    points: Sequence[DetectedPoint],
    events: Sequence[PolicyEvent],
    phases: Mapping[str, PhaseTable],
    window_days: int = 3,
) -> AlignmentReport:
    """Attach containing phases and nearby events (|days| <= window_days,
    nearest first, then by country) to each point."""
    if window_days < 0:
        raise ValueError("window_days must be >= 0")
    report = AlignmentReport(window_days)
    for p in points:
        near = []
        for ev in events:
            dist = abs((ev.date - p.date).days)
            if dist <= window_days:
                near.append((ev, dist))
        near.sort(key=lambda ed: (ed[1], ed[0].country, ed[0].date, ed[0].description))
        report.points.append(
            AlignedPoint(p, {name: t.name_at(p.date) for name, t in phases.items()}, near)
        )
    return report


# -- per-series bundle -------------------------------------------------------

@dataclass
class SeriesAnalysis:
    name: str
    trend: TrendResult
    peaks: PeakSet
    changepoints: ChangePointResult
    change_dates: list[date]
    alignment: AlignmentReport


def analyze_series(
    series,
    events: Sequence[PolicyEvent] = (),
    phases: Mapping[str, PhaseTable] | None = None,
    multiplier: float = 1.5,
    penalty: float | None = None,
    alpha: float = 0.05,
    window_days: int = 3,
) -> SeriesAnalysis:
    trend = mann_kendall(series.values, alpha)
    peaks = detect_peaks(series, multiplier)
    cps = pelt(series.values, penalty)
    change_dates = [series.dates[i] for i in cps.change_points]
    points = [DetectedPoint("peak", d, series.name) for d, _, _ in peaks.peaks]
    points += [DetectedPoint("changepoint", d, series.name) for d in change_dates]
    points.sort(key=lambda p: (p.date, p.kind))
    alignment = align(points, events, phases or {}, window_days)
    return SeriesAnalysis(series.name, trend, peaks, cps, change_dates, alignment)

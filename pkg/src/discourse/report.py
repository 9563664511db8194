"""Pipeline orchestration and report emission.

Stages run in order ingest -> expand -> filter -> sentiment -> topics ->
themes -> analytics -> report. Each stage writes its outputs to the run's
output directory, and each can also start from the files an earlier run
left there, so later stages can be re-run alone.
"""

from __future__ import annotations

import contextvars
import json
import logging
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

from . import analytics as an
from . import topics as tp
from .config import RunConfig
from .corpus import LemmaTable, LoadStats, filter_records, load_corpus, load_lemma_table, write_corpus
from .io import atomic_write, csv_text, read_csv, write_csv
from .relevance import ExclusionRule, FilterStats, filter_corpus
from .seedex import SEED_COLUMNS, SeedList, build_seed_list, load_embeddings, read_seed_list, seed_rows, write_seed_list
from .sentiment import (
    SERIES_COLUMNS, DailySeries, Metric, SentimentScore, aggregate, label, label_shares,
    load_lexicon, read_series, score_text, write_series,
)
from .svg import plot_svg

log = logging.getLogger("discourse")

_stage = contextvars.ContextVar("stage", default="-")

STAGES = ("ingest", "expand", "filter", "sentiment", "topics", "themes", "analytics", "report")
SERIES_METRICS = (Metric.SUM, Metric.REL, Metric.POS, Metric.NEG, Metric.COUNT)


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


class _StageFilter(logging.Filter):
    def filter(self, record):
        record.stage = _stage.get()
        return True


def configure_logging(level=logging.INFO) -> None:
    handler = logging.StreamHandler()
    handler.addFilter(_StageFilter())
    handler.setFormatter(
        logging.Formatter("%(asctime)s %(levelname)s stage=%(stage)s %(message)s", "%Y-%m-%dT%H:%M:%S")
    )
    root = logging.getLogger("discourse")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def _run_stage(name: str, fn: Callable, *args, **kwargs):
    token = _stage.set(name)
    try:
        log.info("start")
        out = fn(*args, **kwargs)
        log.info("done")
        return out
    except StageError:
        raise
    except Exception as e:
        log.error("failed cause=%r", e)
        raise StageError(name, e) from e
    finally:
        _stage.reset(token)


def slug(name: str) -> str:
    s = re.sub(r"[^0-9a-zA-Z]+", "_", name.lower()).strip("_")
    return s or "unnamed"


def _json_dump(path: Path, obj) -> None:
    atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False, default=str) + "\n")


# -- cache readers -----------------------------------------------------------

def read_records(path: Path):
    with open(path, encoding="utf-8") as fh:
        records, _ = filter_records(fh)
    return records


def read_scores(path: Path) -> dict[str, SentimentScore]:
    return {r["tweet_id"]: SentimentScore(int(r["pos"]), int(r["neg"])) for r in read_csv(path)}


def read_assignment(path: Path) -> dict[str, int]:
    return {r["tweet_id"]: int(r["topic"]) for r in read_csv(path)}


def _need(path: Path, stage: str) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"{path} missing; run the {stage} stage first")
    return path


# -- stages ------------------------------------------------------------------

def stage_ingest(cfg: RunConfig):
    out = Path(cfg.output_dir)
    records, stats = load_corpus(cfg.corpus, (cfg.begin, cfg.end), cfg.lang)
    write_corpus(records, out / "corpus.jsonl")
    _json_dump(out / "load_stats.json", asdict(stats))
    return records, stats


def _lemma_table(cfg: RunConfig) -> LemmaTable:
    return load_lemma_table(cfg.lemma_table) if cfg.lemma_table else LemmaTable()


def stage_expand(cfg: RunConfig, records=None) -> SeedList:
    out = Path(cfg.output_dir)
    if records is None:
        records = read_records(_need(out / "corpus.jsonl", "ingest"))
    emb = load_embeddings(cfg.word_embeddings)
    seeds = build_seed_list(records, cfg.query, _lemma_table(cfg), emb, cfg.expansion)
    write_seed_list(seeds, out / "seeds.tsv")
    _json_dump(out / "expand_diagnostics.json", seeds.diagnostics)
    return seeds


def stage_filter(cfg: RunConfig, records=None, seeds: SeedList | None = None):
    out = Path(cfg.output_dir)
    if records is None:
        records = read_records(_need(out / "corpus.jsonl", "ingest"))
    if seeds is None:
        seeds = read_seed_list(_need(out / "seeds.tsv", "expand"), cfg.query, cfg.expansion)
    relevant, stats = filter_corpus(records, seeds, ExclusionRule(frozenset(cfg.exclusion_terms)), cfg.substring_match)
    write_corpus(relevant, out / "relevant.jsonl")
    _json_dump(out / "filter_stats.json", asdict(stats))
    log.info("filtered total=%d matched=%d excluded=%d relevant=%d",
             stats.total, stats.matched, stats.excluded, stats.relevant)
    return relevant, stats


def stage_sentiment(cfg: RunConfig, relevant=None):
    out = Path(cfg.output_dir)
    if relevant is None:
        relevant = read_records(_need(out / "relevant.jsonl", "filter"))
    lex = load_lexicon(cfg.lexicon)
    scores = {r.id: score_text(r.text, lex) for r in relevant}
    write_csv(
        out / "scores.csv", ("tweet_id", "pos", "neg", "label"),
        [(r.id, scores[r.id].pos, scores[r.id].neg, label(scores[r.id]).value) for r in relevant],
    )
    pairs = [(r, scores[r.id]) for r in relevant]
    series = {}
    for m in SERIES_METRICS:
        s = aggregate(pairs, m, cfg.window_dates())
        write_series(s, out / "series" / f"{m.value}.csv")
        series[m.value] = s
    summary = {
        "documents": len(relevant),
        "label_shares": label_shares(list(scores.values())),
        "mean_rel": (sum(s.rel for s in scores.values()) / len(scores)) if scores else 0.0,
    }
    _json_dump(out / "sentiment_summary.json", summary)
    return scores, series


def stage_topics(cfg: RunConfig, relevant=None, scores=None):
    out = Path(cfg.output_dir)
    if relevant is None:
        relevant = read_records(_need(out / "relevant.jsonl", "filter"))
    if scores is None:
        scores = read_scores(_need(out / "scores.csv", "sentiment"))
    if cfg.doc_embedding_strategy == "mean-word-vector":
        docs, missing = tp.embed_docs(relevant, "mean-word-vector", embeddings=load_embeddings(cfg.word_embeddings))
    else:
        docs, missing = tp.embed_docs(relevant, "precomputed-file", path=cfg.doc_embeddings)
    if missing:
        write_csv(out / "missing_embeddings.csv", ("tweet_id",), [(m,) for m in missing])
    assignment = tp.fit_topics(docs, cfg.topics)
    stop = ()
    if cfg.stopwords:
        stop = [w.strip() for w in Path(cfg.stopwords).read_text(encoding="utf-8").split() if w.strip()]
    labels = {}
    if cfg.theme_map:
        labels = tp.load_theme_map(cfg.theme_map).labels
    topics = tp.topic_terms(assignment, relevant, cfg.topics, stop, labels)
    rows = tp.rank_topics(assignment, topics, scores)
    write_csv(out / "assignments.csv", ("tweet_id", "topic"), [(r.id, assignment[r.id]) for r in relevant])
    write_csv(
        out / "topic_terms.csv", ("topic", "rank", "term", "weight"),
        [(t.id, i, term, w) for t in topics for i, (term, w) in enumerate(t.top_terms, 1)],
    )
    write_csv(out / "topics.csv", tp.TOPIC_COLUMNS, [(r.rank, r.label, r.size, r.mean_rel) for r in rows])
    n_out = sum(1 for v in assignment.values() if v == tp.OUTLIER)
    log.info("topics found=%d outliers=%d", len(rows), n_out)
    return assignment, topics, rows


def _phase_tables(cfg: RunConfig) -> dict[str, an.PhaseTable]:
    return {"rki": an.load_phases(cfg.rki_phases, "rki"), "policy": an.load_phases(cfg.policy_phases, "policy")}


def stage_themes(cfg: RunConfig, relevant=None, scores=None, assignment=None):
    """Returns (theme_series, theme_rows, phase_rows), or None when no theme
    map is configured."""
    out = Path(cfg.output_dir)
    if cfg.theme_map is None:
        log.info("skipped reason=no_theme_map")
        return None
    if relevant is None:
        relevant = read_records(_need(out / "relevant.jsonl", "filter"))
    if scores is None:
        scores = read_scores(_need(out / "scores.csv", "sentiment"))
    if assignment is None:
        assignment = read_assignment(_need(out / "assignments.csv", "topics"))
    tmap = tp.load_theme_map(cfg.theme_map, set(assignment.values()) - {tp.OUTLIER})
    series, rows = tp.map_themes(assignment, tmap, relevant, scores, cfg.window_dates())
    phase_rows = tp.theme_phase_table(assignment, tmap, relevant, scores, _phase_tables(cfg)["rki"])
    write_csv(out / "themes.csv", tp.THEME_COLUMNS,
              [(r.theme, r.size, r.mean_rel, " ".join(map(str, r.topics))) for r in rows])
    write_csv(out / "theme_phases.csv", tp.THEME_PHASE_COLUMNS,
              [(r.phase, r.rank, r.theme, r.count, r.share, r.mean_rel) for r in phase_rows])
    for name, s in series.items():
        write_series(s, out / "theme_series" / f"{slug(name)}.csv")
    _json_dump(out / "theme_series" / "index.json", [[slug(n), n] for n in series])
    return series, rows, phase_rows


def _load_series(out: Path) -> dict[str, DailySeries]:
    d = _need(out / "series", "sentiment")
    return {m.value: read_series(d / f"{m.value}.csv", m.value, m.value) for m in SERIES_METRICS}


def _load_theme_series(out: Path) -> dict[str, DailySeries]:
    idx = out / "theme_series" / "index.json"
    if not idx.exists():
        return {}
    names = json.loads(idx.read_text(encoding="utf-8"))
    return {n: read_series(out / "theme_series" / f"{s}.csv", "COUNT", n) for s, n in names}


def stage_analytics(cfg: RunConfig, series=None, theme_series=None) -> dict[str, an.SeriesAnalysis]:
    out = Path(cfg.output_dir)
    if series is None:
        series = _load_series(out)
    if theme_series is None:
        theme_series = _load_theme_series(out)
    events = an.load_events(cfg.events, cfg.window_dates())
    phases = _phase_tables(cfg)
    results = {}
    todo = [(k, s) for k, s in series.items()] + [(f"theme:{k}", s) for k, s in theme_series.items()]
    for key, s in todo:
        results[key] = an.analyze_series(
            s, events, phases, cfg.peak_multiplier, cfg.penalty, cfg.alpha, cfg.align_window_days
        )
    _write_analytics(out, results)
    return results


def _analysis_json(a: an.SeriesAnalysis) -> dict:
    return {
        "trend": asdict(a.trend),
        "peaks": {
            "multiplier": a.peaks.multiplier,
            "upper_threshold": a.peaks.upper_threshold,
            "lower_threshold": a.peaks.lower_threshold,
            "points": [{"date": str(d), "value": v, "side": s} for d, v, s in a.peaks.peaks],
        },
        "changepoints": {
            "penalty": a.changepoints.penalty,
            "total_cost": a.changepoints.total_cost,
            "indices": list(a.changepoints.indices),
            "dates": [str(d) for d in a.change_dates],
        },
        "alignment": [
            {
                "kind": ap.point.kind, "date": str(ap.point.date), "phases": ap.phases,
                "events": [
                    {"date": str(e.date), "description": e.description, "country": e.country, "distance_days": dist}
                    for e, dist in ap.events
                ],
            }
            for ap in a.alignment.points
        ],
    }


TREND_COLUMNS = ("series", "direction", "S", "varS", "Z", "p", "alpha")
PEAK_COLUMNS = ("series", "date", "value", "side", "upper_threshold", "lower_threshold")
CHANGEPOINT_COLUMNS = ("series", "index", "date", "penalty", "total_cost")


def _trend_rows(results):
    return [(k, a.trend.direction, a.trend.S, a.trend.varS, a.trend.Z, a.trend.p, a.trend.alpha)
            for k, a in results.items()]


def _peak_rows(results):
    return [(k, d, v, side, a.peaks.upper_threshold, a.peaks.lower_threshold)
            for k, a in results.items() for d, v, side in a.peaks.peaks]


def _cp_rows(results):
    return [(k, i, d, a.changepoints.penalty, a.changepoints.total_cost)
            for k, a in results.items() for i, d in zip(a.changepoints.change_points, a.change_dates)]


def _write_analytics(out: Path, results: dict[str, an.SeriesAnalysis]) -> None:
    _json_dump(out / "analytics.json", {k: _analysis_json(a) for k, a in results.items()})
    write_csv(out / "trends.csv", TREND_COLUMNS, _trend_rows(results))
    write_csv(out / "peaks.csv", PEAK_COLUMNS, _peak_rows(results))
    write_csv(out / "changepoints.csv", CHANGEPOINT_COLUMNS, _cp_rows(results))
    for k, a in results.items():
        write_csv(out / "alignment" / f"{slug(k)}.csv", an.ALIGNMENT_COLUMNS, a.alignment.rows())


# -- bundle ------------------------------------------------------------------

@dataclass
class Section:
    status: str  # "ok" | "skipped"
    files: list[str] = field(default_factory=list)
    reason: str = ""


@dataclass
class ReportBundle:
    output_dir: Path
    load_stats: LoadStats | None = None
    seeds: SeedList | None = None
    filter_stats: FilterStats | None = None
    scores: dict = field(default_factory=dict)
    series: dict[str, DailySeries] = field(default_factory=dict)
    assignment: dict = field(default_factory=dict)
    topics: list = field(default_factory=list)
    topic_rows: list = field(default_factory=list)
    theme_series: dict[str, DailySeries] = field(default_factory=dict)
    theme_rows: list = field(default_factory=list)
    theme_phase_rows: list = field(default_factory=list)
    analyses: dict[str, an.SeriesAnalysis] = field(default_factory=dict)
    plots: list[Path] = field(default_factory=list)
    sections: dict[str, Section] = field(default_factory=dict)

    def section_names(self) -> set[str]:
        return set(self.sections)


def declared_sections(cfg: RunConfig) -> set[str]:
    """Sections every bundle carries (possibly marked skipped)."""
    return {
        "seed_list", "filter_stats", "series", "topics", "themes", "theme_phases",
        "trends", "peaks", "changepoints", "alignment", "plots",
    }


def _section_table(bundle: ReportBundle, section: str):
    """(header, rows) for a CSV-emittable section."""
    kind, _, key = section.partition(":")
    if kind == "topics":
        return tp.TOPIC_COLUMNS, [(r.rank, r.label, r.size, r.mean_rel) for r in bundle.topic_rows]
    if kind == "seed_list":
        return SEED_COLUMNS, seed_rows(bundle.seeds)
    if kind == "filter_stats":
        fs = bundle.filter_stats
        return ("total", "matched", "excluded", "relevant"), [(fs.total, fs.matched, fs.excluded, fs.relevant)]
    if kind == "series" and key in bundle.series:
        return SERIES_COLUMNS, list(bundle.series[key].rows())
    if kind == "theme_series" and key in bundle.theme_series:
        return SERIES_COLUMNS, list(bundle.theme_series[key].rows())
    if kind == "themes":
        return tp.THEME_COLUMNS, [(r.theme, r.size, r.mean_rel, " ".join(map(str, r.topics))) for r in bundle.theme_rows]
    if kind == "theme_phases":
        return tp.THEME_PHASE_COLUMNS, [
            (r.phase, r.rank, r.theme, r.count, r.share, r.mean_rel) for r in bundle.theme_phase_rows
        ]
    if kind == "trends":
        return TREND_COLUMNS, _trend_rows(bundle.analyses)
    if kind == "peaks":
        return PEAK_COLUMNS, _peak_rows(bundle.analyses)
    if kind == "changepoints":
        return CHANGEPOINT_COLUMNS, _cp_rows(bundle.analyses)
    if kind == "alignment" and key in bundle.analyses:
        return an.ALIGNMENT_COLUMNS, list(bundle.analyses[key].alignment.rows())
    raise KeyError(f"unknown report section {section!r}")


def emit_csv(bundle: ReportBundle, section: str, path: str | Path | None = None) -> Path:
    """Write one section as CSV (UTF-8, header, minimal quoting, LF).

    Section names: topics, seed_list, filter_stats, themes, theme_phases,
    trends, peaks, changepoints, ``series:<metric>``,
    ``theme_series:<theme>`` and ``alignment:<series>``.
    """
    header, rows = _section_table(bundle, section)
    if path is None:
        path = Path(bundle.output_dir) / "emit" / f"{slug(section)}.csv"
    return atomic_write(path, csv_text(header, rows))


def _points(a: an.SeriesAnalysis, name: str):
    pts = [an.DetectedPoint("peak", d, name) for d, _, _ in a.peaks.peaks]
    pts += [an.DetectedPoint("changepoint", d, name) for d in a.change_dates]
    return pts


def stage_report(cfg: RunConfig, bundle: ReportBundle) -> ReportBundle:
    out = Path(cfg.output_dir)
    phases = _phase_tables(cfg)
    plots = []
    if bundle.series:
        s = bundle.series
        plots.append(plot_svg([s["COUNT"], s["POS"], s["NEG"], s["SUM"]], out / "plots" / "frequency_sum.svg",
                              phases["rki"], title="Tweet frequency and summed sentiment"))
        plots.append(plot_svg([s["REL"]], out / "plots" / "rel.svg", phases["rki"],
                              _points(bundle.analyses["REL"], "REL") if "REL" in bundle.analyses else (),
                              title="Relative sentiment (REL)"))
        plots.append(plot_svg([s["COUNT"]], out / "plots" / "count.svg", phases["policy"],
                              _points(bundle.analyses["COUNT"], "COUNT") if "COUNT" in bundle.analyses else (),
                              title="Tweet frequency"))
    if bundle.theme_series:
        ts = list(bundle.theme_series.values())
        plots.append(plot_svg(ts, out / "plots" / "themes_rki_phases.svg", phases["rki"], title="Theme frequency"))
        plots.append(plot_svg(ts, out / "plots" / "themes_policy_phases.svg", phases["policy"],
                              title="Theme frequency, policy phases"))
        for name, s in bundle.theme_series.items():
            a = bundle.analyses.get(f"theme:{name}")
            plots.append(plot_svg([s], out / "plots" / f"theme_{slug(name)}.svg", phases["policy"],
                                  _points(a, name) if a else (), title=name))
    bundle.plots = plots

    def files(*names):
        return [n for n in names if (out / n).exists()]

    sec = bundle.sections
    sec["seed_list"] = Section("ok", files("seeds.tsv", "expand_diagnostics.json"))
    sec["filter_stats"] = Section("ok", files("filter_stats.json", "load_stats.json"))
    sec["series"] = Section("ok", [f"series/{m.value}.csv" for m in SERIES_METRICS])
    sec["topics"] = Section("ok", files("topics.csv", "topic_terms.csv", "assignments.csv"))
    if bundle.theme_rows:
        sec["themes"] = Section("ok", files("themes.csv") + sorted(
            f"theme_series/{slug(n)}.csv" for n in bundle.theme_series))
        sec["theme_phases"] = Section("ok", files("theme_phases.csv"))
    else:
        sec["themes"] = Section("skipped", reason="no theme map configured")
        sec["theme_phases"] = Section("skipped", reason="no theme map configured")
    sec["trends"] = Section("ok", files("trends.csv", "analytics.json"))
    sec["peaks"] = Section("ok", files("peaks.csv"))
    sec["changepoints"] = Section("ok", files("changepoints.csv"))
    sec["alignment"] = Section("ok", sorted(f"alignment/{slug(k)}.csv" for k in bundle.analyses))
    sec["plots"] = Section("ok", sorted(str(p.relative_to(out)) for p in plots))
    missing = declared_sections(cfg) - set(sec)
    for m in missing:
        sec[m] = Section("skipped", reason="not produced")
    _json_dump(out / "bundle.json", {
        "config": cfg.to_dict(),
        "sections": {k: asdict(v) for k, v in sorted(sec.items())},
    })
    return bundle


def load_bundle(cfg: RunConfig) -> ReportBundle:
    """Rebuild a bundle from the stage outputs of an earlier run; analytics
    are recomputed from the cached series."""
    out = Path(cfg.output_dir)
    b = ReportBundle(out)
    b.load_stats = LoadStats(**json.loads(_need(out / "load_stats.json", "ingest").read_text()))
    b.seeds = read_seed_list(_need(out / "seeds.tsv", "expand"), cfg.query, cfg.expansion)
    b.filter_stats = FilterStats(**json.loads(_need(out / "filter_stats.json", "filter").read_text()))
    b.scores = read_scores(_need(out / "scores.csv", "sentiment"))
    b.series = _load_series(out)
    b.assignment = read_assignment(_need(out / "assignments.csv", "topics"))
    b.topic_rows = [
        tp.TopicRow(int(r["rank"]), -1, r["label"], int(r["size"]), float(r["mean_rel"]))
        for r in read_csv(out / "topics.csv")
    ]
    b.theme_series = _load_theme_series(out)
    if (out / "themes.csv").exists() and cfg.theme_map:
        b.theme_rows = [
            tp.ThemeRow(r["theme"], int(r["size"]), float(r["mean_rel"]),
                        tuple(int(x) for x in r["topics"].split()))
            for r in read_csv(out / "themes.csv")
        ]
        b.theme_phase_rows = [
            tp.ThemePhaseRow(r["phase"], int(r["rank"]), r["theme"], int(r["count"]),
                             float(r["share"]), float(r["mean_rel"]))
            for r in read_csv(out / "theme_phases.csv")
        ]
    b.analyses = stage_analytics(cfg, b.series, b.theme_series)
    return b


def run(cfg: RunConfig) -> ReportBundle:
    """Execute every stage and return the assembled bundle."""
    cfg.validate()
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    b = ReportBundle(Path(cfg.output_dir))
    records, b.load_stats = _run_stage("ingest", stage_ingest, cfg)
    b.seeds = _run_stage("expand", stage_expand, cfg, records)
    relevant, b.filter_stats = _run_stage("filter", stage_filter, cfg, records, b.seeds)
    b.scores, b.series = _run_stage("sentiment", stage_sentiment, cfg, relevant)
    b.assignment, b.topics, b.topic_rows = _run_stage("topics", stage_topics, cfg, relevant, b.scores)
    themes = _run_stage("themes", stage_themes, cfg, relevant, b.scores, b.assignment)
    if themes is not None:
        b.theme_series, b.theme_rows, b.theme_phase_rows = themes
    b.analyses = _run_stage("analytics", stage_analytics, cfg, b.series, b.theme_series)
    return _run_stage("report", stage_report, cfg, b)

"""Embedding-based topic model: embed, reduce, density-cluster, then
describe each cluster with class-based TF-IDF terms.

The reducer is a principal-component projection and the clusterer is
HDBSCAN; both sit behind plain array-in/array-out functions so either can
be swapped.
"""

from __future__ import annotations

import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import TweetRecord, tokenize
from .seedex import EmbeddingTable, read_vector_file
from .sentiment import DailySeries, SentimentScore, count_series, day_of

log = logging.getLogger(__name__)

OUTLIER = -1


@dataclass
class TopicModelConfig:
    n_topics_target: int = 150
    min_cluster_size: int = 10
    reduced_dim: int = 5
    ngram_max: int = 2
    diversity: float = 1.0
    n_terms: int = 10
    random_seed: int = 0

    def __post_init__(self):
        if self.min_cluster_size < 2:
            raise ValueError("min_cluster_size must be >= 2")
        if self.reduced_dim < 1:
            raise ValueError("reduced_dim must be >= 1")
        if self.n_topics_target < 1:
            raise ValueError("n_topics_target must be >= 1")
        if not 0.0 <= self.diversity <= 1.0:
            raise ValueError("diversity must lie in [0, 1]")


@dataclass(frozen=True)
class DocVector:
    tweet_id: str
    vector: np.ndarray

    @property
    def is_zero(self) -> bool:
        return not np.any(self.vector)


@dataclass
class Topic:
    id: int
    size: int
    top_terms: list[tuple[str, float]]
    label: str | None = None

    def display_label(self) -> str:
        if self.label:
            return self.label
        return "_".join([str(self.id)] + [t for t, _ in self.top_terms[:3]])


@dataclass
class ThemeMap:
    themes: dict[str, list[int]] = field(default_factory=dict)
    labels: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        owner = {}
        for name, ids in self.themes.items():
            for t in ids:
                if t in owner and owner[t] != name:
                    raise ValueError(f"topic {t} mapped to both {owner[t]!r} and {name!r}")
                owner[t] = name
        self._owner = owner

    def theme_of(self, topic_id: int) -> str | None:
        return self._owner.get(topic_id)

    def topic_ids(self) -> set[int]:
        return set(self._owner)

    def validate(self, known_ids: Iterable[int]) -> None:
        unknown = self.topic_ids() - set(known_ids)
        if unknown:
            raise ValueError(f"theme map names unknown topic ids: {sorted(unknown)}")


# -- embedding ---------------------------------------------------------------

def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else np.zeros_like(v)


def mean_word_vector(text: str, embeddings: EmbeddingTable) -> np.ndarray:
    vecs = [embeddings[t.surface] for t in tokenize(text) if t.surface in embeddings]
    if not vecs:
        return np.zeros(embeddings.dim)
    return _unit(np.mean(vecs, axis=0))


def embed_docs(
    corpus: Sequence[TweetRecord],
    strategy: str = "mean-word-vector",
    embeddings: EmbeddingTable | None = None,
    path: str | Path | None = None,
) -> tuple[list[DocVector], list[str]]:
    """Return one unit (or zero) vector per document plus the ids that had
    no precomputed vector.

    ``strategy`` is ``"mean-word-vector"`` (needs ``embeddings``) or
    ``"precomputed-file"`` (needs ``path``: header ``N D``, rows
    ``tweet_id v1 .. vD``). Documents without a vector get a zero vector
    and so end up as outliers.
    """
    if strategy == "mean-word-vector":
        if embeddings is None:
            raise ValueError("mean-word-vector strategy needs a word embedding table")
        return [DocVector(r.id, mean_word_vector(r.text, embeddings)) for r in corpus], []
    if strategy == "precomputed-file":
        if path is None:
            raise ValueError("precomputed-file strategy needs a path")
        dim, table, _ = read_vector_file(path, lowercase=False)
        out, missing = [], []
        for r in corpus:
            v = table.get(r.id)
            if v is None:
                missing.append(r.id)
                v = np.zeros(dim)
            out.append(DocVector(r.id, _unit(v)))
        if missing:
            log.warning("documents without precomputed embedding missing=%d", len(missing))
        return out, missing
    raise ValueError(f"unknown embedding strategy {strategy!r}")


# -- reduction ---------------------------------------------------------------

def reduce(vectors: np.ndarray, reduced_dim: int, random_seed: int = 0) -> np.ndarray:
    """Project onto the leading ``reduced_dim`` principal components.

    Component signs are fixed so the largest-magnitude loading is positive,
    which makes the output independent of the SVD's sign choice. The
    projection is deterministic; ``random_seed`` is accepted for reducers
    that need one.
    """
    X = np.asarray(vectors, dtype=float)
    if X.ndim != 2:
        raise ValueError("expected a 2-d array")
    n, d = X.shape
    if reduced_dim > d:
        raise ValueError(f"reduced_dim {reduced_dim} exceeds input dimension {d}")
    if d == reduced_dim:
        return X
    nonzero = int(np.count_nonzero(np.any(X != 0, axis=1)))
    if nonzero < reduced_dim + 1:
        raise ValueError(
            f"need at least {reduced_dim + 1} nonzero vectors to reduce to {reduced_dim} "
            f"dimensions, got {nonzero}; lower reduced_dim"
        )
    Xc = X - X.mean(axis=0)
    _, _, vt = np.linalg.svd(Xc, full_matrices=False)
    comps = vt[:reduced_dim]
    signs = np.sign(comps[np.arange(reduced_dim), np.argmax(np.abs(comps), axis=1)])
    signs[signs == 0] = 1.0
    comps = comps * signs[:, None]
    return Xc @ comps.T


# -- clustering --------------------------------------------------------------

def _hdbscan(X: np.ndarray, min_cluster_size: int) -> np.ndarray:
    from sklearn.cluster import HDBSCAN

    return HDBSCAN(min_cluster_size=min_cluster_size, copy=True).fit_predict(X)


def _merge_to_target(X: np.ndarray, labels: np.ndarray, target: int) -> np.ndarray:
    # Fold the smallest cluster into the one with the nearest centroid until
    # at most ``target`` clusters remain.
    labels = labels.copy()
    while True:
        ids = sorted(set(labels[labels >= 0].tolist()))
        if len(ids) <= target:
            return labels
        sizes = {i: int(np.sum(labels == i)) for i in ids}
        cents = {i: X[labels == i].mean(axis=0) for i in ids}
        small = min(ids, key=lambda i: (sizes[i], i))
        others = [i for i in ids if i != small]
        dest = min(others, key=lambda i: (float(np.linalg.norm(cents[i] - cents[small])), i))
        labels[labels == small] = dest


def _relabel(labels: np.ndarray) -> np.ndarray:
    # ids by size descending, ties by first member position
    ids = sorted(set(labels[labels >= 0].tolist()))
    order = sorted(ids, key=lambda i: (-int(np.sum(labels == i)), int(np.argmax(labels == i))))
    remap = {old: new for new, old in enumerate(order)}
    return np.array([remap.get(int(l), OUTLIER) for l in labels], dtype=int)


def cluster(reduced: np.ndarray, config: TopicModelConfig, valid: np.ndarray | None = None) -> np.ndarray:
    """Density clustering honouring ``min_cluster_size``; noise is ``-1``.

    ``valid`` masks rows that may be clustered (zero-vector documents are
    always outliers). Returned ids are ordered by cluster size.
    """
    X = np.asarray(reduced, dtype=float)
    n = len(X)
    valid = np.ones(n, dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    labels = np.full(n, OUTLIER, dtype=int)
    idx = np.flatnonzero(valid)
    if len(idx) < config.min_cluster_size:
        return labels
    sub = _hdbscan(X[idx], config.min_cluster_size)
    sub = _merge_to_target(X[idx], sub, config.n_topics_target)
    labels[idx] = sub
    return _relabel(labels)


def fit_topics(
    docs: Sequence[DocVector], config: TopicModelConfig
) -> dict[str, int]:
    """Reduce and cluster document vectors; returns tweet_id -> topic id."""
    if not docs:
        return {}
    X = np.vstack([d.vector for d in docs])
    valid = np.any(X != 0, axis=1)
    labels = np.full(len(docs), OUTLIER, dtype=int)
    if np.count_nonzero(valid) >= max(config.min_cluster_size, config.reduced_dim + 1):
        Xv = X[valid]
        R = reduce(Xv, min(config.reduced_dim, Xv.shape[1]), config.random_seed)
        labels[valid] = cluster(R, config)
    return {d.tweet_id: int(l) for d, l in zip(docs, labels)}


# -- term extraction ---------------------------------------------------------

def ngrams(text: str, ngram_max: int = 2, stopwords: frozenset = frozenset()) -> list[str]:
    words = [t.surface for t in tokenize(text) if t.surface not in stopwords]
    out = []
    for n in range(1, ngram_max + 1):
        out += [" ".join(words[i:i + n]) for i in range(len(words) - n + 1)]
    return out


def ctfidf(class_counts: Mapping[int, Counter]) -> dict[int, dict[str, float]]:
    """weight(t, c) = tf(t, c) * log(1 + A / f(t)).

    tf is the count of t in class c over all term occurrences in c, f(t) the
    count of t across classes and A the mean number of term occurrences per
    class. Classes without any terms are omitted.
    """
    classes = {c: cnt for c, cnt in class_counts.items() if sum(cnt.values()) > 0}
    if not classes:
        return {}
    freq: Counter = Counter()
    for cnt in classes.values():
        freq.update(cnt)
    avg = sum(freq.values()) / len(classes)
    out = {}
    for c, cnt in classes.items():
        total = sum(cnt.values())
        out[c] = {t: (k / total) * math.log(1.0 + avg / freq[t]) for t, k in cnt.items()}
    return out


def select_terms(weights: Mapping[str, float], n_terms: int = 10, diversity: float = 1.0) -> list[tuple[str, float]]:
    """Pick the top terms, skipping a candidate whose share of unigrams
    already used by selected terms exceeds ``1 - diversity``.

    With diversity 1.0 any shared unigram disqualifies; with 0.0 nothing is
    filtered.
    """
    ranked = sorted(weights.items(), key=lambda kv: (-kv[1], kv[0].count(" "), kv[0]))
    chosen: list[tuple[str, float]] = []
    used: set[str] = set()
    for term, w in ranked:
        if len(chosen) >= n_terms:
            break
        parts = term.split(" ")
        overlap = sum(p in used for p in parts) / len(parts)
        if overlap > 1.0 - diversity:
            continue
        chosen.append((term, w))
        used.update(parts)
    return chosen


def topic_terms(
    assignment: Mapping[str, int],
    corpus: Sequence[TweetRecord],
    config: TopicModelConfig = TopicModelConfig(),
    stopwords: Iterable[str] = (),
    labels: Mapping[int, str] | None = None,
) -> list[Topic]:
    stopwords = frozenset(s.lower() for s in stopwords)
    counts: dict[int, Counter] = defaultdict(Counter)
    sizes: Counter = Counter()
    for rec in corpus:
        c = assignment[rec.id]
        if c == OUTLIER:
            continue
        sizes[c] += 1
        counts[c].update(ngrams(rec.text, config.ngram_max, stopwords))
    weights = ctfidf(counts)
    topics = []
    for c in sorted(sizes):
        if c not in weights:
            log.warning("topic has no terms, skipped topic=%d", c)
            continue
        terms = select_terms(weights[c], config.n_terms, config.diversity)
        topics.append(Topic(c, sizes[c], terms, (labels or {}).get(c)))
    return topics


# -- reporting ---------------------------------------------------------------

@dataclass(frozen=True)
class TopicRow:
    rank: int
    topic_id: int
    label: str
    size: int
    mean_rel: float


TOPIC_COLUMNS = ("rank", "label", "size", "mean_rel")


def _mean_rel(ids: Sequence[str], scores: Mapping[str, SentimentScore]) -> float:
    if not ids:
        return 0.0
    return sum(scores[i].rel for i in ids) / len(ids)


def members(assignment: Mapping[str, int]) -> dict[int, list[str]]:
    out: dict[int, list[str]] = defaultdict(list)
    for tid, c in assignment.items():
        out[c].append(tid)
    return out


def rank_topics(
    assignment: Mapping[str, int],
    topics: Sequence[Topic],
    scores: Mapping[str, SentimentScore],
) -> list[TopicRow]:
    """Topic frequency table (largest first) with mean per-tweet REL."""
    mem = members(assignment)
    by_id = {t.id: t for t in topics}
    ids = sorted((c for c in mem if c != OUTLIER), key=lambda c: (-len(mem[c]), c))
    rows = []
    for rank, c in enumerate(ids, 1):
        lab = by_id[c].display_label() if c in by_id else str(c)
        rows.append(TopicRow(rank, c, lab, len(mem[c]), _mean_rel(mem[c], scores)))
    return rows


def load_theme_map(path: str | Path, known_ids: Iterable[int] | None = None) -> ThemeMap:
    """Read ``{"themes": {name: [ids]}, "labels": {id: label}}`` from JSON
    or YAML."""
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        data = json.loads(text)
    else:
        import yaml

        data = yaml.safe_load(text)
    data = data or {}
    themes = {str(k): [int(i) for i in v] for k, v in (data.get("themes") or {}).items()}
    labels = {int(k): str(v) for k, v in (data.get("labels") or {}).items()}
    tm = ThemeMap(themes, labels)
    if known_ids is not None:
        tm.validate(known_ids)
    return tm


@dataclass(frozen=True)
class ThemeRow:
    theme: str
    size: int
    mean_rel: float
    topics: tuple[int, ...]


THEME_COLUMNS = ("theme", "size", "mean_rel", "topics")


def map_themes(
    assignment: Mapping[str, int],
    theme_map: ThemeMap,
    records: Sequence[TweetRecord],
    scores: Mapping[str, SentimentScore],
    window: tuple[date, date],
) -> tuple[dict[str, DailySeries], list[ThemeRow]]:
    """Per-theme daily counts and an overall summary.

    Outliers and documents of unmapped topics are left out.
    """
    theme_map.validate(set(assignment.values()) - {OUTLIER})
    by_theme: dict[str, list[TweetRecord]] = {name: [] for name in theme_map.themes}
    for rec in records:
        name = theme_map.theme_of(assignment.get(rec.id, OUTLIER))
        if name is not None:
            by_theme[name].append(rec)
    series = {
        name: count_series((day_of(r.created_at) for r in recs), window, name)
        for name, recs in by_theme.items()
    }
    rows = [
        ThemeRow(name, len(recs), _mean_rel([r.id for r in recs], scores), tuple(theme_map.themes[name]))
        for name, recs in by_theme.items()
    ]
    rows.sort(key=lambda r: (-r.size, r.theme))
    return series, rows


@dataclass(frozen=True)
class ThemePhaseRow:
    phase: str
    rank: int
    theme: str
    count: int
    share: float
    mean_rel: float


THEME_PHASE_COLUMNS = ("phase", "rank", "theme", "count", "share", "mean_rel")


def theme_phase_table(
    assignment: Mapping[str, int],
    theme_map: ThemeMap,
    records: Sequence[TweetRecord],
    scores: Mapping[str, SentimentScore],
    phases,
) -> list[ThemePhaseRow]:
    """Theme frequency per phase: count, share of themed tweets in the
    phase, and mean REL. Phases with no themed tweets are omitted."""
    rows = []
    for ph in phases.rows:
        by_theme: dict[str, list[str]] = {name: [] for name in theme_map.themes}
        for rec in records:
            if phases.find(day_of(rec.created_at)) is not ph:
                continue
            name = theme_map.theme_of(assignment.get(rec.id, OUTLIER))
            if name is not None:
                by_theme[name].append(rec.id)
        total = sum(len(v) for v in by_theme.values())
        if not total:
            continue
        ranked = sorted(by_theme.items(), key=lambda kv: (-len(kv[1]), kv[0]))
        for rank, (name, ids) in enumerate(ranked, 1):
            rows.append(ThemePhaseRow(ph.name, rank, name, len(ids), len(ids) / total, _mean_rel(ids, scores)))
    return rows

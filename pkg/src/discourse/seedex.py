"""Seed-list construction by query expansion.

Candidates are the lemmas co-occurring with a query keyword. They are kept
when their word vector is close enough to the query's (cosine similarity)
and ranked by the number of documents they share with the query.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import LemmaTable, TweetRecord, tokenize

log = logging.getLogger(__name__)

DEFAULT_POS_CLASSES = frozenset({"verb", "adj", "noun", "propn"})

# Absolute slack on the inclusive similarity threshold, so that a cosine of
# exactly the threshold survives rounding (e.g. after rescaling vectors).
SIMILARITY_EPS = 1e-12


class EmbeddingFormatError(ValueError):
    pass


class UndefinedSimilarity(ValueError):
    pass


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]
    duplicates: int = 0

    def __contains__(self, token):
        return token in self.vectors

    def __getitem__(self, token):
        return self.vectors[token]

    def __len__(self):
        return len(self.vectors)

    def get(self, token, default=None):
        return self.vectors.get(token, default)

    def scaled(self, factor: float) -> "EmbeddingTable":
        return EmbeddingTable(self.dim, {k: v * factor for k, v in self.vectors.items()})


@dataclass(frozen=True)
class ExpansionConfig:
    min_similarity: float = 0.6
    top_k: int = 30
    pos_classes: frozenset = DEFAULT_POS_CLASSES

    def __post_init__(self):
        if not -1.0 <= self.min_similarity <= 1.0:
            raise ValueError("min_similarity must lie in [-1, 1]")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        object.__setattr__(self, "pos_classes", frozenset(self.pos_classes))


@dataclass(frozen=True)
class CandidateTerm:
    lemma: str
    pos_class: str
    cooccurrence: int
    similarity: float = float("nan")


@dataclass
class SeedList:
    query: str
    terms: list[CandidateTerm]
    config: ExpansionConfig = field(default_factory=ExpansionConfig)
    diagnostics: dict = field(default_factory=dict)

    def match_terms(self) -> set[str]:
        """Terms used for relevance matching: the query plus every seed."""
        return {self.query} | {t.lemma for t in self.terms}

    def __len__(self):
        return len(self.terms)


def read_vector_file(path: str | Path, lowercase: bool = True) -> tuple[int, dict[str, np.ndarray], int]:
    """Parse a ``V D`` header followed by ``key v1 .. vD`` rows.

    Returns (dim, vectors, duplicate_count). Duplicate keys keep the first row.
    """
    vectors: dict[str, np.ndarray] = {}
    dups = 0
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        try:
            n_rows, dim = (int(x) for x in header)
        except ValueError:
            raise EmbeddingFormatError(f"{path}:1: header must be 'V D', got {' '.join(header)!r}") from None
        if n_rows < 0 or dim < 1:
            raise EmbeddingFormatError(f"{path}:1: invalid header values {n_rows} {dim}")
        rows = 0
        for lineno, line in enumerate(fh, 2):
            parts = line.rstrip("\n").rstrip(" ").split(" ")
            if parts == [""]:
                continue
            if len(parts) != dim + 1:
                raise EmbeddingFormatError(
                    f"{path}:{lineno}: expected {dim + 1} fields, got {len(parts)}"
                )
            rows += 1
            if rows > n_rows:
                raise EmbeddingFormatError(f"{path}:{lineno}: more rows than the declared {n_rows}")
            key = parts[0].lower() if lowercase else parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:]])
            except ValueError:
                raise EmbeddingFormatError(f"{path}:{lineno}: non-numeric component") from None
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError(f"{path}:{lineno}: non-finite component")
            if not key:
                raise EmbeddingFormatError(f"{path}:{lineno}: empty key")
            if key in vectors:
                dups += 1
                continue
            vectors[key] = vec
    return dim, vectors, dups


def load_embeddings(path: str | Path) -> EmbeddingTable:
    """Load a fastText-style ``.vec`` text file. Tokens are lowercased."""
    dim, vectors, dups = read_vector_file(path, lowercase=True)
    if dups:
        log.warning("embedding file has duplicate tokens path=%s duplicates=%d", path, dups)
    return EmbeddingTable(dim, vectors, dups)


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch {a.shape} vs {b.shape}")
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise UndefinedSimilarity("cosine of a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def query_documents(corpus: Iterable[TweetRecord], query: str) -> list[TweetRecord]:
    """Documents that contain ``query`` as a single token (case-insensitive)."""
    q = query.lower()
    return [r for r in corpus if any(t.surface == q for t in tokenize(r.text))]


def collect_candidates(
    corpus: Iterable[TweetRecord],
    query: str,
    table: LemmaTable,
    pos_classes: Iterable[str] = DEFAULT_POS_CLASSES,
) -> list[CandidateTerm]:
    """Count, per lemma, the query documents it occurs in.

    ``corpus`` should already be restricted to documents containing the
    query; see :func:`query_documents`.
    """
    pos_classes = frozenset(pos_classes)
    query_lemma = table.lemma(query)
    counts: Counter[str] = Counter()
    pos_of: dict[str, str] = {}
    for rec in corpus:
        seen = set()
        for tok in tokenize(rec.text):
            pos = table.pos(tok.surface)
            if pos not in pos_classes:
                continue
            lemma = table.lemma(tok.surface)
            if lemma == query_lemma or lemma == query.lower():
                continue
            seen.add(lemma)
            pos_of.setdefault(lemma, pos)
        counts.update(seen)
    return [CandidateTerm(lem, pos_of[lem], n) for lem, n in sorted(counts.items())]


def _rank_key(term: CandidateTerm):
    return (-term.cooccurrence, term.lemma)


def expand(
    query: str,
    candidates: Sequence[CandidateTerm],
    embeddings: EmbeddingTable,
    config: ExpansionConfig = ExpansionConfig(),
) -> SeedList:
    """Filter candidates by similarity to ``query`` and keep the ``top_k``
    most co-occurring ones (ties broken by lemma)."""
    q = query.lower()
    if q not in embeddings:
        raise KeyError(f"query {query!r} has no embedding")
    qvec = embeddings[q]
    survivors = []
    diag = Counter()
    for cand in candidates:
        vec = embeddings.get(cand.lemma)
        if vec is None:
            diag["no_embedding"] += 1
            continue
        if cand.pos_class not in config.pos_classes:
            diag["pos_excluded"] += 1
            continue
        try:
            sim = cosine(qvec, vec)
        except UndefinedSimilarity:
            diag["zero_vector"] += 1
            continue
        if sim < config.min_similarity - SIMILARITY_EPS:
            diag["below_threshold"] += 1
            continue
        survivors.append(CandidateTerm(cand.lemma, cand.pos_class, cand.cooccurrence, sim))
    survivors.sort(key=_rank_key)
    diag["above_threshold"] = len(survivors)
    diag["candidates"] = len(candidates)
    terms = survivors[: config.top_k]
    log.info(
        "expanded query=%s candidates=%d kept=%d no_embedding=%d",
        q, len(candidates), len(terms), diag["no_embedding"],
    )
    return SeedList(q, terms, config, dict(diag))


def build_seed_list(
    corpus: Sequence[TweetRecord],
    query: str,
    table: LemmaTable,
    embeddings: EmbeddingTable,
    config: ExpansionConfig = ExpansionConfig(),
) -> SeedList:
    docs = query_documents(corpus, query)
    cands = collect_candidates(docs, query, table, config.pos_classes)
    seeds = expand(query, cands, embeddings, config)
    seeds.diagnostics["query_documents"] = len(docs)
    return seeds


SEED_COLUMNS = ("term", "pos_class", "cooccurrence", "similarity")


def seed_rows(seeds: SeedList):
    return [(t.lemma, t.pos_class, t.cooccurrence, t.similarity) for t in seeds.terms]


def write_seed_list(seeds: SeedList, path: str | Path) -> Path:
    from .io import write_tsv

    return write_tsv(path, SEED_COLUMNS, seed_rows(seeds))


def read_seed_list(path: str | Path, query: str, config: ExpansionConfig = ExpansionConfig()) -> SeedList:
    terms = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != SEED_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        for line in fh:
            if not line.strip():
                continue
            term, pos, co, sim = line.rstrip("\n").split("\t")
            terms.append(CandidateTerm(term, pos, int(co), float(sim)))
    return SeedList(query.lower(), terms, config)


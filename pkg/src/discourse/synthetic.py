"""Deterministic synthetic corpus with planted structure, for tests and demos.

The generated corpus spans 2021-01-01 .. 2021-06-30 and contains

* a rising number of relevant documents per day (trend in COUNT),
* a burst of extra documents on 2021-03-15 (peak in COUNT),
* mostly positive documents before 2021-04-15 and mostly negative ones
  after it (step in REL),
* four topic vocabularies with distinct sizes and orthogonal embedding
  directions,
* distractors: off-topic, exclusion-only, foreign-language, out-of-window,
  duplicate and malformed lines.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .io import atomic_write

BEGIN = date(2021, 1, 1)
END = date(2021, 6, 30)
SPIKE_DATE = date(2021, 3, 15)
STEP_DATE = date(2021, 4, 15)
SPIKE_EXTRA = 60
N_RECORDS = 1000
DIM = 16
QUERY = "impfung"

SEED_WORDS = ("impfstoff", "impfzentrum", "impftermin", "auffrischung", "geimpft")
EXCLUSION_WORD = "infektion"
# (name, vocabulary, share of relevant documents); shares are distinct so
# topic ids after size ranking are predictable
TOPICS = (
    ("logistics", ("termin", "warteschlange", "hausarzt", "terminvergabe", "anmeldung", "praxis"), 0.40),
    ("side effects", ("nebenwirkung", "fieber", "kopfschmerz", "thrombose", "arm", "muedigkeit"), 0.28),
    ("liberties", ("freiheit", "pflicht", "grundrecht", "demo", "zwang", "protest"), 0.20),
    ("travel", ("reise", "urlaub", "grenze", "flughafen", "zertifikat", "quarantaene"), 0.12),
)
OFFTOPIC = ("wetter", "fussball", "kaffee", "sonne", "konzert", "garten")
FUNCTION_WORDS = ("der", "die", "und", "ist", "heute", "mit", "ein")
POSITIVE = "super"
NEGATIVE = "schrecklich"

THEMES = {
    "vaccination logistics": [0],
    "side effects": [1],
    "freedom and civic liberties": [2, 3],
}


@dataclass(frozen=True)
class FixturePaths:
    root: Path
    corpus: Path
    embeddings: Path
    lexicon: Path
    lemma_table: Path
    stopwords: Path
    theme_map: Path
    config: Path


def relevant_per_day(d: date) -> int:
    """Baseline relevant documents on day ``d`` (2 rising to 6)."""
    i = (d - BEGIN).days
    n = (END - BEGIN).days + 1
    return 2 + (5 * i) // n


def _vectors(rng: np.random.Generator) -> dict[str, np.ndarray]:
    eye = np.eye(DIM)
    vecs = {QUERY: eye[0].copy()}

    def near(axis: int) -> np.ndarray:
        v = eye[axis] + 0.12 * rng.standard_normal(DIM)
        return v

    for w in SEED_WORDS + (EXCLUSION_WORD,):
        vecs[w] = near(0)
    for k, (_, vocab, _) in enumerate(TOPICS, start=1):
        for w in vocab:
            vecs[w] = near(k)
    for w in OFFTOPIC:
        vecs[w] = near(len(TOPICS) + 1)
    return vecs


def _ts(d: date, rng: np.random.Generator) -> str:
    t = datetime(d.year, d.month, d.day, tzinfo=timezone.utc) + timedelta(seconds=int(rng.integers(0, 86400)))
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def _topic_of(j: int) -> int:
    """Deterministic topic cycle matching the configured shares."""
    slots = []
    for k, (_, _, share) in enumerate(TOPICS):
        slots += [k] * round(share * 50)
    return slots[j % len(slots)]


def _relevant_text(rng, topic: int, positive: bool, j: int) -> tuple[str, list[str]]:
    vocab = TOPICS[topic][1]
    words = list(rng.choice(vocab, size=3, replace=False))
    if j % 2 == 0:
        seed = [QUERY]
    elif j % 3 == 0:
        seed = [QUERY, SEED_WORDS[j % len(SEED_WORDS)]]
    else:
        seed = [SEED_WORDS[j % len(SEED_WORDS)]]
    if j % 7 == 0:
        words.append(EXCLUSION_WORD)
    if j % 5 == 4:
        mood = []
    else:
        mood = [POSITIVE if positive else NEGATIVE]
    if j % 11 == 0 and mood:
        mood = ["nicht"] + mood  # negated: flips the sign
    fw = list(rng.choice(FUNCTION_WORDS, size=2, replace=False))
    tokens = [fw[0]] + seed + words + mood + [fw[1]]
    tags = [QUERY] if j % 9 == 0 else []
    return " ".join(tokens), tags


def generate(seed: int = 0) -> tuple[list[str], dict[str, np.ndarray]]:
    """Return (jsonl lines, word vectors)."""
    rng = np.random.default_rng(seed)
    vecs = _vectors(rng)
    lines: list[str] = []
    j = 0

    def rec(rid, ts, text, lang="de", tags=()):
        return json.dumps({"id": rid, "created_at": ts, "lang": lang, "text": text, "hashtags": list(tags)},
                          ensure_ascii=False)

    d = BEGIN
    while d <= END:
        n = relevant_per_day(d) + (SPIKE_EXTRA if d == SPIKE_DATE else 0)
        for _ in range(n):
            text, tags = _relevant_text(rng, _topic_of(j), d < STEP_DATE, j)
            lines.append(rec(f"r{j:05d}", _ts(d, rng), text, tags=tags))
            j += 1
        d += timedelta(days=1)

    days = (END - BEGIN).days + 1

    def any_day():
        return BEGIN + timedelta(days=int(rng.integers(0, days)))

    extra = []
    for i in range(30):  # only the exclusion term matches
        vocab = TOPICS[i % len(TOPICS)][1]
        extra.append(rec(f"x{i:05d}", _ts(any_day(), rng), f"die {EXCLUSION_WORD} " + " ".join(vocab[:2])))
    for i in range(30):
        extra.append(rec(f"e{i:05d}", _ts(any_day(), rng), f"{QUERY} vaccine appointment today", lang="en"))
    for i in range(20):
        extra.append(rec(f"o{i:05d}", _ts(date(2020, 12, 1) + timedelta(days=i), rng), f"{QUERY} termin {POSITIVE}"))
    for i in range(10):
        extra.append(lines[i * 7])  # duplicate id
    malformed = [
        '{"id": "m1", "created_at": "2021-02-01T10:00:00Z", "lang": "de"',
        '{"id": "m2", "lang": "de", "text": "impfung"}',
        '{"id": "m3", "created_at": "not a date", "lang": "de", "text": "impfung"}',
        '["impfung"]',
        '{"id": "", "created_at": "2021-02-01T10:00:00Z", "lang": "de", "text": "impfung"}',
    ]
    extra += malformed
    n_off = N_RECORDS - len(lines) - len(extra)
    if n_off < 0:
        raise RuntimeError("fixture budget exceeded")
    for i in range(n_off):
        words = list(rng.choice(OFFTOPIC, size=3, replace=False))
        extra.append(rec(f"n{i:05d}", _ts(any_day(), rng), "der " + " ".join(words)))
    all_lines = lines + extra
    order = rng.permutation(len(all_lines))
    return [all_lines[i] for i in order], vecs


def write_fixture(directory: str | Path, seed: int = 0) -> FixturePaths:
    """Write corpus, embeddings, lexicon, lemma table, stopwords, theme map
    and a run config into ``directory``."""
    root = Path(directory)
    lines, vecs = generate(seed)
    vecs["impfen"] = vecs["geimpft"]  # lemma of "geimpft" in the lemma table
    p = FixturePaths(
        root, root / "corpus.jsonl", root / "embeddings.vec", root / "lexicon.tsv", root / "lemmas.tsv",
        root / "stopwords.txt", root / "themes.yaml", root / "config.yaml",
    )
    atomic_write(p.corpus, "\n".join(lines) + "\n")
    vec_lines = [f"{len(vecs)} {DIM}"]
    for w in sorted(vecs):
        vec_lines.append(w + " " + " ".join(repr(float(x)) for x in vecs[w]))
    atomic_write(p.embeddings, "\n".join(vec_lines) + "\n")
    atomic_write(p.lexicon, "term\tclass\tstrength\n"
                 f"{POSITIVE}\tsentiment\t3\n{NEGATIVE}\tsentiment\t-4\nsehr\tbooster\t\nnicht\tnegator\t\n")
    lem = ["surface\tlemma\tpos"]
    lem += [f"{w}\t{w}\tother" for w in FUNCTION_WORDS + ("nicht", "sehr")]
    lem += [f"{w}\t{w}\tadj" for w in (POSITIVE, NEGATIVE)]
    lem.append("geimpft\timpfen\tverb")
    atomic_write(p.lemma_table, "\n".join(lem) + "\n")
    atomic_write(p.stopwords, "\n".join(FUNCTION_WORDS + ("nicht", "sehr")) + "\n")
    theme_lines = ["themes:"]
    for name, ids in THEMES.items():
        theme_lines.append(f"  {name}: [{', '.join(map(str, ids))}]")
    theme_lines.append("labels:")
    for k, (name, _, _) in enumerate(TOPICS):
        theme_lines.append(f"  {k}: {name}")
    atomic_write(p.theme_map, "\n".join(theme_lines) + "\n")
    atomic_write(p.config, "\n".join([
        "corpus: corpus.jsonl",
        f"window: [{BEGIN.isoformat()}, {END.isoformat()}]",
        "lang: de",
        f"query: {QUERY}",
        "lexicon: lexicon.tsv",
        "word_embeddings: embeddings.vec",
        "lemma_table: lemmas.tsv",
        "stopwords: stopwords.txt",
        "theme_map: themes.yaml",
        "output_dir: out",
        "topics:",
        "  min_cluster_size: 20",
        "  reduced_dim: 5",
        "random_seed: 0",
        "",
    ]))
    return p

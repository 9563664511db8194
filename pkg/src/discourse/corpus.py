"""Corpus ingest: line-delimited tweet records, time/language filtering,
tokenization and table-driven lemmatization."""

from __future__ import annotations

import json
import logging
import re
import unicodedata
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

POS_CLASSES = ("verb", "adj", "noun", "propn", "other")

_TOKEN_RE = re.compile(r"(#?)([^\W_]+)")
_FRACTION_RE = re.compile(r"\.(\d+)")


@dataclass(frozen=True)
class TweetRecord:
    id: str
    created_at: datetime
    lang: str
    text: str
    hashtags: tuple[str, ...] = ()

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "created_at": format_timestamp(self.created_at),
                "lang": self.lang,
                "text": self.text,
                "hashtags": list(self.hashtags),
            },
            ensure_ascii=False,
        )


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str = ""
    is_hashtag: bool = False

    def __post_init__(self):
        if not self.lemma:
            object.__setattr__(self, "lemma", self.surface)


@dataclass
class LoadStats:
    read: int = 0
    kept: int = 0
    dropped_time: int = 0
    dropped_lang: int = 0
    malformed: int = 0
    duplicates: int = 0

    def __add__(self, other: "LoadStats") -> "LoadStats":
        return LoadStats(**{k: getattr(self, k) + getattr(other, k) for k in vars(self)})

    def is_partition(self) -> bool:
        return self.read == (
            self.kept + self.dropped_time + self.dropped_lang + self.malformed + self.duplicates
        )


@dataclass
class LemmaTable:
    """surface -> (lemma, pos-class). Lookups are case-insensitive."""

    entries: dict[str, tuple[str, str]] = field(default_factory=dict)
    default_pos: str = "noun"

    def lemma(self, surface: str) -> str:
        hit = self.entries.get(surface.lower())
        return hit[0] if hit else surface.lower()

    def pos(self, surface: str) -> str:
        hit = self.entries.get(surface.lower())
        return hit[1] if hit else self.default_pos

    def __len__(self):
        return len(self.entries)


class MalformedRecord(ValueError):
    pass


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 instant to an aware UTC datetime truncated to seconds.

    Naive timestamps are taken to be UTC.
    """
    if not isinstance(value, str) or not value:
        raise ValueError(f"not a timestamp: {value!r}")
    s = value.strip()
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    # older fromisoformat only takes 3 or 6 fractional digits
    s = _FRACTION_RE.sub(lambda m: "." + m.group(1)[:6].ljust(6, "0"), s)
    dt = datetime.fromisoformat(s)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _normalize_hashtag(tag) -> str:
    if not isinstance(tag, str):
        raise MalformedRecord(f"hashtag is not a string: {tag!r}")
    tag = unicodedata.normalize("NFC", tag).lstrip("#").lower()
    if not tag or "#" in tag or any(ch.isspace() for ch in tag):
        raise MalformedRecord(f"bad hashtag: {tag!r}")
    return tag


def parse_record(line: str) -> TweetRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise MalformedRecord(str(e)) from None
    if not isinstance(obj, dict):
        raise MalformedRecord("record is not an object")
    try:
        rid, ts, lang, text = obj["id"], obj["created_at"], obj["lang"], obj["text"]
    except KeyError as e:
        raise MalformedRecord(f"missing field {e}") from None
    if isinstance(rid, int) and not isinstance(rid, bool):
        rid = str(rid)
    if not isinstance(rid, str) or not rid:
        raise MalformedRecord("id must be a nonempty string")
    if not isinstance(lang, str) or not isinstance(text, str):
        raise MalformedRecord("lang and text must be strings")
    try:
        created = parse_timestamp(ts)
    except (TypeError, ValueError) as e:
        raise MalformedRecord(f"bad created_at: {e}") from None
    tags = obj.get("hashtags", [])
    if tags is None:
        tags = []
    if not isinstance(tags, list):
        raise MalformedRecord("hashtags must be a list")
    return TweetRecord(
        id=rid,
        created_at=created,
        lang=lang,
        text=unicodedata.normalize("NFC", text),
        hashtags=tuple(_normalize_hashtag(t) for t in tags),
    )


def filter_records(
    lines: Iterable[str],
    window: tuple[datetime, datetime] | None = None,
    lang: str | None = None,
) -> tuple[list[TweetRecord], LoadStats]:
    """Parse and filter raw record lines. Blank lines are not counted."""
    begin, end = window if window is not None else (None, None)
    if begin is not None and end is not None and begin > end:
        raise ValueError("window begin is after end")
    stats = LoadStats()
    seen: set[str] = set()
    kept = []
    for line in lines:
        if not line.strip():
            continue
        stats.read += 1
        try:
            rec = parse_record(line)
        except MalformedRecord as e:
            log.debug("malformed record skipped: %s", e)
            stats.malformed += 1
            continue
        if rec.id in seen:
            stats.duplicates += 1
            continue
        seen.add(rec.id)
        if (begin is not None and rec.created_at < begin) or (
            end is not None and rec.created_at > end
        ):
            stats.dropped_time += 1
        elif lang is not None and rec.lang != lang:
            stats.dropped_lang += 1
        else:
            stats.kept += 1
            kept.append(rec)
    return kept, stats


def load_corpus(
    path: str | Path,
    window: tuple[datetime, datetime] | None = None,
    lang: str | None = None,
) -> tuple[list[TweetRecord], LoadStats]:
    """Load a JSON-lines corpus keeping records inside ``window`` (inclusive)
    whose language tag equals ``lang``.

    Malformed lines are counted and skipped. Duplicate ids keep the first
    occurrence. An unreadable file raises ``OSError``.
    """
    with open(path, encoding="utf-8") as fh:
        records, stats = filter_records(fh, window, lang)
    log.info(
        "loaded corpus path=%s read=%d kept=%d dropped_time=%d dropped_lang=%d malformed=%d duplicates=%d",
        path, stats.read, stats.kept, stats.dropped_time, stats.dropped_lang,
        stats.malformed, stats.duplicates,
    )
    return records, stats


def write_corpus(records: Iterable[TweetRecord], path: str | Path) -> None:
    from .io import atomic_write

    atomic_write(path, "".join(r.to_json() + "\n" for r in records))


def iter_tokens(text: str) -> Iterator[Token]:
    for m in _TOKEN_RE.finditer(text):
        yield Token(m.group(2).lower(), is_hashtag=bool(m.group(1)))


def tokenize(text: str) -> list[Token]:
    """Split on whitespace and punctuation, case-fold.

    >>> [t.surface for t in tokenize("Die Impfung war gut.")]
    ['die', 'impfung', 'war', 'gut']
    """
    return list(iter_tokens(text))


def lemmatize(token: Token, table: LemmaTable) -> Token:
    return replace(token, lemma=table.lemma(token.surface))


def load_lemma_table(path: str | Path) -> LemmaTable:
    """Read a TSV of ``surface, lemma, pos-class`` rows.

    A header row starting with ``surface`` is skipped, as are ``#`` comments.
    """
    entries: dict[str, tuple[str, str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if lineno == 1 and cols[0].strip().lower() == "surface":
                continue
            if len(cols) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns, got {len(cols)}")
            surface, lemma, pos = (c.strip() for c in cols)
            pos = pos.lower()
            if pos not in POS_CLASSES:
                raise ValueError(f"{path}:{lineno}: unknown pos-class {pos!r}")
            if not surface or not lemma:
                raise ValueError(f"{path}:{lineno}: empty surface or lemma")
            entries.setdefault(surface.lower(), (lemma.lower(), pos))
    return LemmaTable(entries)

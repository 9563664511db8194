"""Run configuration: one structured file (YAML or JSON), optionally
overridden by command-line values."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from datetime import datetime, time, timezone
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .corpus import parse_timestamp
from .seedex import ExpansionConfig
from .topics import TopicModelConfig

OUTPUT_ENV = "DISCOURSE_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


def data_path(name: str) -> Path:
    """Path of a file shipped in ``discourse/data``."""
    return Path(str(resources.files("discourse") / "data" / name))


def _parse_bound(value, end: bool) -> datetime:
    if isinstance(value, datetime):
        return value if value.tzinfo else value.replace(tzinfo=timezone.utc)
    s = str(value).strip()
    if len(s) == 10:  # bare date: whole day
        d = datetime.fromisoformat(s).date()
        return datetime.combine(d, time(23, 59, 59) if end else time(0, 0, 0), tzinfo=timezone.utc)
    return parse_timestamp(s)


@dataclass
class RunConfig:
    corpus: Path
    begin: datetime
    end: datetime
    lexicon: Path
    word_embeddings: Path
    output_dir: Path
    lang: str = "de"
    query: str = "impfung"
    expansion: ExpansionConfig = field(default_factory=ExpansionConfig)
    exclusion_terms: tuple[str, ...] = ("infektion",)
    substring_match: bool = False
    lemma_table: Path | None = None
    doc_embedding_strategy: str = "mean-word-vector"
    doc_embeddings: Path | None = None
    topics: TopicModelConfig = field(default_factory=TopicModelConfig)
    stopwords: Path | None = None
    theme_map: Path | None = None
    rki_phases: Path = field(default_factory=lambda: data_path("rki_phases.csv"))
    policy_phases: Path = field(default_factory=lambda: data_path("policy_phases.csv"))
    events: Path = field(default_factory=lambda: data_path("policy_events.csv"))
    peak_multiplier: float = 1.5
    penalty: float | None = None
    alpha: float = 0.05
    align_window_days: int = 3
    random_seed: int = 0

    def window_dates(self):
        return self.begin.date(), self.end.date()

    def validate(self) -> "RunConfig":
        if self.begin > self.end:
            raise ConfigError(f"time window is not ordered: {self.begin} > {self.end}")
        paths = {
            "corpus": self.corpus, "lexicon": self.lexicon, "word_embeddings": self.word_embeddings,
            "lemma_table": self.lemma_table, "doc_embeddings": self.doc_embeddings,
            "stopwords": self.stopwords, "theme_map": self.theme_map,
            "rki_phases": self.rki_phases, "policy_phases": self.policy_phases, "events": self.events,
        }
        for key, p in paths.items():
            if p is not None and not Path(p).is_file():
                raise ConfigError(f"{key}: file not found: {p}")
        if self.doc_embedding_strategy not in ("mean-word-vector", "precomputed-file"):
            raise ConfigError(f"unknown doc_embedding_strategy {self.doc_embedding_strategy!r}")
        if self.doc_embedding_strategy == "precomputed-file" and self.doc_embeddings is None:
            raise ConfigError("precomputed-file strategy needs doc_embeddings")
        if self.penalty is not None and self.penalty < 0:
            raise ConfigError("penalty must be >= 0")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        return self

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Path):
                v = str(v)
            elif isinstance(v, datetime):
                v = v.strftime("%Y-%m-%dT%H:%M:%SZ")
            elif isinstance(v, ExpansionConfig):
                v = {"min_similarity": v.min_similarity, "top_k": v.top_k, "pos_classes": sorted(v.pos_classes)}
            elif isinstance(v, TopicModelConfig):
                v = {k.name: getattr(v, k.name) for k in fields(v)}
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


_PATH_KEYS = {
    "corpus", "lexicon", "word_embeddings", "output_dir", "lemma_table", "doc_embeddings",
    "stopwords", "theme_map", "rki_phases", "policy_phases", "events",
}


def config_from_mapping(
    data: Mapping[str, Any], base_dir: Path | None = None, honor_env: bool = True
) -> RunConfig:
    data = dict(data)
    base_dir = base_dir or Path.cwd()
    known = {f.name for f in fields(RunConfig)} | {"window"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "window" in data:
        w = data.pop("window")
        data.setdefault("begin", w[0] if isinstance(w, (list, tuple)) else w["begin"])
        data.setdefault("end", w[1] if isinstance(w, (list, tuple)) else w["end"])
    for key in ("corpus", "begin", "end", "lexicon", "word_embeddings"):
        if data.get(key) is None:
            raise ConfigError(f"missing required config key {key!r}")
    env_out = os.environ.get(OUTPUT_ENV) if honor_env else None
    if env_out:
        data["output_dir"] = env_out
    if data.get("output_dir") is None:
        raise ConfigError("missing output_dir (set it in the config or via $" + OUTPUT_ENV + ")")
    for key in _PATH_KEYS:
        if data.get(key) is not None:
            p = Path(data[key]).expanduser()
            data[key] = p if p.is_absolute() else base_dir / p
    try:
        data["begin"] = _parse_bound(data["begin"], end=False)
        data["end"] = _parse_bound(data["end"], end=True)
    except ValueError as e:
        raise ConfigError(f"bad window bound: {e}") from None
    try:
        if "expansion" in data and not isinstance(data["expansion"], ExpansionConfig):
            exp = dict(data["expansion"] or {})
            if "pos_classes" in exp:
                exp["pos_classes"] = frozenset(exp["pos_classes"])
            data["expansion"] = ExpansionConfig(**exp)
        if "topics" in data and not isinstance(data["topics"], TopicModelConfig):
            data["topics"] = TopicModelConfig(**(data["topics"] or {}))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad nested section: {e}") from None
    try:
        cfg = RunConfig(**data)
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None
    cfg.topics.random_seed = cfg.random_seed
    return cfg


def load_config(path: str | Path, overrides: Mapping[str, Any] | None = None) -> RunConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        data = json.loads(text)
    else:
        import yaml

        data = yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    data.update(overrides)
    # precedence for the output directory: flag, then environment, then file
    return config_from_mapping(data, path.parent, honor_env="output_dir" not in overrides)

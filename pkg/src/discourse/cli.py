"""Command-line entry point. Subcommands mirror the pipeline stages; each
reads the caches left in the output directory by the stages before it.

Exit codes: 0 success, 1 validation error, 2 stage failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import report as rp
from .config import ConfigError, RunConfig, load_config

EXIT_OK, EXIT_CONFIG, EXIT_STAGE, EXIT_IO = 0, 1, 2, 3

_PATH_FLAGS = ("corpus", "lexicon", "word_embeddings", "output_dir", "lemma_table", "doc_embeddings",
               "stopwords", "theme_map", "rki_phases", "policy_phases", "events")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-c", "--config", required=True, help="YAML or JSON run configuration")
    g = p.add_argument_group("overrides")
    for name in _PATH_FLAGS:
        g.add_argument("--" + name.replace("_", "-"), dest=name)
    g.add_argument("--begin")
    g.add_argument("--end")
    g.add_argument("--lang")
    g.add_argument("--query")
    g.add_argument("--peak-multiplier", type=float, dest="peak_multiplier")
    g.add_argument("--penalty", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--align-window-days", type=int, dest="align_window_days")
    g.add_argument("--seed", type=int, dest="random_seed")
    g.add_argument("--substring-match", action="store_true", default=None, dest="substring_match")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discourse", description="Keyword-driven discourse analysis pipeline.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "expand": "ingest the corpus and build the seed list",
        "filter": "select relevant documents with the seed list",
        "sentiment": "score documents and aggregate daily series",
        "topics": "cluster documents and extract topic terms",
        "analyze": "theme tables, trends, peaks, change points and alignment",
        "report": "write plots and the bundle index",
        "run-all": "run every stage in order",
        "emit": "write one bundle section as CSV",
    }
    for name, h in helps.items():
        p = sub.add_parser(name, help=h)
        _add_common(p)
        if name == "emit":
            p.add_argument("section", help="e.g. topics, trends, series:REL, alignment:COUNT")
            p.add_argument("-o", "--out", help="target file (default: <output_dir>/emit/<section>.csv)")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    keys = _PATH_FLAGS + ("begin", "end", "lang", "query", "peak_multiplier", "penalty", "alpha",
                          "align_window_days", "random_seed", "substring_match")
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is None:
            continue
        # flag paths are relative to the working directory, not the config file
        out[k] = str(Path(v).resolve()) if k in _PATH_FLAGS else v
    return out


def _dispatch(command: str, cfg: RunConfig, args) -> None:
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    stage = rp._run_stage
    if command == "run-all":
        rp.run(cfg)
    elif command == "expand":
        records, _ = stage("ingest", rp.stage_ingest, cfg)
        stage("expand", rp.stage_expand, cfg, records)
    elif command == "filter":
        stage("filter", rp.stage_filter, cfg)
    elif command == "sentiment":
        stage("sentiment", rp.stage_sentiment, cfg)
    elif command == "topics":
        stage("topics", rp.stage_topics, cfg)
    elif command == "analyze":
        stage("themes", rp.stage_themes, cfg)
        stage("analytics", rp.stage_analytics, cfg)
    elif command == "report":
        bundle = stage("analytics", rp.load_bundle, cfg)
        stage("report", rp.stage_report, cfg, bundle)
    elif command == "emit":
        bundle = stage("analytics", rp.load_bundle, cfg)
        path = stage("emit", rp.emit_csv, bundle, args.section, args.out)
        print(path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    rp.configure_logging(logging.DEBUG if args.verbose else logging.INFO)
    log = logging.getLogger("discourse")
    try:
        cfg = load_config(args.config, _overrides(args)).validate()
        _dispatch(args.command, cfg, args)
    except ConfigError as e:
        log.error("invalid configuration error=%r", str(e))
        return EXIT_CONFIG
    except rp.StageError as e:
        log.error("aborted stage=%s cause=%r", e.stage, str(e.cause))
        return EXIT_IO if isinstance(e.cause, OSError) else EXIT_STAGE
    except OSError as e:
        log.error("io failure error=%r", str(e))
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

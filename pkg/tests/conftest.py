import shutil
from datetime import datetime, timezone
from pathlib import Path

import pytest

from discourse.config import load_config
from discourse.corpus import load_corpus, load_lemma_table
from discourse.seedex import load_embeddings
from discourse.sentiment import load_lexicon

DATA = Path(__file__).parent / "data"


def utc(*args):
    return datetime(*args, tzinfo=timezone.utc)


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon(DATA / "lexicon.tsv")


@pytest.fixture(scope="session")
def seed_corpus():
    records, _ = load_corpus(DATA / "seed_corpus.jsonl")
    return records


@pytest.fixture(scope="session")
def seed_embeddings():
    return load_embeddings(DATA / "seed_embeddings.vec")


@pytest.fixture(scope="session")
def seed_lemmas():
    return load_lemma_table(DATA / "seed_lemmas.tsv")


@pytest.fixture(scope="session")
def relevance_corpus():
    records, _ = load_corpus(DATA / "relevance_corpus.jsonl")
    return records


@pytest.fixture
def synthetic_dir(tmp_path):
    """Copy of the bundled synthetic fixture in a scratch directory."""
    dst = tmp_path / "synthetic"
    shutil.copytree(DATA / "synthetic", dst)
    return dst


@pytest.fixture
def synthetic_config(synthetic_dir, monkeypatch):
    monkeypatch.delenv("DISCOURSE_OUTPUT_DIR", raising=False)
    return load_config(synthetic_dir / "config.yaml")


# acceptance reporting: one pass/fail line per criterion

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "call" or rep.failed:
        _CRITERIA[mark.args[0]] = (mark.args[1], rep.outcome, rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        title, outcome, secs = _CRITERIA[n]
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {title}  ({secs:.2f} s)")

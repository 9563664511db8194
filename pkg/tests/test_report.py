import json
import re
import shutil

import pytest

from discourse import report as rp
from discourse.cli import main
from discourse.config import ConfigError
from discourse.io import read_csv
from discourse.sentiment import read_series


def csv_bytes(out):
    return {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*.csv"))}


@pytest.fixture
def bundle(synthetic_config):
    return rp.run(synthetic_config)


def test_complete_bundle(bundle, synthetic_config):
    assert set(bundle.sections) == rp.declared_sections(synthetic_config)
    assert all(s.status == "ok" for s in bundle.sections.values())
    assert len(bundle.topic_rows) >= 2
    index = json.loads((bundle.output_dir / "bundle.json").read_text())
    for sec in index["sections"].values():
        for f in sec["files"]:
            assert (bundle.output_dir / f).exists()


def test_rerun_is_bitwise_identical(bundle, synthetic_config):
    first = csv_bytes(bundle.output_dir)
    rp.run(synthetic_config)
    assert csv_bytes(bundle.output_dir) == first


def test_downstream_cache_regeneration(bundle, synthetic_config):
    out = bundle.output_dir
    before = csv_bytes(out)
    for name in ("scores.csv", "assignments.csv", "topics.csv", "themes.csv", "trends.csv", "peaks.csv"):
        (out / name).unlink()
    shutil.rmtree(out / "series")
    shutil.rmtree(out / "alignment")
    rp.stage_sentiment(synthetic_config)
    rp.stage_topics(synthetic_config)
    rp.stage_themes(synthetic_config)
    rp.stage_analytics(synthetic_config)
    assert csv_bytes(out) == before


def test_missing_theme_map_marks_sections_skipped(synthetic_config):
    synthetic_config.theme_map = None
    b = rp.run(synthetic_config)
    assert b.sections["themes"].status == "skipped" and b.sections["themes"].reason
    assert b.sections["theme_phases"].status == "skipped"
    assert set(b.sections) == rp.declared_sections(synthetic_config)


@pytest.mark.parametrize(
    "section, header",
    [
        ("topics", ["rank", "label", "size", "mean_rel"]),
        ("series:REL", ["date", "value", "count", "empty_flag"]),
        ("alignment:COUNT", ["kind", "date", "phase_rki", "phase_policy", "event_date", "event_desc", "distance_days"]),
        ("trends", ["series", "direction", "S", "varS", "Z", "p", "alpha"]),
    ],
)
def test_emit_schema(bundle, section, header):
    path = rp.emit_csv(bundle, section)
    assert path.read_text().splitlines()[0].split(",") == header


def test_emit_unknown_section(bundle):
    with pytest.raises(KeyError):
        rp.emit_csv(bundle, "nonsense")
    with pytest.raises(KeyError):
        rp.emit_csv(bundle, "series:MISSING")


def test_emit_round_trip_exact(bundle, tmp_path):
    s = bundle.series["REL"]
    path = rp.emit_csv(bundle, "series:REL", tmp_path / "rel.csv")
    again = read_series(path, "REL")
    assert again.values.tolist() == s.values.tolist()
    rows = read_csv(rp.emit_csv(bundle, "trends", tmp_path / "t.csv"))
    for row, (name, a) in zip(rows, bundle.analyses.items()):
        assert row["series"] == name and float(row["p"]) == a.trend.p and float(row["Z"]) == a.trend.Z


def test_load_bundle_matches_run(bundle, synthetic_config):
    again = rp.load_bundle(synthetic_config)
    for section in ("topics", "trends", "peaks", "changepoints", "themes", "theme_phases", "series:SUM"):
        assert rp._section_table(again, section) == rp._section_table(bundle, section)


def test_invalid_window_fails_before_stages(synthetic_config):
    synthetic_config.begin, synthetic_config.end = synthetic_config.end, synthetic_config.begin
    with pytest.raises(ConfigError):
        rp.run(synthetic_config)
    assert not (synthetic_config.output_dir / "corpus.jsonl").exists()


def test_stage_failure_names_stage(synthetic_config):
    synthetic_config.word_embeddings.write_text("not a header\n")
    with pytest.raises(rp.StageError) as err:
        rp.run(synthetic_config)
    assert err.value.stage == "expand"
    assert (synthetic_config.output_dir / "corpus.jsonl").exists()  # partial output retained


# command line


def test_cli_stages_in_sequence(synthetic_dir, monkeypatch):
    monkeypatch.delenv("DISCOURSE_OUTPUT_DIR", raising=False)
    cfg = str(synthetic_dir / "config.yaml")
    for cmd in ("expand", "filter", "sentiment", "topics", "analyze", "report"):
        assert main([cmd, "-c", cfg]) == 0, cmd
    out = synthetic_dir / "out"
    assert (out / "bundle.json").exists() and (out / "plots" / "rel.svg").exists()
    staged = csv_bytes(out)
    assert main(["run-all", "-c", cfg]) == 0
    assert csv_bytes(out) == staged
    assert main(["emit", "-c", cfg, "topics", "-o", str(synthetic_dir / "t.csv")]) == 0
    assert (synthetic_dir / "t.csv").read_text().startswith("rank,label,size,mean_rel\n")


def test_cli_log_format(synthetic_dir, monkeypatch, capsys):
    monkeypatch.delenv("DISCOURSE_OUTPUT_DIR", raising=False)
    assert main(["expand", "-c", str(synthetic_dir / "config.yaml")]) == 0
    lines = capsys.readouterr().err.strip().splitlines()
    pattern = re.compile(r"^\d{4}-\d\d-\d\dT\d\d:\d\d:\d\d (INFO|WARNING|ERROR|DEBUG) stage=\w+ ")
    assert lines and all(pattern.match(l) for l in lines)
    assert any("kept=" in l for l in lines)


def test_cli_exit_codes(synthetic_dir, tmp_path, monkeypatch):
    monkeypatch.delenv("DISCOURSE_OUTPUT_DIR", raising=False)
    cfg = str(synthetic_dir / "config.yaml")
    assert main(["run-all", "-c", cfg, "--begin", "2021-07-01"]) == 1
    assert main(["filter", "-c", cfg, "--output-dir", str(tmp_path / "empty")]) == 3
    assert main(["run-all", "-c", str(tmp_path / "absent.yaml")]) == 3
    (synthetic_dir / "embeddings.vec").write_text("x\n")
    assert main(["run-all", "-c", cfg]) == 2


def test_cli_env_and_flag_output(synthetic_dir, tmp_path, monkeypatch):
    cfg = str(synthetic_dir / "config.yaml")
    monkeypatch.setenv("DISCOURSE_OUTPUT_DIR", str(tmp_path / "env"))
    assert main(["expand", "-c", cfg]) == 0
    assert (tmp_path / "env" / "seeds.tsv").exists()
    assert main(["expand", "-c", cfg, "--output-dir", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "seeds.tsv").exists()


def test_committed_fixture_matches_generator(tmp_path, data_dir):
    from discourse.synthetic import write_fixture

    write_fixture(tmp_path)
    for p in sorted((data_dir / "synthetic").iterdir()):
        if p.is_file():
            assert (tmp_path / p.name).read_bytes() == p.read_bytes(), p.name

import json
import unicodedata

import pytest
from hypothesis import given
from hypothesis import strategies as st

from discourse.corpus import (
    LemmaTable,
    Token,
    filter_records,
    lemmatize,
    load_corpus,
    load_lemma_table,
    parse_timestamp,
    tokenize,
    write_corpus,
)

from conftest import utc

WINDOW = (utc(2021, 1, 1), utc(2021, 12, 31, 23, 59, 59))


def line(id="1", ts="2021-03-01T10:00:00Z", lang="de", text="impfung", hashtags=()):
    return json.dumps({"id": id, "created_at": ts, "lang": lang, "text": text, "hashtags": list(hashtags)})


@pytest.fixture
def lemma_table(data_dir):
    return load_lemma_table(data_dir / "lemmas.tsv")


def test_record_inside_window_is_kept():
    recs, stats = filter_records([line()], WINDOW, "de")
    assert [r.id for r in recs] == ["1"]
    assert stats.kept == 1


def test_foreign_language_is_dropped():
    recs, stats = filter_records([line(lang="en")], WINDOW, "de")
    assert recs == []
    assert stats.dropped_lang == 1


def test_unparseable_timestamp_is_malformed():
    recs, stats = filter_records([line(ts="yesterday")], WINDOW, "de")
    assert recs == [] and stats.malformed == 1 and stats.read == 1


def test_out_of_window_and_bounds_inclusive():
    lines = [
        line("a", "2020-12-31T23:59:59Z"),
        line("b", "2021-01-01T00:00:00Z"),
        line("c", "2021-12-31T23:59:59Z"),
        line("d", "2022-01-01T00:00:00Z"),
    ]
    recs, stats = filter_records(lines, WINDOW, "de")
    assert [r.id for r in recs] == ["b", "c"]
    assert stats.dropped_time == 2


def test_duplicates_first_wins():
    recs, stats = filter_records([line("x", text="first"), line("x", text="second")], WINDOW, "de")
    assert [r.text for r in recs] == ["first"]
    assert stats.duplicates == 1


def test_timestamp_offset_normalised_to_utc():
    assert parse_timestamp("2021-03-01T01:30:00.75+02:00") == utc(2021, 2, 28, 23, 30, 0)


def test_text_is_nfc_normalised():
    decomposed = unicodedata.normalize("NFD", "Schöne Grüße")
    recs, _ = filter_records([line(text=decomposed)])
    assert recs[0].text == "Schöne Grüße"


@pytest.mark.parametrize(
    "bad",
    [
        '{"id": "1"',
        '[1, 2]',
        '{"id": "1", "lang": "de", "text": "x"}',
        line(hashtags=["two words"]),
        line(hashtags=[3]),
    ],
)
def test_malformed_variants(bad):
    recs, stats = filter_records([bad])
    assert recs == [] and stats.malformed == 1


def test_hashtags_strip_hash_and_fold():
    recs, _ = filter_records([line(hashtags=["#Impfpflicht"])])
    assert recs[0].hashtags == ("impfpflicht",)


def test_begin_after_end_rejected():
    with pytest.raises(ValueError):
        filter_records([], (WINDOW[1], WINDOW[0]))


def test_round_trip_through_file(tmp_path):
    recs, _ = filter_records([line("a", text="Die Impfung"), line("b", hashtags=["x"])])
    write_corpus(recs, tmp_path / "c.jsonl")
    again, stats = load_corpus(tmp_path / "c.jsonl")
    assert again == recs and stats.is_partition()


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_corpus(tmp_path / "absent.jsonl")


# tokenize


def test_tokenize_sentence():
    assert [t.surface for t in tokenize("Die Impfung war gut.")] == ["die", "impfung", "war", "gut"]


def test_tokenize_hashtag():
    toks = tokenize("#Impfpflicht jetzt!")
    assert [(t.surface, t.is_hashtag) for t in toks] == [("impfpflicht", True), ("jetzt", False)]


def test_tokenize_empty():
    assert tokenize("") == []


# lemmatize


def test_lemma_from_table(lemma_table):
    assert lemmatize(Token("impfungen"), lemma_table).lemma == "impfung"


def test_unknown_surface_is_its_own_lemma(lemma_table):
    assert lemmatize(Token("xyzzy"), lemma_table).lemma == "xyzzy"
    assert lemma_table.pos("xyzzy") == "noun"


def test_lookup_is_case_insensitive():
    table = LemmaTable({"impfung": ("impfung", "noun")})
    assert lemmatize(Token("IMPFUNG"), table).lemma == "impfung"


def test_lemma_table_rejects_bad_pos(tmp_path):
    p = tmp_path / "t.tsv"
    p.write_text("impfung\timpfung\tthing\n")
    with pytest.raises(ValueError):
        load_lemma_table(p)


# properties

records_st = st.lists(
    st.fixed_dictionaries(
        {
            "id": st.sampled_from(["a", "b", "c", "d", "e"]),
            "day": st.integers(1, 28),
            "month": st.integers(1, 12),
            "year": st.sampled_from([2020, 2021, 2022]),
            "lang": st.sampled_from(["de", "en"]),
            "broken": st.booleans(),
        }
    ),
    max_size=25,
)


def _lines(specs):
    out = []
    for s in specs:
        ts = f"{s['year']}-{s['month']:02d}-{s['day']:02d}T12:00:00Z"
        out.append("{not json" if s["broken"] else line(s["id"], ts, s["lang"]))
    return out


@given(records_st)
def test_stats_partition_input(specs):
    _, stats = filter_records(_lines(specs), WINDOW, "de")
    assert stats.is_partition()
    assert stats.read == len(specs)


@given(records_st)
def test_filtering_idempotent(specs):
    once, _ = filter_records(_lines(specs), WINDOW, "de")
    twice, stats = filter_records([r.to_json() for r in once], WINDOW, "de")
    assert twice == once
    assert stats.kept == len(once)


@given(st.text(max_size=80))
def test_tokens_only_use_input_characters(text):
    toks = tokenize(text)
    folded = text.lower()
    assert tokenize(text) == toks
    for t in toks:
        assert t.surface
        assert not any(ch.isspace() for ch in t.surface)
        assert set(t.surface) <= set(folded) | set(text.lower())

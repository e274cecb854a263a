import json

import numpy as np
import pytest

from clca.datasets import build_dataset, generate_records, load_dataset, save_dataset
from clca.embedding import embed_dialogue
from clca.errors import GenerationInterrupted, SchemaError
from clca.providers import generate_dialogue, generate_scenario
from clca.schemas import canonical_json

from test_schemas import records as records_strategy  # reuse the hypothesis strategy
from hypothesis import given, settings


def test_save_load_round_trip(small_dataset, tmp_path):
    p = tmp_path / "d.jsonl"
    save_dataset(small_dataset, str(p))
    loaded = load_dataset(str(p))
    assert [r.to_dict() for r in loaded.records] == [
        r.to_dict() for r in small_dataset.records
    ]
    assert loaded.embed_dim == small_dataset.embed_dim
    for a, b in zip(loaded.embeddings, small_dataset.embeddings):
        assert np.array_equal(a, b)


def test_save_is_byte_deterministic(small_dataset, tmp_path):
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    save_dataset(small_dataset, str(p1))
    save_dataset(small_dataset, str(p2))
    assert p1.read_bytes() == p2.read_bytes()
    # one canonical line per record, LF-terminated
    data = p1.read_bytes()
    assert data.endswith(b"\n")
    lines = data.decode("utf-8").splitlines()
    assert len(lines) == len(small_dataset.records)
    for line, record in zip(lines, small_dataset.records):
        assert line == canonical_json(record.to_dict())


def test_load_reports_line_number(small_dataset, tmp_path):
    p = tmp_path / "bad.jsonl"
    good = canonical_json(small_dataset.records[0].to_dict())
    bad = json.dumps({"record_id": "x"})
    p.write_text(good + "\n" + good + "\n" + bad + "\n", encoding="utf-8")
    with pytest.raises(SchemaError, match="line 3") as exc_info:
        load_dataset(str(p))
    assert exc_info.value.line == 3


def test_load_reports_json_error_line(tmp_path):
    p = tmp_path / "bad.jsonl"
    p.write_text("{not json\n", encoding="utf-8")
    with pytest.raises(SchemaError, match="line 1: invalid JSON"):
        load_dataset(str(p))


def test_load_empty_file(tmp_path):
    p = tmp_path / "empty.jsonl"
    p.write_text("", encoding="utf-8")
    ds = load_dataset(str(p))
    assert ds.records == [] and ds.embeddings == []


def test_load_skips_blank_lines(small_dataset, tmp_path):
    p = tmp_path / "gaps.jsonl"
    line = canonical_json(small_dataset.records[0].to_dict())
    p.write_text("\n" + line + "\n\n" + line + "\n", encoding="utf-8")
    assert len(load_dataset(str(p)).records) == 2


def test_load_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_dataset(str(tmp_path / "nope.jsonl"))


def test_build_dataset_recomputes_embeddings(small_dataset):
    for record, emb in zip(small_dataset.records, small_dataset.embeddings):
        assert np.array_equal(emb, embed_dialogue(record, small_dataset.embed_dim))


@settings(max_examples=25, deadline=None)
@given(records_strategy())
def test_round_trip_any_valid_record(tmp_path_factory, record):
    p = tmp_path_factory.mktemp("ds") / "one.jsonl"
    save_dataset(build_dataset([record]), str(p))
    assert load_dataset(str(p)).records[0].to_dict() == record.to_dict()


# ---------------------------------------------------------------------------
# generation


def test_generate_records_deterministic(profile, builtin_provider):
    a = generate_records(profile, 5, builtin_provider, 42)
    b = generate_records(profile, 5, builtin_provider, 42)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]
    assert len(a) == 5
    assert len({r.record_id for r in a}) == 5


def test_generate_records_matches_per_record_streams(profile, builtin_provider):
    from clca.rng import derive_seed

    records = generate_records(profile, 3, builtin_provider, 7)
    for i, record in enumerate(records):
        scenario = generate_scenario(profile, builtin_provider, derive_seed(7, 2 * i))
        expected = generate_dialogue(
            profile, scenario, builtin_provider, derive_seed(7, 2 * i + 1)
        )
        assert record.to_dict() == expected.to_dict()


def test_generate_records_partial_failure(profile, builtin_provider, monkeypatch):
    import clca.datasets as datasets
    from clca.errors import ProviderUnavailable

    real = datasets.generate_dialogue
    calls = {"n": 0}

    def flaky(*args, **kwargs):
        calls["n"] += 1
        if calls["n"] == 3:
            raise ProviderUnavailable("mid-run failure")
        return real(*args, **kwargs)

    monkeypatch.setattr(datasets, "generate_dialogue", flaky)
    with pytest.raises(GenerationInterrupted, match="after 2 of 5") as exc_info:
        generate_records(profile, 5, builtin_provider, 42)
    err = exc_info.value
    assert len(err.records) == 2
    assert isinstance(err.cause, ProviderUnavailable)
    # the completed prefix matches an uninterrupted run
    clean = generate_records(profile, 5, builtin_provider, 42)
    assert [r.to_dict() for r in err.records] == [r.to_dict() for r in clean[:2]]

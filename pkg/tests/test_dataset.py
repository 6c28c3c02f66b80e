"""Corpus culling, splitting, and training-record synthesis."""

import json
import logging

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import plcgen.dataset_tools as dt
from plcgen.dataset_tools import (
    DatasetError,
    DatasetRecord,
    SplitManifest,
    cull,
    derive,
    export_finetune,
    make_completion,
    make_fixing,
    make_generation,
    split,
    statement_boundaries,
)
from plcgen.st.checker import check

from conftest import CORPUS_DIR, GOLDEN_DIR

VALID_DIR = CORPUS_DIR / "valid"
BROKEN_DIR = CORPUS_DIR / "broken"

TINY = """\
PROGRAM Tiny
VAR
  x : INT;
END_VAR
x := 1;
x := 2;
x := 3;
x := 4;
x := 5;
END_PROGRAM
"""


# -- cull ----------------------------------------------------------------------------


def test_cull_separates_broken_from_valid(tmp_path):
    mixed = tmp_path / "mixed"
    mixed.mkdir()
    valid_names = sorted(p.name for p in VALID_DIR.glob("*.st"))[:4]
    broken_names = sorted(p.name for p in BROKEN_DIR.glob("*.st"))[:2]
    for name in valid_names:
        (mixed / f"ok_{name}").write_text((VALID_DIR / name).read_text())
    for name in broken_names:
        (mixed / f"bad_{name}").write_text((BROKEN_DIR / name).read_text())
    kept, rejected = cull(mixed)
    assert sorted(kept) == sorted(f"ok_{n}"[:-3] for n in valid_names)
    assert sorted(r[0] for r in rejected) == sorted(f"bad_{n}"[:-3] for n in broken_names)
    for _, diagnostic in rejected:
        assert diagnostic.startswith("E")
        assert "at line" in diagnostic


def test_cull_missing_directory():
    with pytest.raises(DatasetError):
        cull("/nonexistent/corpus/path")


def test_cull_empty_directory_warns(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        kept, rejected = cull(tmp_path)
    assert kept == [] and rejected == []
    assert any("no .st files" in r.message for r in caplog.records)


def test_cull_keeps_whole_bundled_corpus():
    kept, rejected = cull(VALID_DIR)
    assert len(kept) == len(list(VALID_DIR.glob("*.st")))
    assert rejected == []


def test_cull_rejects_whole_broken_corpus():
    kept, rejected = cull(BROKEN_DIR)
    assert kept == []
    assert len(rejected) == len(list(BROKEN_DIR.glob("*.st")))


# -- split ---------------------------------------------------------------------------


def test_split_is_deterministic():
    ids = [f"file_{i:03d}" for i in range(20)]
    a = split(ids, 0.9, 42)
    b = split(list(reversed(ids)), 0.9, 42)
    assert a == b


def test_split_seed_changes_assignment():
    ids = [f"file_{i:03d}" for i in range(20)]
    assert split(ids, 0.9, 1).test_ids != split(ids, 0.9, 2).test_ids


def test_split_sides_are_disjoint_and_complete():
    ids = [f"f{i}" for i in range(11)]
    manifest = split(ids, 0.7, 9)
    assert set(manifest.train_ids) | set(manifest.test_ids) == set(ids)
    assert set(manifest.train_ids) & set(manifest.test_ids) == set()
    assert manifest.counts == {"train": 8, "test": 3}


def test_split_arithmetic_and_override():
    ids = [f"s{i:04d}" for i in range(636)]
    computed = split(ids, 0.95, 42)
    assert computed.counts == {"train": 604, "test": 32}
    published = split(ids, 0.95, 42, test_count=40)
    assert published.counts == {"train": 596, "test": 40}


def test_split_minimum_test_side():
    manifest = split(["a", "b"], 0.95, 1)
    assert manifest.counts == {"train": 1, "test": 1}


def test_split_input_validation():
    with pytest.raises(DatasetError):
        split(["only"], 0.9, 1)
    with pytest.raises(DatasetError):
        split(["a", "b"], 1.0, 1)
    with pytest.raises(DatasetError):
        split(["a", "a", "b"], 0.5, 1)
    with pytest.raises(DatasetError):
        split(["a", "b", "c"], 0.5, 1, test_count=3)


def test_manifest_round_trip(tmp_path):
    manifest = split([f"f{i}" for i in range(10)], 0.8, 5, corpus_id="unit")
    path = tmp_path / "manifest.json"
    manifest.save(path)
    assert SplitManifest.load(path) == manifest
    data = json.loads(path.read_text())
    assert data["finetune"] == {"rank": 64, "alpha": 128, "batch_size": 256, "epochs": 5}


def test_manifest_rejects_overlap():
    with pytest.raises(DatasetError):
        SplitManifest("c", 1, 0.9, ("a", "b"), ("b",)).validate()


def test_manifest_rejects_count_mismatch():
    manifest = split(["a", "b", "c"], 0.5, 1)
    data = manifest.to_dict()
    data["counts"]["train"] += 1
    with pytest.raises(DatasetError):
        SplitManifest.from_dict(data)


# -- completion ------------------------------------------------------------------------


def test_statement_boundaries_land_after_line_breaks():
    bounds = statement_boundaries(TINY)
    assert len(bounds) == 6  # declaration + five assignments
    for offset in bounds:
        assert TINY.encode()[:offset].endswith(b"\n")


def test_completion_reconstructs_every_corpus_file(valid_path):
    text = valid_path.read_text()
    record = make_completion(valid_path.stem, text, 42)
    if record is None:
        assert len(statement_boundaries(text)) < 5
        return
    assert record.input_text + record.target_text == text
    assert record.kind == "completion"
    assert record.seed == 42


def test_completion_cut_respects_the_window():
    bounds = statement_boundaries(TINY)
    n = len(bounds)
    for seed in range(50):
        record = make_completion("tiny", TINY, seed)
        cut_statements = record.input_text.count(";")
        assert (n + 4) // 5 <= cut_statements <= (4 * n) // 5


def test_completion_skips_short_files():
    short = "PROGRAM P\nVAR\n  x : INT;\nEND_VAR\nx := 1;\nEND_PROGRAM\n"
    assert len(statement_boundaries(short)) < 5
    assert make_completion("short", short, 42) is None


def test_completion_needs_a_clean_source():
    with pytest.raises(DatasetError):
        make_completion("bad", "PROGRAM P x := END_PROGRAM", 42)


def test_completion_is_seed_stable_and_seed_sensitive():
    texts = {p.stem: p.read_text() for p in sorted(VALID_DIR.glob("*.st"))}
    first = {s: make_completion(s, t, 42) for s, t in texts.items()}
    second = {s: make_completion(s, t, 42) for s, t in texts.items()}
    assert first == second
    third = {s: make_completion(s, t, 7) for s, t in texts.items()}
    assert any(
        first[s] is not None and third[s] is not None and first[s] != third[s]
        for s in texts
    )


# -- fixing ----------------------------------------------------------------------------


def test_fixing_breaks_every_corpus_file(valid_path):
    text = valid_path.read_text()
    record = make_fixing(valid_path.stem, text, 42)
    assert record is not None
    assert not check(record.input_text).passed
    assert check(record.target_text).passed
    assert record.target_text == text
    assert len(record.mutation_log) >= 1
    # the log replays: every removed line was present in the original
    for _, removed in record.mutation_log:
        assert removed.strip() == "" or removed in text


def test_fixing_is_deterministic():
    text = (VALID_DIR / "fb_blink.st").read_text()
    assert make_fixing("fb_blink", text, 42) == make_fixing("fb_blink", text, 42)


def test_fixing_single_mutation_case():
    # removing the only declaration leaves an undefined name straight away
    source = "PROGRAM One\nVAR\n  x : INT;\nEND_VAR\nx := 1;\nEND_PROGRAM\n"
    for seed in range(10):
        record = make_fixing("one", source, seed)
        assert record is not None
        if len(record.mutation_log) == 1:
            break
    else:
        pytest.fail("no seed produced a single-removal break")


def test_fixing_cap_reports_not_fatal(monkeypatch):
    monkeypatch.setattr(dt, "MAX_FIXING_REMOVALS", 1)
    body = "\n".join(f"x := {i};" for i in range(60))
    bulk = f"PROGRAM Bulk\nVAR\n  x : INT;\nEND_VAR\n{body}\nEND_PROGRAM\n"
    # seed 0 removes a plain assignment first, which still compiles
    assert make_fixing("bulk", bulk, 0) is None


def test_fixing_never_removes_comment_only_lines():
    source = (
        "PROGRAM Commented\n"
        "(* header comment line *)\n"
        "VAR\n"
        "  x : INT;\n"
        "END_VAR\n"
        "(* body comment *)\n"
        "x := 1;\n"
        "END_PROGRAM\n"
    )
    for seed in range(25):
        record = make_fixing("commented", source, seed)
        assert record is not None
        for _, removed in record.mutation_log:
            assert "comment" not in removed


def test_fixing_needs_a_clean_source():
    with pytest.raises(DatasetError):
        make_fixing("bad", "PROGRAM P x := END_PROGRAM", 42)


# -- generation --------------------------------------------------------------------------


def test_generation_record_wraps_the_file():
    record = make_generation("tiny", TINY)
    assert record.kind == "generation"
    assert record.input_text == TINY
    assert record.target_text == ""


def test_generation_needs_a_clean_source():
    with pytest.raises(DatasetError):
        make_generation("bad", "FUNCTION END_FUNCTION")


# -- derive ------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def derived(tmp_path_factory):
    out = tmp_path_factory.mktemp("derived")
    return derive(VALID_DIR, out, 42), out


def test_derive_covers_all_kinds(derived):
    result, _ = derived
    kept = len(list(VALID_DIR.glob("*.st")))
    assert len(result.by_kind("generation")) == kept
    assert len(result.by_kind("fixing")) == kept
    skipped_completion = [s for s in result.skipped if s[1] == "completion"]
    assert len(result.by_kind("completion")) == kept - len(skipped_completion)


def test_derive_records_satisfy_kind_invariants(derived):
    result, _ = derived
    sources = {p.stem: p.read_text() for p in VALID_DIR.glob("*.st")}
    for record in result.records:
        if record.kind == "generation":
            assert check(record.input_text).passed
        elif record.kind == "completion":
            assert record.input_text + record.target_text == sources[record.source_id]
        else:
            assert not check(record.input_text).passed
            assert check(record.target_text).passed


def test_derive_writes_the_layout(derived):
    result, out = derived
    assert (out / "manifest.json").is_file()
    for record in result.records:
        assert (out / "records" / record.kind / f"{record.record_id}.json").is_file()
    assert (out / "train_completion.jsonl").is_file()
    assert (out / "train_fixing.jsonl").is_file()


def test_derive_train_exports_have_no_test_leakage(derived):
    result, out = derived
    test_side = set(result.manifest.test_ids)
    by_id = {r.record_id: r for r in result.records}
    for name in ("train_completion.jsonl", "train_fixing.jsonl"):
        lines = (out / name).read_text().splitlines()[1:]  # skip header
        kind = name.removeprefix("train_").removesuffix(".jsonl")
        train_records = [
            r for r in result.by_kind(kind) if r.source_id not in test_side
        ]
        assert len(lines) == len(train_records)
        for test_id in test_side:
            source = (VALID_DIR / f"{test_id}.st").read_text()
            completion_texts = [json.loads(l)["completion"] for l in lines]
            assert source not in completion_texts
    assert by_id  # sanity: records indexed


def test_derive_is_byte_identical_across_runs(tmp_path):
    derive(VALID_DIR, tmp_path / "a", 42)
    derive(VALID_DIR, tmp_path / "b", 42)
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_derive_seed_changes_at_least_one_record(tmp_path):
    a = derive(VALID_DIR, tmp_path / "a", 42)
    b = derive(VALID_DIR, tmp_path / "c", 43)
    assert any(
        ra.to_dict() != rb.to_dict() for ra, rb in zip(a.records, b.records)
    )


# -- export ------------------------------------------------------------------------------


def golden_manifest():
    return SplitManifest(
        corpus_id="golden-trio", seed=42, ratio=0.95,
        train_ids=("fb_alarm_latch", "prog_traffic_light"),
        test_ids=("fb_tank_level",),
    )


def test_export_fixing_prompt_contains_the_diagnostic(tmp_path):
    text = (VALID_DIR / "fb_blink.st").read_text()
    record = make_fixing("fb_blink", text, 42)
    out = export_finetune([record], golden_manifest(), tmp_path / "x.jsonl")
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    header = json.loads(lines[0])["header"]
    assert header["kind"] == "fixing"
    assert header["finetune"]["rank"] == 64
    pair = json.loads(lines[1])
    assert "ERROR>" in pair["prompt"]
    assert record.input_text in pair["prompt"]
    assert pair["completion"] == text


def test_export_rejects_empty_mixed_and_generation(tmp_path):
    completion = make_completion("tiny", TINY, 42)
    generation = make_generation("tiny", TINY)
    with pytest.raises(DatasetError):
        export_finetune([], golden_manifest(), tmp_path / "a.jsonl")
    with pytest.raises(DatasetError):
        export_finetune([completion, generation], golden_manifest(), tmp_path / "b.jsonl")
    with pytest.raises(DatasetError):
        export_finetune([generation], golden_manifest(), tmp_path / "c.jsonl")


# -- goldens -----------------------------------------------------------------------------


GOLDEN_FILES = ("fb_alarm_latch", "prog_traffic_light", "fb_tank_level")


@pytest.mark.parametrize("stem", GOLDEN_FILES)
@pytest.mark.parametrize("kind", ["completion", "fixing"])
def test_golden_records_match(stem, kind):
    text = (VALID_DIR / f"{stem}.st").read_text()
    maker = make_completion if kind == "completion" else make_fixing
    record = maker(stem, text, 42)
    regenerated = json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n"
    golden = (GOLDEN_DIR / "dataset" / f"{stem}-{kind}.json").read_text()
    assert regenerated == golden


def test_golden_export_matches(tmp_path):
    records = []
    for stem in GOLDEN_FILES[:2]:
        text = (VALID_DIR / f"{stem}.st").read_text()
        records.append(make_fixing(stem, text, 42))
    out = export_finetune(records, golden_manifest(), tmp_path / "train_fixing.jsonl")
    assert out.read_bytes() == (GOLDEN_DIR / "dataset" / "train_fixing.jsonl").read_bytes()


# -- record serialization ------------------------------------------------------------------


def test_record_round_trip():
    record = make_fixing("tiny", TINY, 42)
    assert DatasetRecord.from_dict(record.to_dict()) == record


def test_record_rejects_unknown_kind_and_fields():
    with pytest.raises(DatasetError):
        DatasetRecord("id", "poetry", "s", "text").validate()
    with pytest.raises(DatasetError):
        DatasetRecord.from_dict({"record_id": "x", "kind": "generation", "extra": 1})


@given(st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_completion_reconstruction_for_any_seed(seed):
    record = make_completion("tiny", TINY, seed)
    assert record is not None
    assert record.input_text + record.target_text == TINY

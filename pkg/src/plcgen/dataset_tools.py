"""Corpus curation and training-data synthesis.

From a directory of Structured Text files this module keeps what compiles,
splits it, and derives three record kinds: whole files (generation),
truncated-prefix pairs (completion), and deliberately broken files paired
with their originals (fixing). Every derivation is a pure function of
(file, seed), so reruns are byte-identical.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from hashlib import sha256
from pathlib import Path
from typing import Mapping, Sequence

from .prompting import render_fix_prompt
from .st.checker import check
from .st.diagnostics import format_diagnostic
from .st.lexer import tokenize
from .st.tokens import KIND_COMMENT, KIND_PUNCTUATION

log = logging.getLogger(__name__)

RECORD_KINDS = ("generation", "completion", "fixing")

# carried in the manifest so downstream training jobs record their settings
FINETUNE_DEFAULTS = {"rank": 64, "alpha": 128, "batch_size": 256, "epochs": 5}

MAX_FIXING_REMOVALS = 50
MIN_COMPLETION_STATEMENTS = 5

COMPLETION_INSTRUCTION = (
    "Continue this IEC 61131-3 Structured Text file. Reply with only the "
    "code that completes it, nothing else."
)


class DatasetError(Exception):
    """Bad inputs to a dataset operation."""


@dataclass(frozen=True)
class DatasetRecord:
    record_id: str
    kind: str
    source_id: str
    input_text: str
    target_text: str = ""
    mutation_log: tuple[tuple[int, str], ...] = ()
    seed: int = 0

    def validate(self) -> None:
        if self.kind not in RECORD_KINDS:
            raise DatasetError(f"unknown record kind: {self.kind!r}")
        if self.kind == "completion":
            # the defining reconstruction property
            if not self.target_text:
                raise DatasetError(f"completion record {self.record_id} has no target")
        if self.kind == "fixing" and not self.mutation_log:
            raise DatasetError(f"fixing record {self.record_id} has an empty mutation log")

    def to_dict(self) -> dict:
        return {
            "record_id": self.record_id,
            "kind": self.kind,
            "source_id": self.source_id,
            "input_text": self.input_text,
            "target_text": self.target_text,
            "mutation_log": [[line, text] for line, text in self.mutation_log],
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "DatasetRecord":
        known = {
            "record_id", "kind", "source_id", "input_text", "target_text",
            "mutation_log", "seed",
        }
        unknown = set(data) - known
        if unknown:
            raise DatasetError(f"unknown record fields: {sorted(unknown)}")
        record = cls(
            record_id=data["record_id"],
            kind=data["kind"],
            source_id=data.get("source_id", ""),
            input_text=data.get("input_text", ""),
            target_text=data.get("target_text", ""),
            mutation_log=tuple((int(l), str(t)) for l, t in data.get("mutation_log", ())),
            seed=int(data.get("seed", 0)),
        )
        record.validate()
        return record


@dataclass(frozen=True)
class SplitManifest:
    corpus_id: str
    seed: int
    ratio: float
    train_ids: tuple[str, ...]
    test_ids: tuple[str, ...]
    finetune: dict = field(default_factory=lambda: dict(FINETUNE_DEFAULTS))

    @property
    def counts(self) -> dict:
        return {"train": len(self.train_ids), "test": len(self.test_ids)}

    def validate(self) -> None:
        overlap = set(self.train_ids) & set(self.test_ids)
        if overlap:
            raise DatasetError(f"train and test overlap: {sorted(overlap)}")
        if not self.train_ids or not self.test_ids:
            raise DatasetError("both split sides must be nonempty")

    def to_dict(self) -> dict:
        return {
            "corpus_id": self.corpus_id,
            "seed": self.seed,
            "ratio": self.ratio,
            "train_ids": list(self.train_ids),
            "test_ids": list(self.test_ids),
            "counts": self.counts,
            "finetune": dict(self.finetune),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SplitManifest":
        manifest = cls(
            corpus_id=data.get("corpus_id", ""),
            seed=int(data.get("seed", 0)),
            ratio=float(data.get("ratio", 0.0)),
            train_ids=tuple(data.get("train_ids", ())),
            test_ids=tuple(data.get("test_ids", ())),
            finetune=dict(data.get("finetune", FINETUNE_DEFAULTS)),
        )
        manifest.validate()
        counts = data.get("counts")
        if counts is not None and dict(counts) != manifest.counts:
            raise DatasetError("manifest counts do not match its id lists")
        return manifest

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "SplitManifest":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# -- culling and splitting -----------------------------------------------------------


def cull(corpus_dir: str | Path) -> tuple[list[str], list[tuple[str, str]]]:
    """Keep the files that pass the checker.

    Returns (kept file ids, rejections); a rejection pairs the file id with
    its first error, rendered. File ids are the stem of the .st file name.
    """
    corpus = Path(corpus_dir)
    if not corpus.is_dir():
        raise DatasetError(f"corpus directory not found: {corpus}")
    files = sorted(corpus.glob("*.st"))
    if not files:
        log.warning("corpus directory %s contains no .st files", corpus)
    kept: list[str] = []
    rejected: list[tuple[str, str]] = []
    for path in files:
        text = path.read_text(encoding="utf-8")
        report = check(text, file_id=path.name)
        if report.passed:
            kept.append(path.stem)
        else:
            errors = [d for d in report.diagnostics if d.severity == "error"]
            rejected.append((path.stem, format_diagnostic(errors[0])))
    return kept, rejected


def split(
    ids: Sequence[str],
    ratio: float,
    seed: int,
    *,
    test_count: int | None = None,
    corpus_id: str = "corpus",
) -> SplitManifest:
    """Deterministic seeded split; test side is round(n*(1-ratio)), at least 1.

    test_count overrides the computed size for corpora whose published split
    does not match their own arithmetic.
    """
    if len(ids) < 2:
        raise DatasetError("need at least two files to split")
    if len(set(ids)) != len(ids):
        raise DatasetError("duplicate file ids in split input")
    if not 0.0 < ratio < 1.0:
        raise DatasetError(f"ratio must be within (0, 1), got {ratio}")
    n = len(ids)
    if test_count is None:
        test_count = max(1, int(n * (1.0 - ratio) + 0.5))  # round half up
        test_count = min(test_count, n - 1)
    elif not 1 <= test_count <= n - 1:
        raise DatasetError(f"test_count must be within [1, {n - 1}], got {test_count}")
    shuffled = sorted(ids)
    random.Random(seed).shuffle(shuffled)
    manifest = SplitManifest(
        corpus_id=corpus_id,
        seed=seed,
        ratio=ratio,
        train_ids=tuple(sorted(shuffled[test_count:])),
        test_ids=tuple(sorted(shuffled[:test_count])),
    )
    manifest.validate()
    return manifest


# -- record synthesis ----------------------------------------------------------------


def _derive_rng(seed: int, file_id: str, kind: str) -> random.Random:
    digest = sha256(f"{seed}|{file_id}|{kind}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))


def statement_boundaries(text: str) -> list[int]:
    """Byte offsets just past each statement terminator.

    A boundary sits after the ';', any trailing spaces or tabs, and one line
    break, so a prefix cut there ends cleanly.
    """
    data = text.encode("utf-8")
    tokens, _ = tokenize(text)
    boundaries = []
    for token in tokens:
        if token.kind == KIND_PUNCTUATION and token.lexeme == ";":
            i = token.span.offset + token.span.length
            while i < len(data) and data[i : i + 1] in (b" ", b"\t", b"\r"):
                i += 1
            if i < len(data) and data[i : i + 1] == b"\n":
                i += 1
            boundaries.append(i)
    return boundaries


def make_completion(file_id: str, text: str, seed: int) -> DatasetRecord | None:
    """Truncate at a seeded statement boundary in the middle 20%-80% band.

    Returns None for files too short to cut meaningfully.
    """
    report = check(text, file_id=file_id)
    if not report.passed:
        raise DatasetError(f"completion source {file_id} does not pass the checker")
    boundaries = statement_boundaries(text)
    n = len(boundaries)
    if n < MIN_COMPLETION_STATEMENTS:
        return None
    low = (n + 4) // 5  # ceil(0.2 n)
    high = (4 * n) // 5  # floor(0.8 n)
    rng = _derive_rng(seed, file_id, "completion")
    cut = boundaries[rng.randint(low, high) - 1]
    data = text.encode("utf-8")
    record = DatasetRecord(
        record_id=f"{file_id}-completion",
        kind="completion",
        source_id=file_id,
        input_text=data[:cut].decode("utf-8"),
        target_text=data[cut:].decode("utf-8"),
        seed=seed,
    )
    if record.input_text + record.target_text != text:
        raise DatasetError(f"truncation of {file_id} does not reconstruct the file")
    return record


def _comment_ranges(text: str) -> list[tuple[int, int]]:
    tokens, _ = tokenize(text)
    return [
        (t.span.offset, t.span.offset + t.span.length)
        for t in tokens
        if t.kind == KIND_COMMENT
    ]


def _removable_lines(text: str) -> list[int]:
    """Indices of lines carrying code: not blank, not comment-only."""
    ranges = _comment_ranges(text)
    data = text.encode("utf-8")
    removable = []
    offset = 0
    for index, line in enumerate(text.splitlines(keepends=True)):
        raw = line.encode("utf-8")
        for j, byte in enumerate(raw):
            if chr(byte).isspace():
                continue
            position = offset + j
            if not any(start <= position < end for start, end in ranges):
                removable.append(index)
                break
        offset += len(raw)
    assert offset == len(data)
    return removable


def make_fixing(file_id: str, text: str, seed: int) -> DatasetRecord | None:
    """Delete seeded random code lines until the file stops compiling.

    Returns None if the cap is reached without breaking the file.
    """
    report = check(text, file_id=file_id)
    if not report.passed:
        raise DatasetError(f"fixing source {file_id} does not pass the checker")
    rng = _derive_rng(seed, file_id, "fixing")
    current = text
    mutations: list[tuple[int, str]] = []
    for _ in range(MAX_FIXING_REMOVALS):
        candidates = _removable_lines(current)
        if not candidates:
            return None
        index = rng.choice(candidates)
        lines = current.splitlines(keepends=True)
        removed = lines.pop(index)
        mutations.append((index + 1, removed.rstrip("\n")))
        current = "".join(lines)
        if not check(current, file_id=file_id).passed:
            return DatasetRecord(
                record_id=f"{file_id}-fixing",
                kind="fixing",
                source_id=file_id,
                input_text=current,
                target_text=text,
                mutation_log=tuple(mutations),
                seed=seed,
            )
    return None


def make_generation(file_id: str, text: str) -> DatasetRecord:
    report = check(text, file_id=file_id)
    if not report.passed:
        raise DatasetError(f"generation source {file_id} does not pass the checker")
    return DatasetRecord(
        record_id=f"{file_id}-generation",
        kind="generation",
        source_id=file_id,
        input_text=text,
    )


# -- full derivation -----------------------------------------------------------------


@dataclass
class DeriveResult:
    manifest: SplitManifest
    records: list[DatasetRecord]
    skipped: list[tuple[str, str, str]]  # (file id, kind, reason)
    rejections: list[tuple[str, str]]

    def by_kind(self, kind: str) -> list[DatasetRecord]:
        return [r for r in self.records if r.kind == kind]

    def for_split(self, manifest_side: Sequence[str]) -> list[DatasetRecord]:
        side = set(manifest_side)
        return [r for r in self.records if r.source_id in side]


def derive(
    corpus_dir: str | Path,
    out_dir: str | Path,
    seed: int,
    *,
    ratio: float = 0.95,
    test_count: int | None = None,
) -> DeriveResult:
    """cull -> split -> synthesize all three record kinds -> write the dataset.

    Train-side exports are written per kind; test-side records stay as
    individual files only, so nothing from the test split can reach a
    training file.
    """
    corpus = Path(corpus_dir)
    kept, rejections = cull(corpus)
    if len(kept) < 2:
        raise DatasetError(f"corpus {corpus} has fewer than two compilable files")
    manifest = split(kept, ratio, seed, test_count=test_count, corpus_id=corpus.name)

    sources = {stem: (corpus / f"{stem}.st").read_text(encoding="utf-8") for stem in kept}
    records: list[DatasetRecord] = []
    skipped: list[tuple[str, str, str]] = []
    for stem in kept:
        text = sources[stem]
        records.append(make_generation(stem, text))
        completion = make_completion(stem, text, seed)
        if completion is None:
            skipped.append((stem, "completion", "fewer than 5 statements"))
        else:
            records.append(completion)
        fixing = make_fixing(stem, text, seed)
        if fixing is None:
            skipped.append((stem, "fixing", "still compiles after 50 removals"))
        else:
            records.append(fixing)

    for record in records:
        record.validate()

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest.save(out / "manifest.json")
    for record in records:
        kind_dir = out / "records" / record.kind
        kind_dir.mkdir(parents=True, exist_ok=True)
        (kind_dir / f"{record.record_id}.json").write_text(
            json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    result = DeriveResult(manifest, records, skipped, rejections)
    train = set(manifest.train_ids)
    for kind in ("completion", "fixing"):
        exportable = [r for r in result.by_kind(kind) if r.source_id in train]
        if exportable:
            export_finetune(exportable, manifest, out / f"train_{kind}.jsonl")
    return result


# -- fine-tuning export --------------------------------------------------------------


def _finetune_prompt(record: DatasetRecord) -> str:
    if record.kind == "completion":
        return f"{COMPLETION_INSTRUCTION}\n\n{record.input_text}"
    # fixing: mirror the prompt the repair loop would send for this file
    report = check(record.input_text, file_id=record.source_id)
    if report.passed:
        raise DatasetError(
            f"fixing record {record.record_id} unexpectedly passes the checker"
        )
    exchanges = render_fix_prompt(record.input_text, report.diagnostics)
    return "\n\n".join(e.content for e in exchanges)


def export_finetune(
    records: Sequence[DatasetRecord],
    manifest: SplitManifest,
    out_path: str | Path,
) -> Path:
    """Write newline-delimited {prompt, completion} pairs with a header record."""
    if not records:
        raise DatasetError("nothing to export")
    kinds = {r.kind for r in records}
    if len(kinds) > 1:
        raise DatasetError(f"export needs a single record kind, got {sorted(kinds)}")
    kind = kinds.pop()
    if kind == "generation":
        raise DatasetError("generation records have no completion target to export")
    lines = [
        json.dumps(
            {
                "header": {
                    "corpus_id": manifest.corpus_id,
                    "seed": manifest.seed,
                    "kind": kind,
                    "counts": manifest.counts,
                    "finetune": dict(manifest.finetune),
                }
            },
            ensure_ascii=False,
            sort_keys=True,
        )
    ]
    for record in records:
        lines.append(
            json.dumps(
                {"prompt": _finetune_prompt(record), "completion": record.target_text},
                ensure_ascii=False,
                sort_keys=True,
            )
        )
    out = Path(out_path)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out

"""Evaluation measures: pass@k, compiler-error rates, and configuration comparison.

The two numbers reported per configuration are deliberately kept apart. A
setup can raise its pass rate and its mean error count at the same time
(more ambitious generations fail louder), so nothing here collapses them
into a single score.
"""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

DEFAULT_KS = (1,)


class MetricsError(Exception):
    """Invalid metric arguments or malformed report data."""


def pass_at_k(n: int, c: int, k: int) -> float:
    """Probability that at least one of k samples drawn from n is among the c passing.

    Computed as 1 - C(n-c, k)/C(n, k) using an exact rational product, so the
    result is the correctly rounded float and large n cannot overflow.
    """
    if not 0 <= c <= n:
        raise MetricsError(f"need 0 <= c <= n, got c={c}, n={n}")
    if not 1 <= k <= n:
        raise MetricsError(f"need 1 <= k <= n, got k={k}, n={n}")
    if n - c < k:
        return 1.0  # every k-subset must contain a passing sample
    numerator = 1
    denominator = 1
    for i in range(k):
        numerator *= n - c - i
        denominator *= n - i
    return float(1 - Fraction(numerator, denominator))


def error_rate(reports: Sequence) -> float:
    """Mean number of errors per checked file."""
    if not reports:
        raise MetricsError("error rate of an empty report list is undefined")
    return sum(r.error_count for r in reports) / len(reports)


@dataclass(frozen=True)
class RunMetrics:
    """Aggregated outcome of one pipeline configuration over a set of tasks."""

    label: str
    samples: tuple[tuple[int, int], ...]  # per task: (generated n_i, passing c_i)
    pass_at: dict[int, float] = field(default_factory=dict)
    total_errors: int = 0
    mean_errors: float = 0.0
    stage_histogram: dict[str, int] = field(default_factory=dict)

    @property
    def tasks(self) -> int:
        return len(self.samples)

    def validate(self) -> None:
        if not self.label:
            raise MetricsError("metrics need a configuration label")
        for n, c in self.samples:
            if not 0 <= c <= n:
                raise MetricsError(f"sample counts out of range: n={n}, c={c}")
        for k, rate in self.pass_at.items():
            if not 0.0 <= rate <= 1.0:
                raise MetricsError(f"pass@{k} out of [0,1]: {rate}")

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "tasks": self.tasks,
            "samples": [list(pair) for pair in self.samples],
            "pass_at": {str(k): v for k, v in self.pass_at.items()},
            "total_errors": self.total_errors,
            "mean_errors": self.mean_errors,
            "stage_histogram": dict(self.stage_histogram),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "RunMetrics":
        known = {
            "label", "tasks", "samples", "pass_at", "total_errors",
            "mean_errors", "stage_histogram",
        }
        unknown = set(data) - known
        if unknown:
            raise MetricsError(f"unknown metrics fields: {sorted(unknown)}")
        metrics = cls(
            label=data.get("label", ""),
            samples=tuple((int(n), int(c)) for n, c in data.get("samples", ())),
            pass_at={int(k): float(v) for k, v in data.get("pass_at", {}).items()},
            total_errors=int(data.get("total_errors", 0)),
            mean_errors=float(data.get("mean_errors", 0.0)),
            stage_histogram={str(k): int(v) for k, v in data.get("stage_histogram", {}).items()},
        )
        metrics.validate()
        if "tasks" in data and int(data["tasks"]) != metrics.tasks:
            raise MetricsError("task count does not match the sample list")
        return metrics


def aggregate_pass_at_k(samples: Iterable[tuple[int, int]], k: int) -> float:
    """Mean pass@k across tasks, the aggregate a benchmark reports."""
    values = [pass_at_k(n, c, k) for n, c in samples]
    if not values:
        raise MetricsError("cannot aggregate zero tasks")
    return sum(values) / len(values)


def aggregate_runs(label: str, runs: Sequence, ks: Sequence[int] = DEFAULT_KS) -> RunMetrics:
    """Fold finished pipeline runs into one RunMetrics row.

    Each run counts as one task with a single sample; the error statistics
    come from the first syntax check of each run (the raw generation, before
    any repair), so configurations are compared on what the model produced,
    not on how far the fix loop dragged it.
    """
    if not runs:
        raise MetricsError("cannot aggregate zero runs")
    samples = tuple((1, 1 if run.status == "accepted" else 0) for run in runs)
    first_checks = [run.checks[0] for run in runs if run.checks]
    total_errors = sum(r.error_count for r in first_checks)
    mean_errors = error_rate(first_checks) if first_checks else 0.0
    histogram: Counter[str] = Counter()
    for run in runs:
        histogram.update(record.stage for record in run.records)
    metrics = RunMetrics(
        label=label,
        samples=samples,
        pass_at={k: aggregate_pass_at_k(samples, k) for k in ks},
        total_errors=total_errors,
        mean_errors=mean_errors,
        stage_histogram=dict(sorted(histogram.items())),
    )
    metrics.validate()
    return metrics


# -- configuration comparison ------------------------------------------------------


def load_expert_scores(path: str | Path) -> dict[str, dict[str, float]]:
    """Score file: JSON mapping configuration label -> {criterion: score}.

    Survey numbers are imported, never computed; they ride along in report
    tables next to the measured columns.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise MetricsError(f"cannot read expert score file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise MetricsError("expert score file must be a JSON object keyed by label")
    scores: dict[str, dict[str, float]] = {}
    for label, criteria in data.items():
        if not isinstance(criteria, dict):
            raise MetricsError(f"scores for {label!r} must be an object of criteria")
        scores[str(label)] = {str(k): float(v) for k, v in criteria.items()}
    return scores


@dataclass(frozen=True)
class ComparisonReport:
    """Rows of RunMetrics lined up for side-by-side reading."""

    rows: tuple[RunMetrics, ...]
    expert_scores: dict[str, dict[str, float]] = field(default_factory=dict)

    def _ks(self) -> list[int]:
        ks: set[int] = set()
        for row in self.rows:
            ks.update(row.pass_at)
        return sorted(ks) or [1]

    def _criteria(self) -> list[str]:
        names: set[str] = set()
        for criteria in self.expert_scores.values():
            names.update(criteria)
        return sorted(names)

    def _cells(self) -> tuple[list[str], list[list[str]]]:
        ks = self._ks()
        criteria = self._criteria()
        header = ["label"] + [f"pass@{k}" for k in ks] + ["mean_errors"]
        header += [f"expert_{name}" for name in criteria]
        body = []
        for row in self.rows:
            cells = [row.label]
            cells += [_fmt(row.pass_at.get(k)) for k in ks]
            cells.append(_fmt(row.mean_errors))
            scores = self.expert_scores.get(row.label, {})
            cells += [_fmt(scores.get(name)) for name in criteria]
            body.append(cells)
        return header, body

    def text(self) -> str:
        header, body = self._cells()
        widths = [
            max(len(header[i]), *(len(r[i]) for r in body)) if body else len(header[i])
            for i in range(len(header))
        ]
        def line(cells):
            return "  ".join(cell.ljust(width) for cell, width in zip(cells, widths)).rstrip()
        rule = "  ".join("-" * width for width in widths)
        return "\n".join([line(header), rule] + [line(r) for r in body])

    def to_csv(self) -> str:
        header, body = self._cells()
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(body)
        return out.getvalue()

    def to_dict(self) -> dict:
        return {
            "rows": [row.to_dict() for row in self.rows],
            "expert_scores": self.expert_scores,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping) -> "ComparisonReport":
        rows = tuple(RunMetrics.from_dict(r) for r in data.get("rows", ()))
        scores = {
            str(label): {str(k): float(v) for k, v in criteria.items()}
            for label, criteria in data.get("expert_scores", {}).items()
        }
        return cls(rows=rows, expert_scores=scores)

    @classmethod
    def from_json(cls, text: str) -> "ComparisonReport":
        return cls.from_dict(json.loads(text))


def _fmt(value: float | None) -> str:
    # repr of a float is its shortest exact form, so CSV cells lose nothing
    return "" if value is None else repr(float(value))


def compare_configs(
    metrics: Sequence[RunMetrics],
    expert_scores: Mapping[str, Mapping[str, float]] | None = None,
) -> ComparisonReport:
    """Build a comparison across configurations; labels must be unique."""
    if not metrics:
        raise MetricsError("comparison needs at least one metrics row")
    seen: set[str] = set()
    for row in metrics:
        if row.label in seen:
            raise MetricsError(f"duplicate configuration label: {row.label!r}")
        seen.add(row.label)
    scores = {
        str(label): {str(k): float(v) for k, v in criteria.items()}
        for label, criteria in (expert_scores or {}).items()
    }
    return ComparisonReport(rows=tuple(metrics), expert_scores=scores)

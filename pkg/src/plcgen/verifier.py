"""Drive the nuXmv model checker and parse its verdicts.

The checker runs in batch mode on a model file written to a per-run temp
directory. Output parsing is a pure function over the captured text, so it is
fully testable from committed fixtures without the binary installed. A stub
backend with scripted verdicts exists for pipeline tests on machines without
nuXmv; it must be selected explicitly.

Classification is deliberately conservative: a report says ``proven`` only
when every declared property has an explicit "is true" line. Anything not
positively recognized becomes ``tool_error`` with the raw output preserved.
"""

from __future__ import annotations

import re
import shutil
import subprocess
import tempfile
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_TIMEOUT_S = 120.0

OVERALL_KINDS = ("proven", "refuted", "tool_error", "timeout")


class VerifierError(Exception):
    """Unrecoverable verifier problem that is not a tool verdict."""


class BinaryNotFoundError(VerifierError):
    """The model-checker executable is not on PATH; a configuration error."""


# -- SMV documents -------------------------------------------------------------------


@dataclass(frozen=True)
class SmvProperty:
    kind: str  # LTLSPEC | INVARSPEC
    text: str  # the property expression as written
    constraint: str | None = None  # NL sentence this property encodes, if annotated


@dataclass
class SmvDocument:
    text: str
    properties: list[SmvProperty] = field(default_factory=list)

    @classmethod
    def from_text(cls, smv_text: str) -> "SmvDocument":
        """Extract one-line LTLSPEC/INVARSPEC properties and their optional
        '-- constraint:' source sentences."""
        properties: list[SmvProperty] = []
        pending_constraint: str | None = None
        for line in smv_text.splitlines():
            stripped = line.strip()
            if stripped.startswith("-- constraint:"):
                pending_constraint = stripped[len("-- constraint:") :].strip()
                continue
            m = re.match(r"^(LTLSPEC|INVARSPEC)\b\s*(.*?);?\s*$", stripped)
            if m and m.group(2):
                properties.append(SmvProperty(m.group(1), m.group(2), pending_constraint))
            if stripped:
                pending_constraint = None
        return cls(smv_text, properties)

    def validate(self) -> None:
        if not self.properties:
            raise VerifierError("SMV document declares no LTLSPEC/INVARSPEC property")
        for prop in self.properties:
            if prop.text not in self.text:
                raise VerifierError(
                    f"property '{prop.text}' does not appear in the module text"
                )


# -- traces ---------------------------------------------------------------------------


@dataclass
class TraceState:
    step: int
    assignments: dict[str, str]
    loop_start: bool = False


@dataclass
class Trace:
    states: list[TraceState]

    def validate(self) -> None:
        if not self.states:
            raise VerifierError("empty counterexample trace")
        expected = 1
        for state in self.states:
            if state.step != expected:
                raise VerifierError(
                    f"trace steps must increase from 1; found step {state.step} "
                    f"where {expected} was expected"
                )
            expected += 1

    def to_dict(self) -> dict:
        return {
            "states": [
                {
                    "step": s.step,
                    "assignments": dict(s.assignments),
                    "loop_start": s.loop_start,
                }
                for s in self.states
            ]
        }


# -- reports --------------------------------------------------------------------------


@dataclass(frozen=True)
class PropertyVerdict:
    text: str  # the property as the tool printed it
    holds: bool


@dataclass
class VerificationReport:
    overall: str  # proven | refuted | tool_error | timeout
    verdicts: list[PropertyVerdict]
    counterexample: Trace | None
    raw_output: str
    wall_time_s: float
    failed_property: str | None = None
    artifacts_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "verdicts": [{"property": v.text, "holds": v.holds} for v in self.verdicts],
            "counterexample": self.counterexample.to_dict() if self.counterexample else None,
            "failed_property": self.failed_property,
            "raw_output": self.raw_output,
            "wall_time_s": self.wall_time_s,
            "artifacts_path": self.artifacts_path,
        }


# -- output parsing -------------------------------------------------------------------

_VERDICT = re.compile(r"^--\s+(?:specification|invariant)\s+(.+?)\s+is (true|false)\s*$")
_STATE = re.compile(r"^\s*->\s*State:\s*(\d+)\.(\d+)\s*<-\s*$")
_LOOP = re.compile(r"^\s*--\s*Loop starts here\s*$")
_ASSIGN = re.compile(r"^\s+([A-Za-z_][\w.\[\]$#-]*)\s*=\s*(.+?)\s*$")


def parse_nuxmv_output(raw: str, expected_properties: int | None = None) -> VerificationReport:
    """Pure classification of captured checker output.

    Never returns ``proven`` unless every expected property has an explicit
    "is true" line; anything unrecognized degrades to ``tool_error``.
    """
    verdicts: list[PropertyVerdict] = []
    failed_property: str | None = None
    trace_states: list[TraceState] = []
    collecting_trace = False
    pending_loop = False
    current: dict[str, str] | None = None

    def close_state():
        nonlocal current
        current = None

    for line in raw.splitlines():
        m = _VERDICT.match(line.strip())
        if m:
            close_state()
            collecting_trace = False
            holds = m.group(2) == "true"
            verdicts.append(PropertyVerdict(m.group(1), holds))
            if not holds and failed_property is None:
                failed_property = m.group(1)
                collecting_trace = True
            continue
        if collecting_trace:
            if _LOOP.match(line):
                pending_loop = True
                continue
            m = _STATE.match(line)
            if m:
                base = dict(trace_states[-1].assignments) if trace_states else {}
                state = TraceState(len(trace_states) + 1, base, pending_loop)
                trace_states.append(state)
                pending_loop = False
                current = state.assignments
                continue
            m = _ASSIGN.match(line)
            if m and current is not None:
                current[m.group(1)] = m.group(2)
                continue

    trace = Trace(trace_states) if trace_states else None

    if not verdicts:
        return VerificationReport(
            "tool_error", [], None, raw, 0.0,
        )
    if expected_properties is not None and len(verdicts) != expected_properties:
        return VerificationReport(
            "tool_error", verdicts, trace, raw, 0.0, failed_property=failed_property
        )
    if any(not v.holds for v in verdicts):
        if trace is None:
            # a refutation without a parseable trace cannot drive the fix loop
            return VerificationReport(
                "tool_error", verdicts, None, raw, 0.0, failed_property=failed_property
            )
        trace.validate()
        return VerificationReport(
            "refuted", verdicts, trace, raw, 0.0, failed_property=failed_property
        )
    return VerificationReport("proven", verdicts, None, raw, 0.0)


# -- counterexample rendering ---------------------------------------------------------


def summarize_counterexample(trace: Trace, max_steps: int = 20) -> str:
    """One line per step; full assignment on step 1, changed variables after."""
    if not trace.states:
        raise VerifierError("cannot summarize an empty trace")
    lines = []
    previous: dict[str, str] = {}
    for state in trace.states[:max_steps]:
        if state.step == 1:
            shown = state.assignments
        else:
            shown = {
                k: v for k, v in state.assignments.items() if previous.get(k) != v
            }
        rendered = ", ".join(f"{k} = {v}" for k, v in shown.items()) or "(no change)"
        marker = " (loop starts here)" if state.loop_start else ""
        lines.append(f"step {state.step}{marker}: {rendered}")
        previous = state.assignments
    remaining = len(trace.states) - max_steps
    if remaining > 0:
        lines.append(f"... ({remaining} more steps)")
    return "\n".join(lines)


# -- configuration and backends -------------------------------------------------------


@dataclass(frozen=True)
class VerifierConfig:
    kind: str = "nuxmv"  # nuxmv | stub
    binary: str = "nuXmv"
    timeout: float = DEFAULT_TIMEOUT_S
    use_bmc: bool = False
    bmc_depth: int = 20
    keep_artifacts: bool = False
    stub_verdicts: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "binary": self.binary,
            "timeout": self.timeout,
            "use_bmc": self.use_bmc,
            "bmc_depth": self.bmc_depth,
            "keep_artifacts": self.keep_artifacts,
            "stub_verdicts": list(self.stub_verdicts),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VerifierConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise VerifierError(f"unknown verifier config keys: {sorted(unknown)}")
        data = dict(data)
        if "stub_verdicts" in data:
            data["stub_verdicts"] = tuple(data["stub_verdicts"])
        return cls(**data)


class NuxmvVerifier:
    def __init__(self, config: VerifierConfig):
        self.config = config

    def verify(self, doc: SmvDocument) -> VerificationReport:
        doc.validate()
        binary = shutil.which(self.config.binary)
        if binary is None:
            raise BinaryNotFoundError(
                f"model checker '{self.config.binary}' not found on PATH; "
                "install nuXmv or select the stub verifier"
            )
        workdir = Path(tempfile.mkdtemp(prefix="plcgen-smv-"))
        model_path = workdir / "model.smv"
        model_path.write_text(doc.text, encoding="utf-8")
        cmd = [binary]
        if self.config.use_bmc:
            cmd += ["-bmc", "-bmc_length", str(self.config.bmc_depth)]
        cmd.append(str(model_path))
        started = time.perf_counter()
        try:
            proc = subprocess.run(
                cmd, capture_output=True, text=True, timeout=self.config.timeout
            )
        except subprocess.TimeoutExpired as exc:
            elapsed = time.perf_counter() - started
            raw = (exc.stdout or "") + "\n" + (exc.stderr or "")
            return VerificationReport(
                "timeout", [], None, raw, elapsed, artifacts_path=str(workdir)
            )
        elapsed = time.perf_counter() - started
        raw = proc.stdout + ("\n" + proc.stderr if proc.stderr else "")
        report = parse_nuxmv_output(raw, expected_properties=len(doc.properties))
        report.wall_time_s = elapsed
        if report.overall in ("proven", "refuted") and not self.config.keep_artifacts:
            shutil.rmtree(workdir, ignore_errors=True)
        else:
            report.artifacts_path = str(workdir)
        return report


class StubVerifier:
    """Scripted verdict sequence for offline pipeline tests; defaults to proving
    everything, and fabricates a two-step counterexample when told to refute."""

    def __init__(self, config: VerifierConfig):
        self.config = config
        self._script = deque(config.stub_verdicts)

    def verify(self, doc: SmvDocument) -> VerificationReport:
        doc.validate()
        outcome = self._script.popleft() if self._script else "proven"
        if outcome not in OVERALL_KINDS:
            raise VerifierError(f"unknown scripted verdict '{outcome}'")
        raw = f"stub verifier: scripted outcome {outcome}\n"
        if outcome == "proven":
            verdicts = [PropertyVerdict(p.text, True) for p in doc.properties]
            return VerificationReport("proven", verdicts, None, raw, 0.0)
        if outcome == "refuted":
            verdicts = [PropertyVerdict(p.text, i > 0) for i, p in enumerate(doc.properties)]
            trace = Trace(
                [
                    TraceState(1, {"state": "0", "fault": "FALSE"}),
                    TraceState(2, {"state": "1", "fault": "TRUE"}),
                ]
            )
            return VerificationReport(
                "refuted", verdicts, trace, raw, 0.0,
                failed_property=doc.properties[0].text,
            )
        return VerificationReport(outcome, [], None, raw, 0.0)


def make_verifier(config: VerifierConfig):
    if config.kind == "nuxmv":
        return NuxmvVerifier(config)
    if config.kind == "stub":
        return StubVerifier(config)
    raise VerifierError(f"unknown verifier kind '{config.kind}'")


def run_nuxmv(doc: SmvDocument, timeout: float = DEFAULT_TIMEOUT_S, **overrides) -> VerificationReport:
    """Convenience single-shot invocation of the real checker."""
    config = VerifierConfig(kind="nuxmv", timeout=timeout, **overrides)
    return NuxmvVerifier(config).verify(doc)

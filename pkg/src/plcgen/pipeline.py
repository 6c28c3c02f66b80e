"""Staged code generation with repair loops.

A run walks plan -> generate -> syntax loop -> model-checking loop -> accept,
feeding tool findings back to the model one stage at a time. Each stage has a
hard iteration budget so even an adversarial backend terminates, and every
model call leaves an auditable record.
"""

from __future__ import annotations

import json
import os
import shlex
import subprocess
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from hashlib import sha256
from pathlib import Path
from typing import Callable, Sequence

from . import DEFAULT_SEED
from .gateway import (
    BackendConfig,
    Gateway,
    GatewayError,
    GenerationRequest,
    NoCodeFoundError,
    extract_code_block,
    request_hash,
)
from .metrics import RunMetrics, aggregate_runs
from .prompting import (
    render_fix_prompt,
    render_generation_prompt,
    render_plan_prompt,
    render_smv_fix_prompt,
    render_smv_prompt,
    render_verification_fix_prompt,
)
from .st.checker import CheckReport, check
from .verifier import (
    SmvDocument,
    VerificationReport,
    VerifierConfig,
    VerifierError,
    make_verifier,
    summarize_counterexample,
)

STATUSES = (
    "accepted",
    "rejected_syntax_budget",
    "rejected_smv_budget",
    "rejected_verification_budget",
    "aborted_by_user",
    "backend_failure",
)

HUMAN_GATE_MODES = ("off", "confirm_each_stage")
GATE_DECISIONS = ("approve", "edit", "abort")

# a gate callback receives (stage name, artifact text) and answers
# (decision, possibly edited text)
GateFn = Callable[[str, str], tuple[str, str]]


class PipelineError(Exception):
    """Configuration or usage error in the orchestration layer."""


@dataclass(frozen=True)
class PipelineConfig:
    backend: BackendConfig
    verifier: VerifierConfig = VerifierConfig(kind="stub")
    shot_mode: str = "zero_shot"
    plan_enabled: bool = True
    verify_enabled: bool = True
    max_syntax_fix_iterations: int = 10
    max_smv_fix_iterations: int = 5
    max_verify_fix_iterations: int = 5
    human_gate: str = "off"
    output_dir: str = ""  # empty: keep the run in memory only
    seed: int = DEFAULT_SEED
    generate_temperature: float = 0.7
    fix_temperature: float = 0.2
    template_dir: str = ""  # empty: packaged prompt templates

    def validate(self) -> None:
        for name in (
            "max_syntax_fix_iterations",
            "max_smv_fix_iterations",
            "max_verify_fix_iterations",
        ):
            if getattr(self, name) < 1:
                raise PipelineError(f"{name} must be at least 1")
        if self.human_gate not in HUMAN_GATE_MODES:
            raise PipelineError(f"unknown human_gate mode: {self.human_gate!r}")
        if self.shot_mode not in ("zero_shot", "one_shot"):
            raise PipelineError(f"unknown shot_mode: {self.shot_mode!r}")
        for name in ("generate_temperature", "fix_temperature"):
            value = getattr(self, name)
            if not 0.0 <= value <= 2.0:
                raise PipelineError(f"{name} must be within [0, 2]")

    def to_dict(self) -> dict:
        return {
            "backend": self.backend.to_dict(),
            "verifier": self.verifier.to_dict(),
            "shot_mode": self.shot_mode,
            "plan_enabled": self.plan_enabled,
            "verify_enabled": self.verify_enabled,
            "max_syntax_fix_iterations": self.max_syntax_fix_iterations,
            "max_smv_fix_iterations": self.max_smv_fix_iterations,
            "max_verify_fix_iterations": self.max_verify_fix_iterations,
            "human_gate": self.human_gate,
            "output_dir": self.output_dir,
            "seed": self.seed,
            "generate_temperature": self.generate_temperature,
            "fix_temperature": self.fix_temperature,
            "template_dir": self.template_dir,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        if "backend" not in data:
            raise PipelineError("pipeline config needs a 'backend' section")
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(data) - known
        if unknown:
            raise PipelineError(f"unknown pipeline config fields: {sorted(unknown)}")
        values = dict(data)
        try:
            values["backend"] = BackendConfig.from_dict(values["backend"])
            if "verifier" in values:
                values["verifier"] = VerifierConfig.from_dict(values["verifier"])
        except (GatewayError, VerifierError) as exc:
            raise PipelineError(str(exc)) from exc
        config = cls(**values)
        config.validate()
        return config

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        """Read a JSON config file; relative paths inside it are taken
        relative to the file's own directory."""
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise PipelineError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise PipelineError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise PipelineError(f"config file {path} must hold a JSON object")
        base = path.resolve().parent
        backend = data.get("backend")
        if isinstance(backend, dict):
            for key in ("script_path", "cache_path", "record_to"):
                if backend.get(key):
                    backend[key] = _rebase(backend[key], base)
        for key in ("output_dir", "template_dir"):
            if data.get(key):
                data[key] = _rebase(data[key], base)
        return cls.from_dict(data)


def _rebase(value: str, base: Path) -> str:
    p = Path(value)
    return value if p.is_absolute() else str(base / p)


@dataclass(frozen=True)
class StageRecord:
    """Audit entry for one model call: what was asked, what came back, and
    what the tools said about it."""

    stage: str
    iteration: int
    prompt_hash: str
    response_hash: str
    summary: str
    duration_s: float

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "iteration": self.iteration,
            "prompt_hash": self.prompt_hash,
            "response_hash": self.response_hash,
            "summary": self.summary,
            "duration_s": self.duration_s,
        }


@dataclass
class PipelineRun:
    run_id: str
    spec_text: str
    seed: int
    status: str = ""
    records: list[StageRecord] = field(default_factory=list)
    checks: list[CheckReport] = field(default_factory=list)
    candidates: list[str] = field(default_factory=list)
    plan_text: str = ""
    code: str = ""
    smv_text: str = ""
    verification: VerificationReport | None = None
    error: str = ""
    wall_time_s: float = 0.0

    @property
    def accepted(self) -> bool:
        return self.status == "accepted"

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "status": self.status,
            "seed": self.seed,
            "spec": self.spec_text,
            "plan": self.plan_text,
            "code": self.code,
            "smv": self.smv_text,
            "verification": self.verification.to_dict() if self.verification else None,
            "error": self.error,
            "wall_time_s": self.wall_time_s,
            "candidate_count": len(self.candidates),
            "records": [r.to_dict() for r in self.records],
            "checks": [c.to_dict() for c in self.checks],
        }


class _Halt(Exception):
    """Internal control flow: stop the run with a final status."""

    def __init__(self, status: str):
        super().__init__(status)
        self.status = status


def _text_hash(text: str) -> str:
    return sha256(text.encode("utf-8")).hexdigest()


def default_run_id(spec: str, seed: int) -> str:
    """Content-derived id, so identical inputs land in the same run directory."""
    return "run-" + sha256(f"{seed}|{spec}".encode("utf-8")).hexdigest()[:12]


# -- human gate --------------------------------------------------------------------


def console_gate(stage: str, artifact: str) -> tuple[str, str]:
    """Interactive checkpoint: show the stage artifact, ask approve/edit/abort."""
    if not sys.stdin.isatty():
        raise PipelineError(
            "human gate needs an interactive terminal; set human_gate to 'off' "
            "for unattended runs"
        )
    print(f"--- {stage} ---")
    print(artifact)
    while True:
        answer = input(f"[{stage}] (a)pprove / (e)dit / a(b)ort? ").strip().lower()
        if answer in ("a", "approve"):
            return "approve", artifact
        if answer in ("b", "abort"):
            return "abort", artifact
        if answer in ("e", "edit"):
            edited = _edit_in_editor(artifact)
            if edited is not None:
                return "edit", edited
        print("please answer approve, edit, or abort")


def _edit_in_editor(text: str) -> str | None:
    editor = os.environ.get("EDITOR", "")
    if not editor:
        print("EDITOR is not set; cannot open an editor")
        return None
    fd, name = tempfile.mkstemp(prefix="plcgen-gate-", suffix=".txt")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        subprocess.run(shlex.split(editor) + [name], check=True)
        return Path(name).read_text(encoding="utf-8")
    except (OSError, subprocess.CalledProcessError) as exc:
        print(f"editor failed: {exc}")
        return None
    finally:
        Path(name).unlink(missing_ok=True)


# -- the run itself ----------------------------------------------------------------


class _Runner:
    def __init__(
        self,
        spec: str,
        config: PipelineConfig,
        gateway: Gateway | None,
        verifier,
        gate: GateFn | None,
        run_id: str | None,
    ):
        self.spec = spec
        self.config = config
        self.gateway = gateway if gateway is not None else Gateway(config.backend)
        if config.verify_enabled:
            self.verifier = verifier if verifier is not None else make_verifier(config.verifier)
        else:
            self.verifier = None
        if config.human_gate == "off":
            self.gate: GateFn | None = None
        else:
            self.gate = gate if gate is not None else console_gate
        rid = run_id or default_run_id(spec, config.seed)
        self.run = PipelineRun(run_id=rid, spec_text=spec, seed=config.seed)
        self.fix_calls = {"fix_syntax": 0, "fix_smv": 0, "fix_verification": 0}
        self.smv_generations = 0
        self._pending: tuple[str, int, str, str, float] | None = None
        self._template_dir = config.template_dir or None

    # -- bookkeeping ----------------------------------------------------------------

    def _call(self, stage: str, iteration: int, messages, temperature: float) -> str:
        request = GenerationRequest(
            messages=tuple(messages),
            model=self.config.backend.model,
            temperature=temperature,
            seed=self.config.seed,
        )
        started = time.monotonic()
        try:
            result = self.gateway.generate(request)
        except GatewayError as exc:
            # failed calls are audited too; there is just no response to hash
            self.run.records.append(
                StageRecord(
                    stage, iteration, request_hash(request), "",
                    f"error: {exc}", time.monotonic() - started,
                )
            )
            raise
        self._pending = (
            stage,
            iteration,
            request_hash(request),
            _text_hash(result.text),
            time.monotonic() - started,
        )
        return result.text

    def _annotate(self, summary: str) -> None:
        """Attach the tool verdict to the model call that produced the artifact.

        Checks triggered by operator edits have no pending call: nothing to do.
        """
        if self._pending is None:
            return
        stage, iteration, prompt_hash, response_hash, duration = self._pending
        self._pending = None
        self.run.records.append(
            StageRecord(stage, iteration, prompt_hash, response_hash, summary, duration)
        )

    def _gate_check(self, stage: str, artifact: str) -> tuple[str, str]:
        if self.gate is None:
            return "approve", artifact
        decision, text = self.gate(stage, artifact)
        if decision not in GATE_DECISIONS:
            raise PipelineError(f"gate returned unknown decision {decision!r}")
        if decision == "abort":
            raise _Halt("aborted_by_user")
        return decision, text

    def _extract_st(self, response: str) -> str:
        try:
            return extract_code_block(response)
        except NoCodeFoundError:
            # no usable block: let the checker produce diagnostics on the raw
            # reply so the fix loop can still engage
            return response

    def _extract_smv(self, response: str) -> str:
        try:
            return extract_code_block(response)
        except NoCodeFoundError:
            return response.strip()

    # -- stages ---------------------------------------------------------------------

    def execute(self) -> None:
        plan = ""
        if self.config.plan_enabled:
            messages = render_plan_prompt(self.spec, template_dir=self._template_dir)
            plan = self._call("plan", 1, messages, self.config.generate_temperature)
            self._annotate("ok")
            decision, edited = self._gate_check("plan", plan)
            if decision == "edit":
                plan = edited
            self.run.plan_text = plan

        messages = render_generation_prompt(
            self.spec, plan, self.config.shot_mode, template_dir=self._template_dir
        )
        response = self._call("generate", 1, messages, self.config.generate_temperature)
        code = self._extract_st(response)
        self.run.candidates.append(code)

        while True:
            code = self._syntax_stage(code)
            self.run.code = code
            if not self.config.verify_enabled:
                self.run.status = "accepted"
                return
            report = self._smv_stage(code)
            if report.overall == "proven":
                self.run.status = "accepted"
                return
            # refuted: repair against the counterexample, then re-validate
            if self.fix_calls["fix_verification"] >= self.config.max_verify_fix_iterations:
                raise _Halt("rejected_verification_budget")
            self.fix_calls["fix_verification"] += 1
            iteration = self.fix_calls["fix_verification"]
            messages = render_verification_fix_prompt(
                code, _counterexample_text(report), template_dir=self._template_dir
            )
            response = self._call(
                "fix_verification", iteration, messages, self.config.fix_temperature
            )
            code = self._extract_st(response)
            self.run.candidates.append(code)

    def _syntax_stage(self, code: str) -> str:
        """Check-and-fix until the candidate is clean; only clean code leaves."""
        while True:
            report = check(code, file_id=self.run.run_id)
            self.run.checks.append(report)
            self._annotate(f"errors={report.error_count}")
            if report.passed:
                decision, edited = self._gate_check("code", code)
                if decision == "edit" and edited != code:
                    code = edited
                    self.run.candidates.append(code)
                    continue  # an operator edit is re-checked like any candidate
                return code
            if self.fix_calls["fix_syntax"] >= self.config.max_syntax_fix_iterations:
                raise _Halt("rejected_syntax_budget")
            self.fix_calls["fix_syntax"] += 1
            iteration = self.fix_calls["fix_syntax"]
            messages = render_fix_prompt(
                code, report.diagnostics, template_dir=self._template_dir
            )
            response = self._call(
                "fix_syntax", iteration, messages, self.config.fix_temperature
            )
            code = self._extract_st(response)
            self.run.candidates.append(code)

    def _smv_stage(self, code: str) -> VerificationReport:
        """Generate a model, repair it until the checker accepts it, verify."""
        self.smv_generations += 1
        messages = render_smv_prompt(self.spec, code, template_dir=self._template_dir)
        response = self._call(
            "to_smv", self.smv_generations, messages, self.config.generate_temperature
        )
        smv = self._extract_smv(response)
        while True:
            feedback, report = self._try_verify(smv)
            if report is not None:
                self._annotate(report.overall)
                decision, edited = self._gate_check("smv", smv)
                if decision == "edit" and edited != smv:
                    smv = edited
                    continue  # edited models are re-verified
                self.run.smv_text = smv
                self.run.verification = report
                return report
            self._annotate("tool_error")
            if self.fix_calls["fix_smv"] >= self.config.max_smv_fix_iterations:
                raise _Halt("rejected_smv_budget")
            self.fix_calls["fix_smv"] += 1
            iteration = self.fix_calls["fix_smv"]
            messages = render_smv_fix_prompt(
                smv, feedback, template_dir=self._template_dir
            )
            response = self._call("fix_smv", iteration, messages, self.config.fix_temperature)
            smv = self._extract_smv(response)

    def _try_verify(self, smv: str) -> tuple[str, VerificationReport | None]:
        """Run the model checker; a usable verdict returns (.., report), a
        tool rejection returns (feedback, None) for the repair prompt."""
        try:
            document = SmvDocument.from_text(smv)
            document.validate()
        except VerifierError as exc:
            return f"the model was rejected before verification: {exc}", None
        report = self.verifier.verify(document)
        if report.overall in ("proven", "refuted"):
            return "", report
        feedback = report.raw_output.strip() or (
            "verification timed out; simplify the model"
            if report.overall == "timeout"
            else "the verifier reported a tool error without output"
        )
        return feedback, None


def _counterexample_text(report: VerificationReport) -> str:
    lines = []
    if report.failed_property:
        lines.append(f"violated property: {report.failed_property}")
    if report.counterexample is not None:
        lines.append(summarize_counterexample(report.counterexample))
    return "\n".join(lines) or "the model checker refuted a property"


def run_pipeline(
    spec: str,
    config: PipelineConfig,
    *,
    gateway: Gateway | None = None,
    verifier=None,
    gate: GateFn | None = None,
    run_id: str | None = None,
) -> PipelineRun:
    """Execute one full run; budget exhaustion is a status, not an exception."""
    if not spec.strip():
        raise PipelineError("specification text is empty")
    config.validate()
    runner = _Runner(spec, config, gateway, verifier, gate, run_id)
    started = time.monotonic()
    try:
        runner.execute()
    except _Halt as halt:
        runner.run.status = halt.status
    except GatewayError as exc:
        runner.run.status = "backend_failure"
        runner.run.error = str(exc)
    finally:
        runner.run.wall_time_s = time.monotonic() - started
        if config.output_dir:
            write_artifacts(runner.run, config)
    return runner.run


# -- artifacts ---------------------------------------------------------------------


def render_verification_text(report: VerificationReport) -> str:
    lines = [f"overall: {report.overall}"]
    for verdict in report.verdicts:
        state = "holds" if verdict.holds else "violated"
        lines.append(f"property {verdict.text}: {state}")
    if report.failed_property:
        lines.append(f"violated property: {report.failed_property}")
    if report.counterexample is not None:
        lines.append("")
        lines.append(summarize_counterexample(report.counterexample))
    return "\n".join(lines) + "\n"


def write_artifacts(run: PipelineRun, config: PipelineConfig) -> Path:
    """Write the stable per-run file layout; returns the run directory."""
    out = Path(config.output_dir) / run.run_id
    out.mkdir(parents=True, exist_ok=True)
    if run.plan_text:
        (out / "plan.md").write_text(run.plan_text, encoding="utf-8")
    for index, candidate in enumerate(run.candidates, start=1):
        (out / f"candidate_{index}.st").write_text(candidate, encoding="utf-8")
    if run.accepted and run.code:
        (out / "final.st").write_text(run.code, encoding="utf-8")
    if run.smv_text:
        (out / "model.smv").write_text(run.smv_text, encoding="utf-8")
    if run.verification is not None:
        (out / "verification.txt").write_text(
            render_verification_text(run.verification), encoding="utf-8"
        )
    payload = run.to_dict()
    payload["config"] = config.to_dict()
    (out / "run.json").write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )
    return out


# -- batches -----------------------------------------------------------------------


def _slug(name: str) -> str:
    cleaned = "".join(ch if ch.isalnum() or ch in "-_" else "-" for ch in name)
    return cleaned.strip("-")[:40] or "spec"


def run_batch(
    specs: Sequence[tuple[str, str]],
    config: PipelineConfig,
    *,
    jobs: int = 1,
    label: str = "",
) -> tuple[list[PipelineRun], RunMetrics]:
    """Run every (name, spec text) pair independently and aggregate.

    A failing run is recorded with its error and the batch keeps going; runs
    come back in input order regardless of scheduling.
    """
    if not specs:
        raise PipelineError("batch needs at least one specification")

    def one(index: int, name: str, text: str) -> PipelineRun:
        rid = f"{index + 1:03d}-{_slug(name)}"
        try:
            return run_pipeline(text, config, run_id=rid)
        except Exception as exc:  # a broken run must not sink the batch
            failed = PipelineRun(run_id=rid, spec_text=text, seed=config.seed)
            failed.status = "backend_failure"
            failed.error = str(exc)
            return failed

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        futures = [pool.submit(one, i, name, text) for i, (name, text) in enumerate(specs)]
        runs = [f.result() for f in futures]
    metrics = aggregate_runs(label or config.shot_mode, runs)
    return runs, metrics

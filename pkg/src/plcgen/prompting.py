"""Stage-specific prompt construction.

Prompt text is data: each stage's wording lives in an editable asset file under
``templates/`` with ``[system]`` / ``[user]`` sections and ``{name}`` placeholders.
Substitution is single-pass, so placeholder-like text inside supplied values is
left untouched.

Stage -> file mapping:

====================  ============================
stage                 template file
====================  ============================
plan                  plan.txt
generate (zero_shot)  generate_zero_shot.txt
generate (one_shot)   generate_one_shot.txt
fix_syntax            fix_syntax.txt
to_smv                to_smv.txt
fix_smv               fix_smv.txt
fix_verification      fix_verification.txt
====================  ============================

The one-shot exemplar is ``templates/exemplar.st``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from plcgen.st.diagnostics import Diagnostic, format_diagnostic

STAGES = ("plan", "generate", "fix_syntax", "to_smv", "fix_smv", "fix_verification")
SHOT_MODES = ("zero_shot", "one_shot")

# Marker in front of the single embedded diagnostic; fix prompts contain it
# exactly once, which is what the single-error rule is asserted against.
DIAGNOSTIC_DELIMITER = "ERROR>"

EXEMPLAR_FILE = "exemplar.st"

_PLACEHOLDER = re.compile(r"\{([a-z][a-z0-9_]*)\}")


class PromptError(Exception):
    """Raised for template problems and invalid render inputs."""


@dataclass(frozen=True)
class PromptTemplate:
    stage: str
    system_text: str
    user_text_pattern: str
    shot_mode: str = "zero_shot"

    def placeholders(self) -> set[str]:
        found = set(_PLACEHOLDER.findall(self.user_text_pattern))
        found |= set(_PLACEHOLDER.findall(self.system_text))
        return found


@dataclass(frozen=True)
class ChatExchange:
    role: str  # system | user | assistant
    content: str
    stage: str
    iteration: int = 0


def template_file_name(stage: str, shot_mode: str = "zero_shot") -> str:
    if stage not in STAGES:
        raise PromptError(f"unknown prompt stage '{stage}' (expected one of {STAGES})")
    if shot_mode not in SHOT_MODES:
        raise PromptError(f"unknown shot mode '{shot_mode}' (expected one of {SHOT_MODES})")
    if stage == "generate":
        return f"generate_{shot_mode}.txt"
    return f"{stage}.txt"


def _read_asset(name: str, template_dir: Path | str | None) -> str:
    if template_dir is not None:
        path = Path(template_dir) / name
        if not path.is_file():
            raise PromptError(f"template asset '{name}' not found in {template_dir}")
        return path.read_text(encoding="utf-8")
    ref = resources.files("plcgen") / "templates" / name
    if not ref.is_file():
        raise PromptError(f"template asset '{name}' missing from the package")
    return ref.read_text(encoding="utf-8")


def _parse_sections(text: str, origin: str) -> tuple[str, str]:
    sections: dict[str, list[str]] = {}
    current: str | None = None
    for line in text.splitlines():
        marker = line.strip()
        if marker in ("[system]", "[user]"):
            name = marker[1:-1]
            if name in sections:
                raise PromptError(f"duplicate [{name}] section in {origin}")
            current = name
            sections[name] = []
            continue
        if current is None:
            if marker:
                raise PromptError(f"text before the first section header in {origin}")
            continue
        sections[current].append(line)
    if "user" not in sections:
        raise PromptError(f"no [user] section in {origin}")
    system_text = "\n".join(sections.get("system", [])).strip("\n")
    user_text = "\n".join(sections["user"]).strip("\n")
    return system_text, user_text


def load_template(
    stage: str,
    shot_mode: str = "zero_shot",
    template_dir: Path | str | None = None,
) -> PromptTemplate:
    name = template_file_name(stage, shot_mode)
    system_text, user_text = _parse_sections(_read_asset(name, template_dir), name)
    return PromptTemplate(stage, system_text, user_text, shot_mode)


def load_exemplar(template_dir: Path | str | None = None) -> str:
    return _read_asset(EXEMPLAR_FILE, template_dir).strip("\n")


def render_template(
    template: PromptTemplate, values: dict[str, str], iteration: int = 0
) -> list[ChatExchange]:
    """Substitute placeholders in one pass; a referenced-but-missing value is an
    error, never silently blank."""

    def substitute(pattern: str) -> str:
        def repl(match: re.Match) -> str:
            name = match.group(1)
            if name not in values:
                raise PromptError(
                    f"template for stage '{template.stage}' references placeholder "
                    f"'{{{name}}}' but no value was supplied"
                )
            return values[name]

        return _PLACEHOLDER.sub(repl, pattern)

    exchanges = []
    if template.system_text:
        exchanges.append(
            ChatExchange("system", substitute(template.system_text), template.stage, iteration)
        )
    exchanges.append(
        ChatExchange("user", substitute(template.user_text_pattern), template.stage, iteration)
    )
    return exchanges


# -- stage renderers ---------------------------------------------------------------


def render_plan_prompt(
    spec: str,
    *,
    iteration: int = 0,
    template_dir: Path | str | None = None,
) -> list[ChatExchange]:
    if not spec.strip():
        raise PromptError("cannot render a plan prompt for an empty specification")
    template = load_template("plan", template_dir=template_dir)
    return render_template(template, {"spec": spec}, iteration)


def render_generation_prompt(
    spec: str,
    plan: str,
    shot_mode: str,
    *,
    iteration: int = 0,
    template_dir: Path | str | None = None,
) -> list[ChatExchange]:
    if not spec.strip():
        raise PromptError("cannot render a generation prompt for an empty specification")
    template = load_template("generate", shot_mode, template_dir)
    values = {"spec": spec, "plan": _plan_block(plan)}
    if shot_mode == "one_shot":
        values["example_code"] = load_exemplar(template_dir)
    return render_template(template, values, iteration)


def _plan_block(plan: str) -> str:
    if not plan.strip():
        return ""
    return f"Follow this design plan:\n{plan}\n"


def select_diagnostic(diagnostics: Iterable[Diagnostic]) -> Diagnostic:
    """The one error fed back per cycle: the (line, column)-minimal error."""
    errors = sorted(
        (d for d in diagnostics if d.severity == "error"), key=lambda d: d.sort_key()
    )
    if not errors:
        raise PromptError("fix prompt requested but there is no error diagnostic")
    return errors[0]


def _diagnostic_block(diagnostic: Diagnostic, code: str) -> str:
    lines = [format_diagnostic(diagnostic)]
    if diagnostic.hint:
        lines.append(f"  hint: {diagnostic.hint}")
    source_lines = code.splitlines()
    if 1 <= diagnostic.line <= len(source_lines):
        lines.append(f"  offending line: {source_lines[diagnostic.line - 1].strip()}")
    return "\n".join(lines)


def render_fix_prompt(
    code: str,
    diagnostic: Diagnostic | Sequence[Diagnostic],
    *,
    iteration: int = 0,
    template_dir: Path | str | None = None,
) -> list[ChatExchange]:
    """Correction prompt embedding the full candidate and exactly one diagnostic."""
    if isinstance(diagnostic, Diagnostic):
        chosen = select_diagnostic([diagnostic])
    else:
        chosen = select_diagnostic(diagnostic)
    template = load_template("fix_syntax", template_dir=template_dir)
    values = {"code": code, "diagnostic": _diagnostic_block(chosen, code)}
    return render_template(template, values, iteration)


def render_smv_prompt(
    spec: str,
    code: str,
    *,
    iteration: int = 0,
    template_dir: Path | str | None = None,
) -> list[ChatExchange]:
    if not spec.strip():
        raise PromptError("cannot render an SMV prompt for an empty specification")
    if not code.strip():
        raise PromptError("cannot render an SMV prompt without program code")
    template = load_template("to_smv", template_dir=template_dir)
    return render_template(template, {"spec": spec, "code": code}, iteration)


def render_smv_fix_prompt(
    smv_text: str,
    tool_error: str,
    *,
    iteration: int = 0,
    template_dir: Path | str | None = None,
) -> list[ChatExchange]:
    if not tool_error.strip():
        raise PromptError("SMV fix prompt needs the tool's error text")
    template = load_template("fix_smv", template_dir=template_dir)
    return render_template(template, {"code": smv_text, "diagnostic": tool_error}, iteration)


def render_verification_fix_prompt(
    code: str,
    counterexample: str,
    *,
    iteration: int = 0,
    template_dir: Path | str | None = None,
) -> list[ChatExchange]:
    if not counterexample.strip():
        raise PromptError("verification fix prompt needs a non-empty counterexample")
    template = load_template("fix_verification", template_dir=template_dir)
    return render_template(
        template, {"code": code, "counterexample": counterexample}, iteration
    )


# -- transcript helpers ------------------------------------------------------------


def validate_transcript(exchanges: Sequence[ChatExchange]) -> None:
    """A transcript is an optional system message followed by strict
    user/assistant alternation starting with user."""
    roles = [e.role for e in exchanges]
    if roles and roles[0] == "system":
        roles = roles[1:]
    for i, role in enumerate(roles):
        expected = "user" if i % 2 == 0 else "assistant"
        if role != expected:
            raise PromptError(
                f"transcript breaks alternation at position {i}: expected "
                f"{expected}, found {role}"
            )
    if "system" in roles:
        raise PromptError("system message is only allowed at the start of a transcript")


def as_messages(exchanges: Sequence[ChatExchange]) -> list[dict[str, str]]:
    """Strip stage bookkeeping down to the wire format of a chat API."""
    return [{"role": e.role, "content": e.content} for e in exchanges]

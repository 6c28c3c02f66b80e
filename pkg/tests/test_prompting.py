"""Prompt template loading, rendering rules, and the single-error policy."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plcgen.prompting import (
    DIAGNOSTIC_DELIMITER,
    ChatExchange,
    PromptError,
    as_messages,
    load_exemplar,
    load_template,
    render_fix_prompt,
    render_generation_prompt,
    render_plan_prompt,
    render_smv_fix_prompt,
    render_smv_prompt,
    render_template,
    render_verification_fix_prompt,
    select_diagnostic,
    template_file_name,
    validate_transcript,
)
from plcgen.st import check
from plcgen.st.diagnostics import Diagnostic

from conftest import FIXTURE_DIR, GOLDEN_DIR


def user_text(exchanges):
    return next(e.content for e in exchanges if e.role == "user")


def flat(exchanges):
    return "\n".join(f"[{e.role}]\n{e.content}" for e in exchanges) + "\n"


# -- template plumbing ---------------------------------------------------------------


def test_stage_to_file_mapping():
    assert template_file_name("plan") == "plan.txt"
    assert template_file_name("generate", "one_shot") == "generate_one_shot.txt"
    assert template_file_name("generate", "zero_shot") == "generate_zero_shot.txt"
    assert template_file_name("fix_verification") == "fix_verification.txt"


def test_unknown_stage_and_shot_mode():
    with pytest.raises(PromptError):
        template_file_name("discuss")
    with pytest.raises(PromptError):
        template_file_name("generate", "few_shot")


def test_templates_load_for_every_stage():
    for stage in ("plan", "fix_syntax", "to_smv", "fix_smv", "fix_verification"):
        template = load_template(stage)
        assert template.user_text_pattern
    for mode in ("zero_shot", "one_shot"):
        assert load_template("generate", mode).shot_mode == mode


def test_missing_template_dir_is_configuration_error(tmp_path):
    with pytest.raises(PromptError, match="not found"):
        load_template("plan", template_dir=tmp_path)


def test_custom_template_dir_overrides(tmp_path):
    (tmp_path / "plan.txt").write_text("[system]\nS.\n[user]\nPlan for: {spec}\n")
    messages = render_plan_prompt("fill the tank", template_dir=tmp_path)
    assert user_text(messages) == "Plan for: fill the tank"


def test_template_without_user_section_rejected(tmp_path):
    (tmp_path / "plan.txt").write_text("[system]\nonly a system part\n")
    with pytest.raises(PromptError, match="user"):
        load_template("plan", template_dir=tmp_path)


def test_missing_placeholder_value_is_error(tmp_path):
    (tmp_path / "plan.txt").write_text("[user]\n{spec} and {undefined_thing}\n")
    with pytest.raises(PromptError, match="undefined_thing"):
        render_plan_prompt("spec text", template_dir=tmp_path)


def test_exemplar_asset_checks_clean():
    assert check(load_exemplar()).passed


def test_missing_exemplar_is_hard_error(tmp_path):
    (tmp_path / "generate_one_shot.txt").write_text("[user]\n{spec}{plan}{example_code}\n")
    with pytest.raises(PromptError, match="exemplar"):
        render_generation_prompt("spec", "", "one_shot", template_dir=tmp_path)


# -- plan stage ----------------------------------------------------------------------


def test_plan_prompt_structure():
    spec = "Lift a component from the high bay when the red button is pressed."
    messages = render_plan_prompt(spec)
    assert [m.role for m in messages] == ["system", "user"]
    assert all(m.stage == "plan" for m in messages)
    text = user_text(messages)
    assert spec in text
    lowered = text.lower()
    assert "state" in lowered
    assert "transition" in lowered
    assert "declaration" in lowered
    # answer shape: state-to-state transition lines with guard conditions
    assert "STATE <i> -> STATE <j>: IF" in text


def test_empty_spec_rejected():
    with pytest.raises(PromptError):
        render_plan_prompt("")
    with pytest.raises(PromptError):
        render_plan_prompt("   \n")


def test_braces_in_spec_are_preserved():
    spec = "Set {mode} to {1, 2, 3} depending on the switch."
    messages = render_plan_prompt(spec)
    assert spec in user_text(messages)


# -- generation stage ----------------------------------------------------------------


def test_one_shot_embeds_exactly_one_code_block():
    messages = render_generation_prompt("Control a pump.", "plan text", "one_shot")
    text = user_text(messages)
    assert load_exemplar() in text
    assert text.count("```") == 2  # one opening and one closing fence


def test_zero_shot_contains_no_code():
    messages = render_generation_prompt("Control a pump.", "", "zero_shot")
    text = user_text(messages)
    assert "```" not in text
    assert "FUNCTION_BLOCK" not in text


def test_plan_is_included_when_present():
    messages = render_generation_prompt("Control a pump.", "1. STATE 0: idle", "zero_shot")
    assert "1. STATE 0: idle" in user_text(messages)


def test_unknown_shot_mode_rejected():
    with pytest.raises(PromptError):
        render_generation_prompt("spec", "", "two_shot")


# -- fix stage -----------------------------------------------------------------------


BROKEN = "PROGRAM P\nVAR a : INT; END_VAR\na := ;\nb := ;\nEND_PROGRAM\n"


def test_fix_prompt_contains_code_and_one_diagnostic():
    report = check(BROKEN)
    assert report.error_count >= 2
    messages = render_fix_prompt(BROKEN, report.diagnostics)
    text = user_text(messages)
    assert BROKEN in text  # complete candidate, no truncation
    assert text.count(DIAGNOSTIC_DELIMITER) == 1


def test_fix_prompt_picks_position_minimal_error():
    early = Diagnostic("E105", "error", "expected an expression", 3, 6)
    late = Diagnostic("E201", "error", "undeclared identifier 'b'", 4, 1)
    messages = render_fix_prompt(BROKEN, [late, early])
    text = user_text(messages)
    assert "line 3" in text
    assert "undeclared" not in text


def test_fix_prompt_demands_whole_file():
    report = check(BROKEN)
    text = user_text(render_fix_prompt(BROKEN, report.diagnostics))
    assert "complete corrected file" in text
    assert "patch" in text


def test_fix_prompt_with_no_errors_rejected():
    with pytest.raises(PromptError):
        render_fix_prompt(BROKEN, [])
    warning = Diagnostic("W001", "warning", "unsupported construct", 1, 1)
    with pytest.raises(PromptError):
        render_fix_prompt(BROKEN, [warning])


def test_select_diagnostic_ignores_warnings():
    warning = Diagnostic("W001", "warning", "w", 1, 1)
    error = Diagnostic("E105", "error", "e", 9, 9)
    assert select_diagnostic([warning, error]) is error


def test_hint_rides_after_the_error_line():
    source = "PROGRAM P\nVAR\n    slot : TUPLE OF (INT, INT);\nEND_VAR\nEND_PROGRAM\n"
    report = check(source)
    text = user_text(render_fix_prompt(source, report.diagnostics))
    error_at = text.index(DIAGNOSTIC_DELIMITER)
    hint_at = text.index("hint:")
    assert hint_at > error_at
    assert "ARRAY[lo..hi] OF T" in text


def test_fix_prompt_quotes_offending_source_line():
    source = "PROGRAM P\nVAR\n    componentHomeSlot : TUPLE OF (INT, INT);\nEND_VAR\nEND_PROGRAM\n"
    report = check(source)
    text = user_text(render_fix_prompt(source, report.diagnostics))
    assert "componentHomeSlot : TUPLE OF (INT, INT);" in text


def test_fix_prompt_golden_snapshot():
    source = (FIXTURE_DIR / "tuple_program.st").read_text()
    report = check(source)
    messages = render_fix_prompt(source, report.diagnostics)
    assert flat(messages) == (GOLDEN_DIR / "fix_prompt_tuple.txt").read_text()


# -- SMV stages ----------------------------------------------------------------------


CODE = "PROGRAM P\nVAR t : REAL; END_VAR\nt := t + 1.0;\nEND_PROGRAM\n"


def test_smv_prompt_mentions_property_kinds():
    spec = "The temperature must never exceed 90 degrees."
    text = user_text(render_smv_prompt(spec, CODE))
    assert spec in text and CODE in text
    assert "INVARSPEC" in text and "LTLSPEC" in text
    assert "MODULE" in text
    assert "-- constraint:" in text


def test_smv_prompt_requires_spec_and_code():
    with pytest.raises(PromptError):
        render_smv_prompt("", CODE)
    with pytest.raises(PromptError):
        render_smv_prompt("spec", "")


def test_smv_fix_prompt_embeds_tool_error_verbatim():
    error_text = 'file model.smv: line 7: syntax error at token "NEXT"'
    text = user_text(render_smv_fix_prompt("MODULE main", error_text))
    assert error_text in text
    assert "MODULE main" in text
    with pytest.raises(PromptError):
        render_smv_fix_prompt("MODULE main", "  ")


def test_verification_fix_prompt_embeds_trace_verbatim():
    trace = (FIXTURE_DIR / "trace_excerpt.txt").read_text()
    code = "FUNCTION_BLOCK F\nEND_FUNCTION_BLOCK\n"
    text = user_text(render_verification_fix_prompt(code, trace))
    assert trace in text
    assert code in text


def test_verification_fix_prompt_rejects_empty_trace():
    with pytest.raises(PromptError):
        render_verification_fix_prompt("code", "")


def test_verification_fix_prompt_golden_snapshot():
    source = (
        "FUNCTION_BLOCK FB_Door\nVAR_INPUT limit_open : BOOL; END_VAR\n"
        "VAR_OUTPUT motor_open : BOOL; END_VAR\nVAR state : INT; END_VAR\n"
        "IF state = 1 THEN\n    motor_open := TRUE;\nEND_IF;\nEND_FUNCTION_BLOCK\n"
    )
    trace = (FIXTURE_DIR / "trace_excerpt.txt").read_text()
    messages = render_verification_fix_prompt(source, trace)
    assert flat(messages) == (GOLDEN_DIR / "verification_fix_prompt.txt").read_text()


# -- transcript shape ----------------------------------------------------------------


def ex(role, content="x"):
    return ChatExchange(role, content, "generate", 0)


def test_transcript_validation():
    validate_transcript([ex("system"), ex("user"), ex("assistant"), ex("user")])
    validate_transcript([ex("user"), ex("assistant")])
    validate_transcript([])
    with pytest.raises(PromptError):
        validate_transcript([ex("user"), ex("user")])
    with pytest.raises(PromptError):
        validate_transcript([ex("assistant")])
    with pytest.raises(PromptError):
        validate_transcript([ex("user"), ex("system")])


def test_as_messages_strips_bookkeeping():
    messages = as_messages([ex("system", "s"), ex("user", "u")])
    assert messages == [
        {"role": "system", "content": "s"},
        {"role": "user", "content": "u"},
    ]


# -- properties ----------------------------------------------------------------------


spec_text = st.text(
    alphabet=st.characters(codec="utf-8", exclude_categories=("Cs",)),
    min_size=1,
    max_size=200,
).filter(lambda s: s.strip())


@given(spec_text)
@settings(max_examples=50)
def test_rendering_is_idempotent_and_embeds_spec(spec):
    first = render_plan_prompt(spec)
    second = render_plan_prompt(spec)
    assert first == second
    assert spec in user_text(first)


@given(st.lists(st.tuples(st.integers(1, 30), st.integers(1, 40)), min_size=1, max_size=6))
@settings(max_examples=50)
def test_single_error_rule_for_any_error_set(positions):
    diagnostics = [
        Diagnostic("E105", "error", f"problem {i}", line, column)
        for i, (line, column) in enumerate(positions)
    ]
    text = user_text(render_fix_prompt("x := 1;", diagnostics))
    assert text.count(DIAGNOSTIC_DELIMITER) == 1


@given(spec_text)
@settings(max_examples=30)
def test_no_truncation_of_embedded_code(code):
    diagnostic = Diagnostic("E103", "error", "unexpected token", 1, 1)
    text = user_text(render_fix_prompt(code, diagnostic))
    assert code in text

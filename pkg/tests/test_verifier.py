"""SMV document handling, output classification, and trace summarization."""

import shutil

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plcgen.verifier import (
    BinaryNotFoundError,
    NuxmvVerifier,
    SmvDocument,
    StubVerifier,
    Trace,
    TraceState,
    VerifierConfig,
    VerifierError,
    make_verifier,
    parse_nuxmv_output,
    summarize_counterexample,
)

from conftest import FIXTURE_DIR

NUXMV_DIR = FIXTURE_DIR / "nuxmv"


def fixture(name):
    return (NUXMV_DIR / name).read_text()


# -- SmvDocument -----------------------------------------------------------------------


def test_property_extraction_with_constraints():
    doc = SmvDocument.from_text(fixture("all_true.smv"))
    assert [(p.kind, p.text) for p in doc.properties] == [
        ("INVARSPEC", "b"),
        ("LTLSPEC", "G (x <= 3)"),
    ]
    assert doc.properties[0].constraint == "the enable flag must always hold"
    assert doc.properties[1].constraint == "the counter must never exceed three"
    doc.validate()


def test_property_without_constraint_comment():
    doc = SmvDocument.from_text("MODULE main\nVAR b : boolean;\nINVARSPEC b\n")
    assert doc.properties[0].constraint is None


def test_document_without_properties_rejected():
    doc = SmvDocument.from_text("MODULE main\nVAR b : boolean;\n")
    assert doc.properties == []
    with pytest.raises(VerifierError):
        doc.validate()


def test_manual_document_with_phantom_property_rejected():
    from plcgen.verifier import SmvProperty

    doc = SmvDocument("MODULE main", [SmvProperty("INVARSPEC", "ghost")])
    with pytest.raises(VerifierError):
        doc.validate()


# -- parse_nuxmv_output ------------------------------------------------------------------


def test_all_true_fixture_is_proven():
    report = parse_nuxmv_output(fixture("all_true.out"), expected_properties=2)
    assert report.overall == "proven"
    assert [v.holds for v in report.verdicts] == [True, True]
    assert report.counterexample is None


def test_false_fixture_is_refuted_with_expanded_trace():
    report = parse_nuxmv_output(fixture("one_false_trace.out"), expected_properties=2)
    assert report.overall == "refuted"
    assert report.failed_property == "F state = 3"
    trace = report.counterexample
    assert [s.step for s in trace.states] == [1, 2, 3]
    # delta expansion: 'enabled' is only printed in state 1 but persists
    assert trace.states[0].assignments == {
        "state": "0", "motor": "FALSE", "enabled": "TRUE",
    }
    assert trace.states[1].assignments == {
        "state": "1", "motor": "TRUE", "enabled": "TRUE",
    }
    assert trace.states[2].assignments["state"] == "2"
    assert [s.loop_start for s in trace.states] == [False, False, True]


def test_syntax_error_fixture_is_tool_error():
    report = parse_nuxmv_output(fixture("syntax_error.out"), expected_properties=1)
    assert report.overall == "tool_error"
    assert 'at token "ASSIGN"' in report.raw_output


def test_empty_output_is_tool_error():
    assert parse_nuxmv_output("", expected_properties=1).overall == "tool_error"


def test_missing_verdicts_never_proven():
    # two properties declared, only one reported: must not claim proven
    raw = "-- invariant b  is true\n"
    report = parse_nuxmv_output(raw, expected_properties=2)
    assert report.overall == "tool_error"


def test_extra_verdicts_also_tool_error():
    raw = "-- invariant a is true\n-- invariant b is true\n"
    assert parse_nuxmv_output(raw, expected_properties=1).overall == "tool_error"


def test_false_without_trace_is_tool_error():
    raw = "-- invariant b  is false\n"
    report = parse_nuxmv_output(raw, expected_properties=1)
    assert report.overall == "tool_error"
    assert report.failed_property == "b"


def test_banner_and_warnings_are_tolerated():
    raw = (
        "*** This is nuXmv 2.0.0\n"
        "WARNING *** the model contains no fairness constraints ***\n"
        "-- invariant ok  is true\n"
    )
    assert parse_nuxmv_output(raw, expected_properties=1).overall == "proven"


def test_verdict_count_unchecked_when_expectation_unknown():
    raw = "-- invariant b  is true\n"
    assert parse_nuxmv_output(raw).overall == "proven"


def test_parse_is_pure_and_repeatable():
    raw = fixture("one_false_trace.out")
    first = parse_nuxmv_output(raw, 2).to_dict()
    second = parse_nuxmv_output(raw, 2).to_dict()
    # wall time is filled by the runner, not the parser
    assert first == second
    assert first["wall_time_s"] == 0.0


# -- summarize_counterexample -------------------------------------------------------------


def test_one_state_summary():
    trace = Trace([TraceState(1, {"b": "TRUE"})])
    assert summarize_counterexample(trace) == "step 1: b = TRUE"


def test_summary_shows_deltas_after_first_step():
    report = parse_nuxmv_output(fixture("one_false_trace.out"), 2)
    text = summarize_counterexample(report.counterexample)
    lines = text.splitlines()
    assert lines[0] == "step 1: state = 0, motor = FALSE, enabled = TRUE"
    assert lines[1] == "step 2: state = 1, motor = TRUE"  # enabled unchanged: omitted
    assert lines[2] == "step 3 (loop starts here): state = 2, motor = FALSE"


def test_summary_truncation():
    trace = Trace([TraceState(i, {"x": str(i)}) for i in range(1, 11)])
    text = summarize_counterexample(trace, max_steps=3)
    lines = text.splitlines()
    assert len(lines) == 4
    assert lines[-1] == "... (7 more steps)"


def test_summary_marks_unchanged_step():
    trace = Trace([TraceState(1, {"x": "1"}), TraceState(2, {"x": "1"})])
    assert summarize_counterexample(trace).splitlines()[1] == "step 2: (no change)"


@given(st.integers(min_value=1, max_value=30), st.integers(min_value=1, max_value=30))
@settings(max_examples=50)
def test_summary_line_budget(steps, max_steps):
    trace = Trace([TraceState(i, {"v": str(i)}) for i in range(1, steps + 1)])
    lines = summarize_counterexample(trace, max_steps=max_steps).splitlines()
    assert len(lines) == min(steps, max_steps) + (1 if steps > max_steps else 0)


# -- backends --------------------------------------------------------------------------


GOOD_DOC = SmvDocument.from_text(fixture("all_true.smv"))


def test_missing_binary_is_configuration_error():
    config = VerifierConfig(kind="nuxmv", binary="definitely-not-installed-anywhere")
    with pytest.raises(BinaryNotFoundError):
        NuxmvVerifier(config).verify(GOOD_DOC)


@pytest.mark.skipif(shutil.which("nuXmv") is None, reason="nuXmv binary not installed")
def test_real_nuxmv_round_trip():
    report = NuxmvVerifier(VerifierConfig()).verify(GOOD_DOC)
    assert report.overall == "proven"


def test_stub_verifier_defaults_to_proven():
    verifier = make_verifier(VerifierConfig(kind="stub"))
    report = verifier.verify(GOOD_DOC)
    assert report.overall == "proven"
    assert len(report.verdicts) == len(GOOD_DOC.properties)


def test_stub_verifier_scripted_sequence():
    config = VerifierConfig(kind="stub", stub_verdicts=("refuted", "proven"))
    verifier = StubVerifier(config)
    first = verifier.verify(GOOD_DOC)
    assert first.overall == "refuted"
    assert first.counterexample is not None and len(first.counterexample.states) >= 1
    assert first.failed_property == GOOD_DOC.properties[0].text
    assert verifier.verify(GOOD_DOC).overall == "proven"
    assert verifier.verify(GOOD_DOC).overall == "proven"  # script exhausted -> default


def test_stub_refutation_summarizes():
    config = VerifierConfig(kind="stub", stub_verdicts=("refuted",))
    report = StubVerifier(config).verify(GOOD_DOC)
    text = summarize_counterexample(report.counterexample)
    assert text.startswith("step 1:")


def test_verifier_config_round_trip():
    config = VerifierConfig(kind="stub", stub_verdicts=("proven",), timeout=5.0)
    assert VerifierConfig.from_dict(config.to_dict()) == config
    with pytest.raises(VerifierError):
        VerifierConfig.from_dict({"kind": "stub", "engine": "warp"})


def test_unknown_verifier_kind():
    with pytest.raises(VerifierError):
        make_verifier(VerifierConfig(kind="prolog"))


def test_trace_step_monotonicity_enforced():
    trace = Trace([TraceState(1, {}), TraceState(3, {})])
    with pytest.raises(VerifierError):
        trace.validate()

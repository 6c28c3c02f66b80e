"""Property-based checks for the Structured Text frontend."""

from hypothesis import given, settings
from hypothesis import strategies as st

from plcgen.st import check, tokenize

text_strategy = st.text(
    alphabet=st.characters(codec="utf-8", exclude_categories=("Cs",)),
    max_size=300,
)


@given(text_strategy)
@settings(max_examples=200)
def test_tokenize_never_raises(source):
    tokens, diagnostics = tokenize(source)
    assert isinstance(tokens, list) and isinstance(diagnostics, list)


@given(text_strategy)
@settings(max_examples=200)
def test_token_spans_are_exact_byte_slices(source):
    raw = source.encode("utf-8")
    tokens, _ = tokenize(source)
    for tok in tokens:
        piece = raw[tok.span.offset : tok.span.offset + tok.span.length]
        assert piece.decode("utf-8") == tok.lexeme


@given(text_strategy)
@settings(max_examples=200)
def test_token_spans_monotonic_and_disjoint(source):
    tokens, _ = tokenize(source)
    prev_end = 0
    for tok in tokens:
        assert tok.span.offset >= prev_end
        prev_end = tok.span.offset + tok.span.length


@given(text_strategy)
@settings(max_examples=100)
def test_clean_lex_partitions_source(source):
    """With no lexical errors, token slices plus whitespace gaps rebuild the file."""
    raw = source.encode("utf-8")
    tokens, diagnostics = tokenize(source)
    if diagnostics:
        return
    cursor = 0
    for tok in tokens:
        gap = raw[cursor : tok.span.offset].decode("utf-8")
        assert gap.strip() == ""
        cursor = tok.span.offset + tok.span.length
    assert raw[cursor:].decode("utf-8").strip() == ""


@given(text_strategy)
@settings(max_examples=100)
def test_check_never_raises_and_is_deterministic(source):
    first = check(source)
    second = check(source)
    assert first.to_dict() == second.to_dict()
    keys = [d.sort_key() for d in first.diagnostics]
    assert keys == sorted(keys)


# Each template is an independently-broken statement: one isolated defect,
# terminated so panic recovery resynchronizes before the next one.
BROKEN_TEMPLATES = (
    "x{i} := ;",
    "x{i} := (1 + 2;",
    "x{i} := 1 +;",
    ":= {i};",
    "x{i} 1;",
)


@given(st.lists(st.sampled_from(BROKEN_TEMPLATES), min_size=1, max_size=8))
@settings(max_examples=60)
def test_each_broken_statement_yields_a_diagnostic(templates):
    body = "\n".join(t.format(i=i) for i, t in enumerate(templates))
    decls = " ".join(f"x{i} : INT;" for i in range(len(templates)))
    source = f"PROGRAM P\nVAR {decls} END_VAR\n{body}\nEND_PROGRAM\n"
    report = check(source)
    assert report.error_count >= len(templates), (
        source,
        [str(d) for d in report.diagnostics],
    )


@given(st.integers(min_value=0, max_value=2**31), st.integers(min_value=1, max_value=40))
@settings(max_examples=60)
def test_diagnostic_sort_key_total_order(seed, count):
    import random

    rng = random.Random(seed)
    from plcgen.st.diagnostics import Diagnostic

    diags = [
        Diagnostic(
            code=f"E{rng.randint(100, 210):03d}",
            severity="error",
            message=rng.choice(["a", "b", "c"]),
            line=rng.randint(1, 9),
            column=rng.randint(1, 9),
        )
        for _ in range(count)
    ]
    ordered = sorted(diags, key=lambda d: d.sort_key())
    assert sorted(ordered, key=lambda d: d.sort_key()) == ordered

#!/usr/bin/env python3
"""Regenerate the frozen prompt snapshots under tests/data/golden/.

Run only when a deliberate template change is made; review the diff before
committing, because the test suite compares against these files byte-for-byte.
"""

from pathlib import Path

from plcgen.prompting import (
    render_fix_prompt,
    render_verification_fix_prompt,
)
from plcgen.st import check

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "data" / "golden"
FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "data" / "fixtures"

TUPLE_SOURCE = """\
PROGRAM MoveComponent
VAR
    componentHomeSlot : TUPLE OF (INT, INT);
    xPos : INT;
END_VAR
IF xPos < 1950 THEN
    xPos := xPos + 1;
END_IF;
END_PROGRAM
"""

TRACE_EXCERPT = """\
Trace Description: LTL Counterexample
Trace Type: Counterexample
  -> State: 1.1 <-
    state = 0
    motor_open = FALSE
    limit_open = FALSE
  -> State: 1.2 <-
    state = 1
    motor_open = TRUE
  -- Loop starts here
  -> State: 1.3 <-
    limit_open = TRUE
"""

CODE_FOR_TRACE = """\
FUNCTION_BLOCK FB_Door
VAR_INPUT limit_open : BOOL; END_VAR
VAR_OUTPUT motor_open : BOOL; END_VAR
VAR state : INT; END_VAR
IF state = 1 THEN
    motor_open := TRUE;
END_IF;
END_FUNCTION_BLOCK
"""


def render_all() -> dict[str, str]:
    report = check(TUPLE_SOURCE)
    fix = render_fix_prompt(TUPLE_SOURCE, report.diagnostics)
    verification = render_verification_fix_prompt(CODE_FOR_TRACE, TRACE_EXCERPT)

    def flat(exchanges):
        return "\n".join(f"[{e.role}]\n{e.content}" for e in exchanges) + "\n"

    return {
        "fix_prompt_tuple.txt": flat(fix),
        "verification_fix_prompt.txt": flat(verification),
    }


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    FIXTURES.mkdir(parents=True, exist_ok=True)
    (FIXTURES / "trace_excerpt.txt").write_text(TRACE_EXCERPT)
    (FIXTURES / "tuple_program.st").write_text(TUPLE_SOURCE)
    for name, text in render_all().items():
        (GOLDEN / name).write_text(text)
        print(f"wrote {GOLDEN / name}")


if __name__ == "__main__":
    main()

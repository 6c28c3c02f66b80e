#!/usr/bin/env python3
"""Refresh the model-checker output fixtures from a real nuXmv binary.

The committed .out files under tests/data/fixtures/nuxmv/ were written by hand
to nuXmv 2.0.0's batch output format because this repository is developed on
machines without the binary. Whenever nuXmv IS available, run this script: it
re-runs every fixture model and overwrites the .out files with genuine output,
so the parser tests exercise the real thing. Review the diff; the parser tests
must still pass afterwards.
"""

import shutil
import subprocess
import sys
from pathlib import Path

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "data" / "fixtures" / "nuxmv"

MODELS = {
    "all_true.smv": "all_true.out",
    "one_false.smv": "one_false_trace.out",
    "syntax_error.smv": "syntax_error.out",
}


def main() -> int:
    binary = shutil.which("nuXmv") or shutil.which("nuxmv")
    if binary is None:
        print("nuXmv not found on PATH; fixtures left untouched", file=sys.stderr)
        return 1
    for model, out_name in MODELS.items():
        model_path = FIXTURES / model
        proc = subprocess.run(
            [binary, str(model_path)], capture_output=True, text=True, timeout=60
        )
        raw = proc.stdout + ("\n" + proc.stderr if proc.stderr else "")
        (FIXTURES / out_name).write_text(raw)
        print(f"regenerated {out_name} (exit {proc.returncode})")
    return 0


if __name__ == "__main__":
    sys.exit(main())

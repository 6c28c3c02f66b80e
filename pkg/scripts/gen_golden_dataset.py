#!/usr/bin/env python3
"""Regenerate the golden dataset records used by the test suite.

Runs the completion/fixing derivations at seed 42 for a fixed trio of corpus
files, plus one fixing export, and writes the results under
tests/data/golden/dataset/. Outputs are reviewed by hand before committing;
the tests then hold every future run to these bytes.
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from plcgen.dataset_tools import (  # noqa: E402
    SplitManifest,
    export_finetune,
    make_completion,
    make_fixing,
)

SEED = 42
FILES = ("fb_alarm_latch", "prog_traffic_light", "fb_tank_level")


def main() -> None:
    corpus = ROOT / "tests" / "data" / "corpus" / "valid"
    out = ROOT / "tests" / "data" / "golden" / "dataset"
    out.mkdir(parents=True, exist_ok=True)

    records = []
    for stem in FILES:
        text = (corpus / f"{stem}.st").read_text(encoding="utf-8")
        for record in (
            make_completion(stem, text, SEED),
            make_fixing(stem, text, SEED),
        ):
            if record is None:
                raise SystemExit(f"{stem} unexpectedly produced no record")
            records.append(record)
            path = out / f"{record.record_id}.json"
            path.write_text(
                json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )
            print(f"wrote {path.relative_to(ROOT)}")

    manifest = SplitManifest(
        corpus_id="golden-trio",
        seed=SEED,
        ratio=0.95,
        train_ids=tuple(FILES[:2]),
        test_ids=(FILES[2],),
    )
    fixing = [r for r in records if r.kind == "fixing" and r.source_id in FILES[:2]]
    path = export_finetune(fixing, manifest, out / "train_fixing.jsonl")
    print(f"wrote {path.relative_to(ROOT)}")


if __name__ == "__main__":
    main()

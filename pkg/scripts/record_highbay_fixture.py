"""Record the high-bay warehouse replay fixture.

Runs the full pipeline once against a scripted backend while recording every
request/response pair into a replay cache, then writes the replay config that
the offline end-to-end tests load. Rerun after changing the prompt templates,
the request hashing, or the staged responses below; the diff shows exactly
which cache entries moved.
"""

import json
import shutil
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from plcgen.gateway import BackendConfig, Gateway, MockScript  # noqa: E402
from plcgen.pipeline import PipelineConfig, run_pipeline  # noqa: E402
from plcgen.st.checker import check  # noqa: E402
from plcgen.verifier import SmvDocument, VerifierConfig  # noqa: E402

FIXTURE_DIR = REPO / "tests" / "data" / "fixtures" / "replay" / "highbay"
MODEL = "replay-model"

SPEC = """\
Design a controller for the transfer carriage of a high-bay warehouse.

The carriage shuttles pallets from an infeed conveyor to the rack. A light
barrier reports a pallet waiting at the pickup position, and two end switches
report the carriage parked at the pickup side or at the rack side. The
carriage has one drive per direction, a pallet clamp, and a fault lamp.

Behaviour:
- A start button enables the plant, a stop button disables it.
- When the plant is enabled, the carriage is at the pickup side and a pallet
  is present, clamp the pallet, wait two seconds for it to settle, then drive
  to the rack side.
- At the rack side release the clamp, wait two seconds, and drive back empty.
- The two direction drives must never be on at the same time, and a pallet
  must stay clamped for the whole trip to the rack.
- Any unknown internal state lights the fault lamp and returns to idle.
"""

PLAN = """\
States:
  0 idle        wait at the pickup side until a pallet arrives
  1 clamp       close the clamp, hold for the 2 s settle time
  2 to_rack     drive toward the rack until the rack end switch trips
  3 release     open the clamp, hold for the 2 s settle time
  4 return      drive back until the pickup end switch trips, then idle

Inputs:  startButton, stopButton, palletAtPickup, carriageAtPickup, carriageAtRack
Outputs: motorToRack, motorToPickup, clampPallet, faultLamp
Timing:  one TON timer shared by states 1 and 3 (PT = 2 s)

Safety properties to verify:
  - motorToRack and motorToPickup are mutually exclusive
  - the clamp stays closed whenever motorToRack is on
  - every clamped pallet is eventually released at the rack
"""

FIXED_ST = """\
PROGRAM HighBayTransfer
VAR_INPUT
    startButton : BOOL;
    stopButton : BOOL;
    palletAtPickup : BOOL;    (* light barrier on the infeed conveyor *)
    carriageAtPickup : BOOL;  (* end switch, conveyor side *)
    carriageAtRack : BOOL;    (* end switch, rack side *)
END_VAR
VAR_OUTPUT
    motorToRack : BOOL;
    motorToPickup : BOOL;
    clampPallet : BOOL;
    faultLamp : BOOL;
END_VAR
VAR
    state : INT := 0;  (* 0 idle, 1 clamp, 2 to rack, 3 release, 4 return *)
    running : BOOL;
    settleTimer : TON;
END_VAR

IF stopButton THEN
    running := FALSE;
ELSIF startButton THEN
    running := TRUE;
END_IF;

settleTimer(IN := (state = 1) OR (state = 3), PT := T#2s);

CASE state OF
    0:
        motorToRack := FALSE;
        motorToPickup := FALSE;
        clampPallet := FALSE;
        IF running AND palletAtPickup AND carriageAtPickup THEN
            state := 1;
        END_IF;
    1:
        clampPallet := TRUE;
        IF settleTimer.Q THEN
            state := 2;
        END_IF;
    2:
        motorToRack := TRUE;
        IF carriageAtRack THEN
            motorToRack := FALSE;
            state := 3;
        END_IF;
    3:
        clampPallet := FALSE;
        IF settleTimer.Q THEN
            state := 4;
        END_IF;
    4:
        motorToPickup := TRUE;
        IF carriageAtPickup THEN
            motorToPickup := FALSE;
            state := 0;
        END_IF;
ELSE
    faultLamp := TRUE;
    state := 0;
END_CASE;

END_PROGRAM"""

# The first attempt uses '=' where an assignment needs ':=' -- one fix cycle.
BROKEN_ST = FIXED_ST.replace("running := TRUE;", "running = TRUE;", 1)

SMV = """\
MODULE main
VAR
    state : 0..4;
    motorToRack : boolean;
    motorToPickup : boolean;
    clampPallet : boolean;
ASSIGN
    init(state) := 0;
    next(state) :=
        case
            state = 0 : {0, 1};
            state = 1 : {1, 2};
            state = 2 : {2, 3};
            state = 3 : {3, 4};
            state = 4 : {4, 0};
            TRUE : 0;
        esac;
    motorToRack := state = 2;
    motorToPickup := state = 4;
    clampPallet := (state = 1) | (state = 2) | (state = 3);

-- constraint: the carriage never drives in both directions at once
INVARSPEC !(motorToRack & motorToPickup)
-- constraint: the pallet stays clamped while driving toward the rack
INVARSPEC motorToRack -> clampPallet
-- constraint: a clamped pallet is always released into the rack
LTLSPEC G (state = 1 -> F state = 3)"""


def scripted_responses() -> MockScript:
    return (
        MockScript()
        .add("plan", PLAN)
        .add("generate", f"Here is the controller.\n\n```st\n{BROKEN_ST}\n```")
        .add("fix_syntax", f"Corrected assignment operator.\n\n```st\n{FIXED_ST}\n```")
        .add("to_smv", f"```smv\n{SMV}\n```")
    )


def main() -> None:
    report = check(FIXED_ST, file_id="fixed")
    assert report.passed, [d.code for d in report.diagnostics]
    broken = check(BROKEN_ST, file_id="broken")
    assert broken.error_count == 1, broken.to_dict()
    SmvDocument.from_text(SMV).validate()

    cache = FIXTURE_DIR / "cache"
    if cache.exists():
        shutil.rmtree(cache)
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)

    record_backend = BackendConfig(kind="mock", model=MODEL, record_to=str(cache))
    config = PipelineConfig(
        backend=record_backend, verifier=VerifierConfig(kind="stub")
    )
    gateway = Gateway(record_backend, script=scripted_responses())
    run = run_pipeline(SPEC, config, gateway=gateway)
    assert run.status == "accepted", run.error or run.status
    assert [r.stage for r in run.records] == ["plan", "generate", "fix_syntax", "to_smv"]
    assert run.code == FIXED_ST

    (FIXTURE_DIR / "spec.txt").write_text(SPEC, encoding="utf-8")
    replay = {
        "backend": {"kind": "replay", "model": MODEL, "cache_path": "cache"},
        "verifier": {"kind": "stub"},
    }
    (FIXTURE_DIR / "config.json").write_text(
        json.dumps(replay, indent=2) + "\n", encoding="utf-8"
    )

    # Close the loop: the committed config must reproduce the run offline.
    loaded = PipelineConfig.load(FIXTURE_DIR / "config.json")
    replayed = run_pipeline(SPEC, loaded)
    assert replayed.status == "accepted" and replayed.code == FIXED_ST
    print(f"recorded {len(list(cache.glob('*.json')))} cache entries in {FIXTURE_DIR}")


if __name__ == "__main__":
    main()

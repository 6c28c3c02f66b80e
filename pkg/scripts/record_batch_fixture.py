"""Record the 40-task batch evaluation fixture.

Each task is a one-line plant description. 29 of the scripted replies compile
and 11 keep a broken assignment through their single allowed fix attempt, so
the replayed batch lands at pass@1 = 29/40 = 0.725. Rerun after changing the
prompt templates or request hashing.
"""

import json
import shutil
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from plcgen.gateway import BackendConfig, Gateway, MockScript  # noqa: E402
from plcgen.pipeline import PipelineConfig, run_batch, run_pipeline  # noqa: E402
from plcgen.st.checker import check  # noqa: E402

FIXTURE_DIR = REPO / "tests" / "data" / "fixtures" / "replay" / "batch"
MODEL = "replay-model"
FAILING = {3, 7, 10, 14, 18, 21, 25, 28, 32, 36, 39}

TASKS = (
    "Start a conveyor belt when the start button is pressed and stop it on the stop button.",
    "Run a drainage pump while the sump float switch reports water.",
    "Open a greenhouse vent when the inside temperature exceeds the setpoint.",
    "Latch an alarm lamp when the emergency stop chain opens.",
    "Switch a silo filler off when the high level probe is covered.",
    "Interlock two feeder motors so only one can run at a time.",
    "Debounce a part-present sensor before counting parts on a belt.",
    "Close a gate valve when downstream pressure passes the limit.",
    "Run a stirrer only while the tank heater is active.",
    "Flash a beacon while a machine guard door is open.",
    "Raise a lift table until its upper end switch trips.",
    "Enable a glue dispenser only while the carrier is in position.",
    "Stop an extruder screw if the melt temperature drops too low.",
    "Start the second compressor when system pressure stays low for ten seconds.",
    "Hold a brake open while the hoist drive reports torque.",
    "Index a rotary table one station on each cycle start pulse.",
    "Sound a horn for three seconds before a crusher starts.",
    "Divert rejected parts with a pusher when the vision check fails.",
    "Keep a coolant pump running for thirty seconds after the spindle stops.",
    "Turn on bin heating when the outside temperature falls below freezing.",
    "Inhibit the wrapper while the film roll sensor reports empty.",
    "Toggle a sample valve open for two seconds every minute.",
    "Stop the infeed when the accumulation zone photo eye stays blocked.",
    "Run the exhaust fan whenever either paint booth is occupied.",
    "Reset a batch counter when the operator presses the acknowledge button.",
    "Start bag filter cleaning when differential pressure rises above threshold.",
    "Drive a palletizer hoist to the layer height given by the layer counter.",
    "Enable jog mode only while the key switch is in the service position.",
    "Charge an accumulator until its pressure switch opens.",
    "Announce shift end with a bell driven by a weekly schedule bit.",
    "Track a dancer roller and trim the winder speed to keep web tension.",
    "Purge the burner for fifteen seconds before allowing ignition.",
    "Hold the oven conveyor while any temperature zone is out of band.",
    "Unlock the tool changer only when the spindle is stopped.",
    "Meter two dosing pumps so additive follows the main flow rate.",
    "Raise the dock leveler lip only when a trailer is chocked.",
    "Cycle a blow-off valve while the air knife sensor sees product.",
    "Dim hall lighting when the daylight sensor exceeds its setpoint.",
    "Close the roof hatch when the rain detector becomes active.",
    "Disable the stacker crane aisle while the maintenance plug is pulled.",
)

VALID_ST = """\
PROGRAM TaskController
VAR_INPUT
    startButton : BOOL;
    stopButton : BOOL;
END_VAR
VAR_OUTPUT
    actuatorOn : BOOL;
END_VAR

IF stopButton THEN
    actuatorOn := FALSE;
ELSIF startButton THEN
    actuatorOn := TRUE;
END_IF;

END_PROGRAM"""

BROKEN_ST = VALID_ST.replace("actuatorOn := TRUE;", "actuatorOn = TRUE;", 1)


def main() -> None:
    assert len(TASKS) == 40 and len(set(TASKS)) == 40
    assert check(VALID_ST).passed and not check(BROKEN_ST).passed

    cache = FIXTURE_DIR / "cache"
    spec_dir = FIXTURE_DIR / "specs"
    for stale in (cache, spec_dir):
        if stale.exists():
            shutil.rmtree(stale)
    spec_dir.mkdir(parents=True)

    record_backend = BackendConfig(kind="mock", model=MODEL, record_to=str(cache))
    config = PipelineConfig(
        backend=record_backend,
        plan_enabled=False,
        verify_enabled=False,
        max_syntax_fix_iterations=1,
    )
    for index, task in enumerate(TASKS, start=1):
        spec = f"Task {index:02d}: {task}\n"
        (spec_dir / f"task_{index:02d}.txt").write_text(spec, encoding="utf-8")
        script = MockScript()
        if index in FAILING:
            script.add("generate", f"```st\n{BROKEN_ST}\n```")
            script.add("fix_syntax", f"```st\n{BROKEN_ST}\n```")
        else:
            script.add("generate", f"```st\n{VALID_ST}\n```")
        gateway = Gateway(record_backend, script=script)
        run = run_pipeline(spec, config, gateway=gateway)
        expected = "rejected_syntax_budget" if index in FAILING else "accepted"
        assert run.status == expected, (index, run.status, run.error)

    replay = {
        "backend": {"kind": "replay", "model": MODEL, "cache_path": "cache"},
        "verifier": {"kind": "stub"},
        "plan_enabled": False,
        "verify_enabled": False,
        "max_syntax_fix_iterations": 1,
    }
    (FIXTURE_DIR / "config.json").write_text(
        json.dumps(replay, indent=2) + "\n", encoding="utf-8"
    )

    # Close the loop exactly the way the CLI reads a spec directory.
    loaded = PipelineConfig.load(FIXTURE_DIR / "config.json")
    specs = [
        (p.stem, p.read_text(encoding="utf-8")) for p in sorted(spec_dir.glob("*.txt"))
    ]
    runs, metrics = run_batch(specs, loaded, label="replay")
    accepted = sum(r.status == "accepted" for r in runs)
    assert accepted == 29, accepted
    assert metrics.pass_at[1] == 0.725, metrics.pass_at
    print(
        f"recorded {len(list(cache.glob('*.json')))} cache entries, "
        f"pass@1 = {metrics.pass_at[1]}"
    )


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Regenerate the bundled ST corpus under tests/data/corpus/.

The valid files are hand-written; the broken counterparts are derived from them by
small targeted mutations (deleted semicolon, misspelled keyword, removed END_*
token, unknown type). mutations.json records, for every broken file, the source
file, the mutation kind, and the line the mutation lives on, so tests can assert
diagnostic locality. The script verifies both sides against the checker before
writing anything.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from plcgen.st import check, first_error  # noqa: E402

VALID: dict[str, str] = {}

VALID["fb_conveyor_guard"] = """\
(* Trips an alarm when the belt runs above its speed limit for too long. *)
FUNCTION_BLOCK FB_ConveyorGuard
VAR_INPUT
  run : BOOL;
  speed : REAL;
  maxSpeed : REAL := 120.0;
END_VAR
VAR_OUTPUT
  alarm : BOOL;
END_VAR
VAR
  holdTimer : TON;
  overCount : INT;
END_VAR

holdTimer(IN := run AND (speed > maxSpeed), PT := T#500ms);
IF holdTimer.Q THEN
  alarm := TRUE;
  overCount := overCount + 1;
ELSIF NOT run THEN
  alarm := FALSE;
END_IF;
END_FUNCTION_BLOCK
"""

VALID["fb_pump_control"] = """\
FUNCTION_BLOCK FB_PumpControl
VAR_INPUT
  start : BOOL;
  stop : BOOL;
  levelLow : BOOL;
END_VAR
VAR_OUTPUT
  pumpOn : BOOL;
  faultLamp : BOOL;
END_VAR
VAR
  step : INT;
  spinUp : TON;
END_VAR

spinUp(IN := step = 1, PT := T#2s);
CASE step OF
  0:
    faultLamp := FALSE;
    IF start AND NOT stop THEN
      step := 1;
    END_IF;
  1:
    IF spinUp.Q THEN
      step := 2;
    END_IF;
  2:
    pumpOn := TRUE;
    IF stop OR levelLow THEN
      pumpOn := FALSE;
      step := 0;
    END_IF;
ELSE
  step := 0;
END_CASE;
END_FUNCTION_BLOCK
"""

VALID["fn_clamp"] = """\
FUNCTION Clamp : REAL
VAR_INPUT
  x : REAL;
  lo : REAL;
  hi : REAL;
END_VAR

IF x < lo THEN
  Clamp := lo;
ELSIF x > hi THEN
  Clamp := hi;
ELSE
  Clamp := x;
END_IF;
END_FUNCTION
"""

VALID["prog_traffic_light"] = """\
PROGRAM TrafficLight
VAR CONSTANT
  GREEN_TIME : TIME := T#20s;
  AMBER_TIME : TIME := T#4s;
END_VAR
VAR
  phase : INT;
  phaseTimer : TON;
  red : BOOL;
  amber : BOOL;
  green : BOOL;
END_VAR

phaseTimer(IN := TRUE, PT := GREEN_TIME);
CASE phase OF
  0:
    green := TRUE;
    amber := FALSE;
    red := FALSE;
    IF phaseTimer.Q THEN
      phase := 1;
    END_IF;
  1:
    green := FALSE;
    amber := TRUE;
    IF phaseTimer.ET > AMBER_TIME THEN
      phase := 2;
    END_IF;
  2:
    amber := FALSE;
    red := TRUE;
ELSE
  phase := 0;
END_CASE;
END_PROGRAM
"""

VALID["fb_tank_level"] = """\
// Hysteresis control for a buffer tank.
FUNCTION_BLOCK FB_TankLevel
VAR_INPUT
  level : REAL;
  fillStart : REAL := 20.0;
  fillStop : REAL := 80.0;
END_VAR
VAR_OUTPUT
  fillValve : BOOL;
  overflow : BOOL;
END_VAR

IF level <= fillStart THEN
  fillValve := TRUE;
ELSIF level >= fillStop THEN
  fillValve := FALSE;
END_IF;
overflow := level > 95.0;
END_FUNCTION_BLOCK
"""

VALID["fb_edge_counter"] = """\
FUNCTION_BLOCK FB_EdgeCounter
VAR_INPUT
  pulse : BOOL;
  reset : BOOL;
  limit : INT := 100;
END_VAR
VAR_OUTPUT
  atLimit : BOOL;
  count : INT;
END_VAR
VAR
  edge : R_TRIG;
  counter : CTU;
END_VAR

edge(CLK := pulse);
counter(CU := edge.Q, R := reset, PV := limit);
atLimit := counter.Q;
count := counter.CV;
END_FUNCTION_BLOCK
"""

VALID["fn_scale"] = """\
(* Scales a raw ADC reading into engineering units. *)
FUNCTION Scale : REAL
VAR_INPUT
  raw : INT;
  lo : REAL;
  hi : REAL;
END_VAR

Scale := lo + (hi - lo) * (INT_TO_REAL(raw) / 32767.0);
END_FUNCTION
"""

VALID["fb_stamping_press"] = """\
FUNCTION_BLOCK FB_StampingPress
VAR_INPUT
  leftPalm : BOOL;
  rightPalm : BOOL;
  guardClosed : BOOL;
END_VAR
VAR_OUTPUT
  ram : BOOL;
END_VAR
VAR
  window : TON;
END_VAR

(* both palm buttons inside 300 ms, guard shut *)
window(IN := leftPalm OR rightPalm, PT := T#300ms);
IF leftPalm AND rightPalm AND guardClosed AND NOT window.Q THEN
  ram := TRUE;
ELSE
  ram := FALSE;
END_IF;
END_FUNCTION_BLOCK
"""

VALID["prog_mixer"] = """\
PROGRAM Mixer
VAR
  recipe : ARRAY[1..5] OF REAL := [10.0, 2.5, 0.5, 40.0, 1.0];
  total : REAL;
  i : INT;
  dosing : BOOL;
END_VAR

total := 0.0;
FOR i := 1 TO 5 DO
  total := total + recipe[i];
END_FOR;
dosing := total > 50.0;
END_PROGRAM
"""

VALID["fb_debounce"] = """\
FUNCTION_BLOCK FB_Debounce
VAR_INPUT
  raw : BOOL;
  settle : TIME := T#20ms;
END_VAR
VAR_OUTPUT
  clean : BOOL;
END_VAR
VAR
  onDelay : TON;
  offDelay : TOF;
END_VAR

onDelay(IN := raw, PT := settle);
offDelay(IN := onDelay.Q, PT := settle);
clean := offDelay.Q;
END_FUNCTION_BLOCK
"""

VALID["fn_mean3"] = """\
FUNCTION Mean3 : REAL
VAR_INPUT
  a : REAL;
  b : REAL;
  c : REAL;
END_VAR
VAR
  peak : REAL;
END_VAR

peak := MAX(a, b, c);
Mean3 := LIMIT(MIN(a, b, c), (a + b + c) / 3.0, peak);
END_FUNCTION
"""

VALID["fb_alarm_latch"] = """\
FUNCTION_BLOCK FB_AlarmLatch
VAR_INPUT
  condition : BOOL;
  acknowledge : BOOL;
END_VAR
VAR_OUTPUT
  active : BOOL;
END_VAR
VAR
  latch : SR;
END_VAR

latch(S1 := condition, R := acknowledge AND NOT condition);
active := latch.Q1;
IF active AND acknowledge THEN
  active := latch.Q1;
END_IF;
END_FUNCTION_BLOCK
"""

VALID["prog_batch_dosing"] = """\
PROGRAM BatchDosing
VAR
  weight : REAL;
  target : REAL := 125.0;
  coarse : BOOL;
  fine : BOOL;
  settled : INT;
END_VAR

settled := 0;
REPEAT
  coarse := weight < (target - 5.0);
  fine := NOT coarse AND (weight < target);
  settled := settled + 1;
UNTIL weight >= target OR settled > 200
END_REPEAT;
coarse := FALSE;
fine := FALSE;
END_PROGRAM
"""

VALID["fb_axis_homing"] = """\
FUNCTION_BLOCK FB_AxisHoming
VAR_INPUT
  start : BOOL;
  homeSwitch : BOOL;
  position : DINT;
END_VAR
VAR_OUTPUT
  jogMinus : BOOL;
  homed : BOOL;
  state : INT;
END_VAR

CASE state OF
  0:
    homed := FALSE;
    IF start THEN
      state := 10;
    END_IF;
  10..19:
    jogMinus := TRUE;
    IF homeSwitch THEN
      jogMinus := FALSE;
      state := 20;
    END_IF;
  20:
    IF position = 0 THEN
      homed := TRUE;
      state := 30;
    END_IF;
  30:
    homed := TRUE;
ELSE
  state := 0;
END_CASE;
END_FUNCTION_BLOCK
"""

VALID["fn_crc_step"] = """\
FUNCTION CrcStep : WORD
VAR_INPUT
  acc : WORD;
  data : BYTE;
END_VAR
VAR
  mixed : WORD;
  i : INT;
END_VAR

mixed := acc XOR BYTE_TO_WORD(data);
FOR i := 1 TO 8 DO
  IF (mixed AND WORD#16#0001) = WORD#16#0001 THEN
    mixed := SHR(mixed, 1) XOR WORD#16#A001;
  ELSE
    mixed := SHR(mixed, 1);
  END_IF;
END_FOR;
CrcStep := mixed;
END_FUNCTION
"""

VALID["fb_signal_filter"] = """\
FUNCTION_BLOCK FB_SignalFilter
VAR_INPUT
  sample : REAL;
END_VAR
VAR_OUTPUT
  smoothed : REAL;
END_VAR
VAR
  window : ARRAY[1..10] OF REAL;
  sum : REAL;
  i : INT;
END_VAR

FOR i := 9 TO 1 BY -1 DO
  window[i + 1] := window[i];
END_FOR;
window[1] := sample;
sum := 0.0;
FOR i := 1 TO 10 DO
  sum := sum + window[i];
END_FOR;
smoothed := sum / 10.0;
END_FUNCTION_BLOCK
"""

VALID["prog_sorting_station"] = """\
PROGRAM SortingStation
VAR
  lamp AT %QX0.1 : BOOL;
  divert AT %QX0.2 : BOOL;
  heavy : BOOL;
  itemSeen : R_TRIG;
END_VAR

itemSeen(CLK := "ITEM SENSOR");
IF itemSeen.Q AND "RED BTN" THEN
  lamp := TRUE;
END_IF;
IF heavy THEN
  divert := TRUE;
ELSE
  divert := FALSE;
END_IF;
END_PROGRAM
"""

VALID["fb_heater_pid_lite"] = """\
FUNCTION_BLOCK FB_HeaterPidLite
VAR_INPUT
  setpoint : REAL;
  actual : REAL;
  kp : REAL := 2.0;
  ki : REAL := 0.1;
END_VAR
VAR_OUTPUT
  output : REAL;
END_VAR
VAR
  err : REAL;
  integral : REAL;
END_VAR

err := setpoint - actual;
integral := LIMIT(-50.0, integral + err * ki, 50.0);
output := LIMIT(0.0, kp * err + integral, 100.0);
END_FUNCTION_BLOCK
"""

VALID["fn_bcd_to_int"] = """\
FUNCTION BcdToInt : INT
VAR_INPUT
  bcd : WORD;
END_VAR
VAR
  remaining : WORD;
  place : INT;
  value : INT;
END_VAR

remaining := bcd;
place := 1;
value := 0;
WHILE remaining <> WORD#16#0000 DO
  value := value + WORD_TO_INT(remaining AND WORD#16#000F) * place;
  remaining := SHR(remaining, 4);
  place := place * 10;
END_WHILE;
BcdToInt := value;
END_FUNCTION
"""

VALID["fb_shift_register"] = """\
FUNCTION_BLOCK FB_ShiftRegister
VAR_INPUT
  clock : BOOL;
  dataIn : BOOL;
END_VAR
VAR_OUTPUT
  dataOut : BOOL;
END_VAR
VAR
  bits : ARRAY[0..15] OF BOOL;
  tick : R_TRIG;
  i : INT;
END_VAR

tick(CLK := clock);
IF tick.Q THEN
  dataOut := bits[15];
  FOR i := 15 TO 1 BY -1 DO
    bits[i] := bits[i - 1];
  END_FOR;
  bits[0] := dataIn;
END_IF;
END_FUNCTION_BLOCK
"""

VALID["prog_palletizer"] = """\
TYPE
  T_Pallet : STRUCT
    rows : INT;
    layers : INT;
    full : BOOL;
  END_STRUCT;
END_TYPE

VAR_GLOBAL
  stationId : INT := 7;
END_VAR

PROGRAM Palletizer
VAR
  pallet : T_Pallet;
  placed : INT;
END_VAR

IF NOT pallet.full THEN
  placed := placed + 1;
  pallet.rows := placed MOD 4;
  pallet.layers := placed / 4;
  pallet.full := pallet.layers >= 6;
END_IF;
IF pallet.full AND (stationId > 0) THEN
  placed := 0;
END_IF;
END_PROGRAM
"""

VALID["fb_runtime_meter"] = """\
FUNCTION_BLOCK FB_RuntimeMeter
VAR_INPUT
  running : BOOL;
  tick1s : BOOL;
END_VAR
VAR_OUTPUT
  hours : UDINT;
  seconds : UDINT;
END_VAR
VAR
  edge : R_TRIG;
END_VAR
edge(CLK := tick1s AND running);
IF edge.Q THEN
  seconds := seconds + 1;
END_IF;
IF seconds >= 3600 THEN
  hours := hours + 1;
  seconds := 0;
END_IF;
END_FUNCTION_BLOCK
"""

VALID["fn_string_pad"] = """\
FUNCTION PadRight : STRING
VAR_INPUT
  text : STRING[64];
  width : INT;
END_VAR
VAR
  result : STRING[64];
END_VAR

result := text;
WHILE LEN(result) < width DO
  result := CONCAT(result, ' ');
END_WHILE;
PadRight := result;
END_FUNCTION
"""

VALID["fb_two_speed_motor"] = """\
FUNCTION_BLOCK FB_TwoSpeedMotor
VAR_INPUT
  speedSelect : INT;
  enable : BOOL;
END_VAR
VAR_OUTPUT
  low : BOOL;
  high : BOOL;
END_VAR
VAR
  coast : TOF;
END_VAR

coast(IN := enable, PT := T#1500ms);
IF NOT coast.Q THEN
  low := FALSE;
  high := FALSE;
ELSIF speedSelect = 1 THEN
  low := TRUE;
  high := FALSE;
ELSIF speedSelect = 2 THEN
  low := FALSE;
  high := TRUE;
ELSE
  low := FALSE;
  high := FALSE;
END_IF;
END_FUNCTION_BLOCK
"""

VALID["prog_car_wash"] = """\
TYPE
  E_Stage : (ST_IDLE, ST_SOAP, ST_BRUSH, ST_RINSE, ST_DRY);
END_TYPE

PROGRAM CarWash
VAR
  stage : E_Stage;
  coin : BOOL;
  stageDone : BOOL;
END_VAR

CASE stage OF
  ST_IDLE:
    IF coin THEN
      stage := ST_SOAP;
    END_IF;
  ST_SOAP:
    IF stageDone THEN
      stage := ST_BRUSH;
    END_IF;
  ST_BRUSH:
    IF stageDone THEN
      stage := ST_RINSE;
    END_IF;
  ST_RINSE:
    IF stageDone THEN
      stage := ST_DRY;
    END_IF;
  ST_DRY:
    IF stageDone THEN
      stage := ST_IDLE;
    END_IF;
END_CASE;
END_PROGRAM
"""

VALID["fb_valve_sequencer"] = """\
FUNCTION_BLOCK FB_ValveSequencer
VAR_INPUT
  advance : BOOL;
END_VAR
VAR_IN_OUT
  sequence : ARRAY[1..8] OF INT;
END_VAR
VAR_OUTPUT
  activeValve : INT;
END_VAR
VAR
  i : INT;
  edge : R_TRIG;
END_VAR

edge(CLK := advance);
IF edge.Q THEN
  activeValve := 0;
  FOR i := 1 TO 8 DO
    IF sequence[i] > 0 THEN
      activeValve := sequence[i];
      sequence[i] := 0;
      EXIT;
    END_IF;
  END_FOR;
END_IF;
END_FUNCTION_BLOCK
"""

VALID["fn_deadband"] = """\
FUNCTION Deadband : REAL
VAR_INPUT
  value : REAL;
  width : REAL;
END_VAR

IF ABS(value) <= width THEN
  Deadband := 0.0;
ELSE
  Deadband := value;
END_IF;
END_FUNCTION
"""

VALID["fb_gate_control"] = """\
FUNCTION_BLOCK FB_GateControl
VAR_INPUT
  openCmd : BOOL;
  closeCmd : BOOL;
  photoCell : BOOL;
END_VAR
VAR_OUTPUT
  motorOpen : BOOL;
  motorClose : BOOL;
END_VAR
VAR
  closing : RS;
  released : F_TRIG;
END_VAR
released(CLK := photoCell);
closing(S := closeCmd AND NOT photoCell, R1 := openCmd OR released.Q);
motorClose := closing.Q1;
motorOpen := openCmd AND NOT motorClose;
END_FUNCTION_BLOCK
"""

VALID["fb_blink"] = """\
FUNCTION_BLOCK FB_Blink
VAR_INPUT
  enable : BOOL;
  period : TIME := T#1s;
END_VAR
VAR_OUTPUT
  out : BOOL;
END_VAR
VAR
  phaseA : TON;
  phaseB : TON;
END_VAR

phaseA(IN := enable AND NOT phaseB.Q, PT := period);
phaseB(IN := phaseA.Q, PT := period);
out := phaseA.Q;
END_FUNCTION_BLOCK
"""

VALID["fn_celsius_to_raw"] = """\
FUNCTION CelsiusToRaw : INT
VAR_INPUT
  celsius : REAL;
END_VAR
VAR CONSTANT
  SPAN : REAL := 27648.0;
END_VAR

CelsiusToRaw := REAL_TO_INT((celsius / 100.0) * SPAN);
END_FUNCTION
"""

VALID["prog_parking_counter"] = """\
PROGRAM ParkingCounter
VAR
  carIn : BOOL;
  carOut : BOOL;
  gateLocked : BOOL;
  tally : CTUD;
  spaces : INT := 50;
END_VAR

tally(CU := carIn, CD := carOut, R := FALSE, LD := FALSE, PV := spaces);
gateLocked := tally.QU;
IF tally.CV < 0 THEN
  gateLocked := FALSE;
END_IF;
END_PROGRAM
"""

VALID["fb_bin_select"] = """\
FUNCTION_BLOCK FB_BinSelect
VAR_INPUT
  grade : INT;
END_VAR
VAR_OUTPUT
  gate : INT;
END_VAR

CASE grade OF
  -1:
    gate := 0;
  0, 1:
    gate := 1;
  2..4:
    gate := 2;
  5, 6, 7:
    gate := 3;
ELSE
  gate := 4;
END_CASE;
END_FUNCTION_BLOCK
"""


# (broken name, source name, kind, mutation). Mutations locate their target line by
# content, so edits to the valid sources keep the table stable.
# kinds: deleted_semicolon | misspelled_keyword | removed_end | unknown_type
MUTATIONS = [
    ("fb_conveyor_guard_nosemi", "fb_conveyor_guard", "deleted_semicolon", ("del_semi", "alarm := TRUE;")),
    ("fn_clamp_nosemi", "fn_clamp", "deleted_semicolon", ("del_semi", "Clamp := lo;")),
    ("fb_tank_level_nosemi", "fb_tank_level", "deleted_semicolon", ("del_semi", "level : REAL;")),
    ("prog_mixer_nosemi", "prog_mixer", "deleted_semicolon", ("del_semi", "total := total + recipe[i];")),
    ("fb_debounce_nosemi", "fb_debounce", "deleted_semicolon", ("del_semi", "onDelay(IN := raw, PT := settle);")),
    ("prog_batch_dosing_nosemi", "prog_batch_dosing", "deleted_semicolon", ("del_semi", "settled := settled + 1;")),
    ("fb_heater_pid_lite_nosemi", "fb_heater_pid_lite", "deleted_semicolon", ("del_semi", "err := setpoint - actual;")),
    ("fb_pump_control_badkw", "fb_pump_control", "misspelled_keyword", ("replace", "IF start AND NOT stop THEN", "FI start AND NOT stop THEN")),
    ("prog_traffic_light_badkw", "prog_traffic_light", "misspelled_keyword", ("replace", "CASE phase OF", "CAES phase OF")),
    ("fb_edge_counter_badkw", "fb_edge_counter", "misspelled_keyword", ("replace", "VAR_OUTPUT", "VAR_OUTPT")),
    ("fn_mean3_badkw", "fn_mean3", "misspelled_keyword", ("replace", "FUNCTION Mean3", "FUNCTON Mean3")),
    ("fb_stamping_press_badkw", "fb_stamping_press", "misspelled_keyword", ("replace", "END_IF;", "END_FI;")),
    ("fn_bcd_to_int_badkw", "fn_bcd_to_int", "misspelled_keyword", ("replace", "WHILE remaining", "WHLE remaining")),
    ("fb_two_speed_motor_badkw", "fb_two_speed_motor", "misspelled_keyword", ("replace", "ELSIF speedSelect = 1", "ELSEIF speedSelect = 1")),
    ("fb_alarm_latch_noend", "fb_alarm_latch", "removed_end", ("remove_line", "END_IF;", 0)),
    ("fb_axis_homing_noend", "fb_axis_homing", "removed_end", ("remove_line", "END_CASE;", 0)),
    ("fb_shift_register_noend", "fb_shift_register", "removed_end", ("remove_line", "END_FOR;", 0)),
    ("prog_palletizer_noend", "prog_palletizer", "removed_end", ("remove_line", "END_PROGRAM", 0)),
    ("fb_runtime_meter_noend", "fb_runtime_meter", "removed_end", ("remove_line", "END_VAR", -1)),
    ("prog_car_wash_noend", "prog_car_wash", "removed_end", ("remove_line", "END_CASE;", 0)),
    ("fb_gate_control_noend", "fb_gate_control", "removed_end", ("remove_line", "END_FUNCTION_BLOCK", 0)),
    ("fn_scale_badtype", "fn_scale", "unknown_type", ("replace", "lo : REAL;", "lo : REEL;")),
    ("prog_sorting_station_badtype", "prog_sorting_station", "unknown_type", ("replace", "heavy : BOOL;", "heavy : BOOLEAN;")),
    ("fb_valve_sequencer_badtype", "fb_valve_sequencer", "unknown_type", ("replace", "activeValve : INT;", "activeValve : TUPLE OF (INT, INT);")),
    ("fn_crc_step_badtype", "fn_crc_step", "unknown_type", ("replace", "mixed : WORD;", "mixed : WORD16;")),
    ("fb_signal_filter_badtype", "fb_signal_filter", "unknown_type", ("replace", "smoothed : REAL;", "smoothed : FLOAT;")),
    ("fn_string_pad_badtype", "fn_string_pad", "unknown_type", ("replace", "text : STRING[64];", "text : TEXT;")),
    ("fn_deadband_badtype", "fn_deadband", "unknown_type", ("replace", "width : REAL;", "width : TUPLE OF (INT, INT);")),
]


def _find_line(lines: list[str], needle: str, occurrence: int = 0) -> int:
    hits = [i for i, line in enumerate(lines) if needle in line]
    if not hits:
        raise SystemExit(f"no line contains {needle!r}")
    if occurrence == 0 and len(hits) > 1:
        raise SystemExit(f"{needle!r} is ambiguous: lines {[h + 1 for h in hits]}")
    return hits[occurrence]


def apply_mutation(text: str, mutation: tuple) -> tuple[str, int]:
    """Apply one mutation; returns (mutated text, 1-based line to expect the first
    diagnostic near)."""
    lines = text.split("\n")
    op = mutation[0]
    if op == "del_semi":
        idx = _find_line(lines, mutation[1])
        line = lines[idx]
        semi = line.rindex(";")
        lines[idx] = line[:semi] + line[semi + 1 :]
        return "\n".join(lines), idx + 1
    if op == "replace":
        old, new = mutation[1], mutation[2]
        idx = _find_line(lines, old)
        lines[idx] = lines[idx].replace(old, new)
        return "\n".join(lines), idx + 1
    if op == "remove_line":
        needle, occurrence = mutation[1], mutation[2]
        idx = _find_line(lines, needle, occurrence)
        removed = lines.pop(idx)
        assert removed.strip().startswith("END_"), f"not a closer: {removed!r}"
        return "\n".join(lines), min(idx + 1, len(lines))
    raise ValueError(op)


def main() -> int:
    root = Path(__file__).resolve().parents[1] / "tests" / "data" / "corpus"
    valid_dir = root / "valid"
    broken_dir = root / "broken"
    valid_dir.mkdir(parents=True, exist_ok=True)
    broken_dir.mkdir(parents=True, exist_ok=True)

    for name, text in sorted(VALID.items()):
        report = check(text, file_id=name)
        if not report.passed:
            for d in report.diagnostics:
                print(f"  {name}: {d.code} {d.message} @{d.line}:{d.column}")
            raise SystemExit(f"valid corpus file {name} does not pass the checker")
        (valid_dir / f"{name}.st").write_text(text, encoding="utf-8")

    manifest = {}
    for broken_name, source_name, kind, mutation in MUTATIONS:
        mutated, line = apply_mutation(VALID[source_name], mutation)
        report = check(mutated, file_id=broken_name)
        if report.passed:
            raise SystemExit(f"broken corpus file {broken_name} still passes")
        first = first_error(report)
        if abs(first.line - line) > 1:
            raise SystemExit(
                f"{broken_name}: first diagnostic at line {first.line}, "
                f"mutation at line {line} ({first.code}: {first.message})"
            )
        (broken_dir / f"{broken_name}.st").write_text(mutated, encoding="utf-8")
        manifest[f"{broken_name}.st"] = {
            "source": f"{source_name}.st",
            "kind": kind,
            "line": line,
        }

    (root / "mutations.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote {len(VALID)} valid and {len(MUTATIONS)} broken files under {root}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

from __future__ import annotations

import json
from pathlib import Path

import pytest

from mpspace.scenario import (OPS, ScenarioError, UpToSigns, ZeroSet, explain, matches, parse_scenario,
                              report_failed, report_text, run_scenario, strip_timing, task_order)

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "mpspace" / "scenarios"


def test_empty_scenario_gives_empty_report():
    report = run_scenario({"name": "empty", "tasks": []})
    assert report["tasks"] == []
    assert report["summary"] == {"pass": 0, "fail": 0, "error": 0, "computed": 0}
    assert not report_failed(report)


def test_parse_error_has_line_and_column():
    with pytest.raises(ScenarioError) as err:
        parse_scenario('{\n  "tasks": [\n    }\n', "bad.json")
    assert str(err.value).startswith("bad.json:3:5")


@pytest.mark.parametrize("text,needle", [
    ('{"tasks": [{"op": "colength"}]}', "id and an op"),
    ('{"tasks": [{"id": "a", "op": "nope"}]}', "unknown op"),
    ('{"tasks": [{"id": "a", "op": "colength"}, {"id": "a", "op": "colength"}]}', "duplicate"),
    ('{"tasks": [{"id": "a", "op": "colength", "expected": {"colength": 1}}]}', "provenance"),
    ('[]', "JSON object"),
])
def test_validation_errors(text, needle):
    with pytest.raises(ScenarioError) as err:
        parse_scenario(text)
    assert needle in str(err.value)


def test_task_order_respects_references():
    tasks = [{"id": "b", "op": "colength", "args": {"x": "@a.colength"}},
             {"id": "a", "op": "colength", "args": {}}]
    waves = task_order(tasks)
    assert [[t["id"] for t in w] for w in waves] == [["a"], ["b"]]


def test_reference_cycle_rejected():
    tasks = [{"id": "a", "op": "colength", "args": {"x": "@b.v"}},
             {"id": "b", "op": "colength", "args": {"x": "@a.v"}}]
    with pytest.raises(ScenarioError):
        task_order(tasks)


def test_failing_expectation_is_reported():
    data = {"name": "t", "tasks": [
        {"id": "c", "op": "colength", "args": {"ideal": {"variables": "x y", "gens": ["x^2", "y^2"]}},
         "expected": {"colength": 5}, "provenance": "deliberately wrong"}]}
    report = run_scenario(data)
    rec = report["tasks"][0]
    assert rec["status"] == "fail" and rec["result"]["colength"] == 4
    assert report_failed(report)
    assert "MISMATCH" in report_text(report)


def test_errors_propagate_to_dependents():
    data = {"name": "t", "tasks": [
        {"id": "c", "op": "colength", "args": {"ideal": {"variables": "x y", "gens": ["x*y"]}}},
        {"id": "d", "op": "ledger", "args": {"rows": [{"coeffs": {"a": 1}, "rhs": "@c.colength"}]}}]}
    report = run_scenario(data)
    assert [r["status"] for r in report["tasks"]] == ["error", "error"]
    assert "depends on failed" in report["tasks"][1]["error"]
    assert not report_failed(report)


def test_assumption_flag_can_be_switched_off():
    rows = [{"coeffs": {"a": 1}, "rhs": 1, "requires": "houston-concentration"},
            {"coeffs": {"a": 1, "b": -1}, "rhs": 0}]
    on = run_scenario({"tasks": [{"id": "l", "op": "ledger", "args": {"rows": rows}}]})
    off = run_scenario({"assumptions": {"houston-concentration": False},
                        "tasks": [{"id": "l", "op": "ledger", "args": {"rows": rows}}]})
    assert on["tasks"][0]["result"]["values"] == {"a": 1, "b": 1}
    assert "houston-concentration" in on["tasks"][0]["assumptions"]
    assert off["tasks"][0]["result"]["unique"] is False


def test_value_matching():
    assert matches({"a": [1, 2]}, {"a": [1, 2]})
    assert not matches({"a": [1, 2]}, {"a": [2, 1]})
    assert matches(UpToSigns([[1, -1]]), [[-1, -1]])
    from mpspace import Ideal, Ring
    R = Ring("x y")
    assert matches(ZeroSet(Ideal(R, ["x^2", "y"])), ["x", "y^3"])
    assert not matches(Ideal(R, ["x^2", "y"]), ["x", "y^3"])
    assert matches(Ideal(R, ["x + y", "y"]), ["x", "y"])


def test_explain_known_and_unknown():
    text = explain("mu-image")
    assert text.startswith("mu-image:") and "anchors:" in text
    with pytest.raises(ScenarioError):
        explain("no-such-task")
    assert all(explain(name) for name in OPS)


def test_smoke_scenario_passes():
    report = run_scenario(str(SCENARIOS / "smoke.json"))
    assert report["summary"]["pass"] == len(report["tasks"])
    again = run_scenario(str(SCENARIOS / "smoke.json"))
    assert json.dumps(strip_timing(report)) == json.dumps(strip_timing(again))


def test_bundled_scenarios_parse():
    for path in SCENARIOS.glob("*.json"):
        data = parse_scenario(path.read_text(), path.name)
        for t in data["tasks"]:
            assert t.get("provenance") or "expected" not in t

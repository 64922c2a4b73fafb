import json
import pathlib

import pytest

import humanoid_coa as hc

ROOT = pathlib.Path(__file__).resolve().parents[2]


def test_task_classes():
    classes = hc.task_classes()
    assert len(classes) == 15
    assert "navigation_under_occlusion" in classes


def test_softmax_normalizes():
    w = hc.softmax([1.0, 2.0, 3.0])
    assert abs(sum(w) - 1.0) < 1e-9
    assert w[2] > w[1] > w[0]


def test_scenario_round_trip():
    text = hc.make_scenario("object_grasping")
    spec = json.loads(text)
    assert spec["task_class"] == "object_grasping"
    assert spec["regions"] and spec["objects"]


def test_parse_and_validate_plan():
    parsed = hc.parse_plan("FIND(cup_1)\nGRASP(cup_1, right)")
    assert parsed["ok"]
    bad = hc.parse_plan("JUMP(cup_1)")
    assert not bad["ok"]
    assert bad["diagnostics"][0][1] == "UnknownAction"

    scenario = hc.make_scenario("object_grasping")
    report = hc.validate_plan(parsed["plan"], scenario)
    assert "executable" in report


def test_describe_and_decode():
    scenario = hc.make_scenario("object_grasping")
    text = hc.describe_scene(scenario, seed=7)
    assert text
    plan = hc.decode_plan(scenario, seed=7)
    assert hc.parse_plan(plan)["ok"]


def test_run_episode_succeeds_on_clean_fixture():
    fixture = (ROOT / "scenarios" / "fixtures" / "target_approach.json").read_text()
    result = hc.run_episode(fixture, seed=7)
    assert result["executable"]
    assert result["success"]


def test_run_suite_reports():
    report = hc.run_suite(ROOT / "scenarios" / "suite", seeds=[1], jobs=4)
    assert report["episodes"] == 15
    assert 0 <= report["success"] <= report["episodes"]


def test_error_mapping():
    with pytest.raises(hc.CoaError):
        hc.run_episode("{not json at all", seed=0)

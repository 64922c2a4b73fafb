"""Chain-of-affordance planning: scenario generation, decoding, and episode harness."""

import json

from ._core import (
    CoaError,
    describe_scene,
    decode_plan,
    make_scenario,
    parse_plan,
    softmax,
    task_classes,
)
from ._core import run_episode as _run_episode_json
from ._core import run_suite as _run_suite_json
from ._core import validate_plan as _validate_plan_json

__all__ = [
    "CoaError",
    "decode_plan",
    "describe_scene",
    "make_scenario",
    "parse_plan",
    "run_episode",
    "run_suite",
    "softmax",
    "task_classes",
    "validate_plan",
]


def run_episode(scenario_json, seed=0, lambda_aff=1.0, lambda_sp=1.0, lambda_body=1.0):
    """Run one closed-loop episode; returns the result as a dict."""
    return json.loads(_run_episode_json(scenario_json, seed, lambda_aff, lambda_sp, lambda_body))


def run_suite(suite_directory, seeds, jobs=1, lambda_aff=1.0, lambda_sp=1.0, lambda_body=1.0):
    """Run every (scenario, seed) pair in a suite directory; returns the report as a dict."""
    return json.loads(
        _run_suite_json(str(suite_directory), list(seeds), jobs, lambda_aff, lambda_sp, lambda_body)
    )


def validate_plan(plan_text, scenario_json):
    """Static executability report for plan text against a scenario; returns a dict."""
    return json.loads(_validate_plan_json(plan_text, scenario_json))

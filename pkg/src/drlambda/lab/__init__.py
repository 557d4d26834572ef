"""Scenario catalog, end-to-end runs and the command line interface."""

from .scenarios import Scenario, builtin_scenarios, get_scenario, scenario_from_dict
from .runner import RunReport, SweepReport, estimate_quantity, run_scenario, sweep_lambda, verify

__all__ = ["Scenario", "builtin_scenarios", "get_scenario", "scenario_from_dict", "RunReport",
           "SweepReport", "estimate_quantity", "run_scenario", "sweep_lambda", "verify"]

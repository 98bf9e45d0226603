"""Packet-level routing protocol simulator."""

from .graph import UNREACHABLE, Graph, NegativeCycleDetected, bellman_ford, dijkstra, extract_path
from .kernel import Simulation
from .metrics import MetricSeries, Report, emit_report
from .runner import compare, run_scenario
from .scenario import ParseError, Scenario, parse_scenario, reference_scenarios, serialize_scenario

__all__ = [
    "UNREACHABLE", "Graph", "NegativeCycleDetected", "bellman_ford", "dijkstra", "extract_path",
    "Simulation", "MetricSeries", "Report", "emit_report", "compare", "run_scenario",
    "ParseError", "Scenario", "parse_scenario", "reference_scenarios", "serialize_scenario",
]

"""Run scenarios and write their reports."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

from .kernel import Simulation
from .metrics import Report, emit_report
from .scenario import PROTOCOLS, Scenario

COMPARE_COLUMNS = (
    "protocol", "generated", "delivered", "dropped_total", "dropped_data", "dropped_control",
    "in_flight", "mean_delay_us", "mean_hops", "convergence_active_s", "control_overhead_bits",
)


def run_scenario(scenario: Scenario, protocol: str | None = None) -> Report:
    if protocol is not None:
        scenario = scenario.with_protocol(protocol)
    report = Simulation(scenario).run()
    if report.generated != report.delivered + report.dropped_data + report.in_flight:
        raise RuntimeError(f"packet accounting broken for {scenario.name}/{scenario.protocol}")
    return report


def compare(scenario: Scenario, out_dir, protocols=PROTOCOLS, jobs: int = 1) -> dict[str, Report]:
    """Run every protocol on ``scenario`` and write per-protocol files plus ``<name>.compare.csv``."""
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = dict(zip(protocols, pool.map(run_scenario, [scenario] * len(protocols), protocols)))
    else:
        reports = {p: run_scenario(scenario, p) for p in protocols}
    for p in protocols:
        emit_report(reports[p], out_dir)
    lines = [",".join(COMPARE_COLUMNS)]
    for p in protocols:
        s = reports[p].summary()
        lines.append(",".join(str(s[c]) for c in COMPARE_COLUMNS))
    with open(os.path.join(out_dir, f"{scenario.name}.compare.csv"), "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return reports

"""Per-bucket metric collection and report files."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = ("time_s", "dropped_pkts", "convergence_active", "mean_delay_us", "mean_hops", "control_overhead_bits")
US = 1_000_000


class MetricSeries:
    """Fixed-width time buckets covering ``[0, duration)``.

    Times handed to the recorders are microseconds.
    """

    def __init__(self, duration: int, bucket: int = 1):
        if bucket <= 0:
            raise ValueError("bucket must be positive")
        self.duration = duration
        self.bucket = bucket
        n = math.ceil(duration / bucket)
        self.dropped = np.zeros(n, dtype=np.int64)
        self.convergence = np.zeros(n, dtype=np.int8)
        self.delay_sum = np.zeros(n, dtype=np.int64)
        self.delivered = np.zeros(n, dtype=np.int64)
        self.hops_sum = np.zeros(n, dtype=np.int64)
        self.control_bits = np.zeros(n, dtype=np.int64)

    def __len__(self):
        return len(self.dropped)

    def index(self, now_us: int) -> int:
        i = int(now_us // (self.bucket * US))
        if not 0 <= i < len(self):
            raise ValueError(f"time {now_us} us outside the series")
        return i

    def drop(self, now_us):
        self.dropped[self.index(now_us)] += 1

    def delivery(self, now_us, delay_us, hops):
        i = self.index(now_us)
        self.delivered[i] += 1
        self.delay_sum[i] += delay_us
        self.hops_sum[i] += hops

    def table_change(self, now_us):
        self.convergence[self.index(now_us)] = 1

    def control(self, now_us, bits):
        self.control_bits[self.index(now_us)] += bits

    def mean_delay(self):
        """Per-bucket mean delay; NaN where nothing was delivered."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.delivered > 0, self.delay_sum / np.maximum(self.delivered, 1), np.nan)

    def mean_hops(self):
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.delivered > 0, self.hops_sum / np.maximum(self.delivered, 1), np.nan)


def record_metrics(series: MetricSeries, event: str, now_us: int, **values) -> MetricSeries:
    """Functional front end: ``event`` is drop, delivery, table_change or control."""
    if event == "drop":
        series.drop(now_us)
    elif event == "delivery":
        series.delivery(now_us, values["delay_us"], values["hops"])
    elif event == "table_change":
        series.table_change(now_us)
    elif event == "control":
        series.control(now_us, values["bits"])
    else:
        raise ValueError(f"unknown metric event {event!r}")
    return series


@dataclass
class Report:
    scenario: str
    protocol: str
    series: MetricSeries
    generated: int = 0
    delivered: int = 0
    dropped_by_reason: dict = field(default_factory=dict)  # data packets
    control_dropped: int = 0
    in_flight: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def dropped_data(self) -> int:
        return sum(self.dropped_by_reason.values())

    def summary(self) -> dict:
        s = self.series
        delivered = int(s.delivered.sum())
        out = {
            "scenario": self.scenario,
            "protocol": self.protocol,
            "generated": self.generated,
            "delivered": self.delivered,
            "dropped_total": int(s.dropped.sum()),
            "dropped_data": self.dropped_data,
            "dropped_control": self.control_dropped,
        }
        for reason in sorted(self.dropped_by_reason):
            out[f"dropped_{reason}"] = self.dropped_by_reason[reason]
        out["in_flight"] = self.in_flight
        out["mean_delay_us"] = _fmt(s.delay_sum.sum() / delivered) if delivered else ""
        out["mean_hops"] = _fmt(s.hops_sum.sum() / delivered) if delivered else ""
        out["convergence_active_s"] = int(s.convergence.sum()) * s.bucket
        out["control_overhead_bits"] = int(s.control_bits.sum())
        out.update(self.extra)
        return out

    def csv_text(self) -> str:
        s = self.series
        delay, hops = s.mean_delay(), s.mean_hops()
        lines = [",".join(CSV_COLUMNS)]
        for i in range(len(s)):
            lines.append(",".join((
                str(i * s.bucket),
                str(int(s.dropped[i])),
                str(int(s.convergence[i])),
                _fmt(delay[i]),
                _fmt(hops[i]),
                str(int(s.control_bits[i])),
            )))
        return "\n".join(lines) + "\n"

    def summary_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.summary().items())


def _fmt(x) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{float(x):.3f}"


def emit_report(report: Report, out_dir) -> tuple[str, str]:
    """Write ``<name>.<protocol>.csv`` and ``.summary.txt``; returns both paths."""
    os.makedirs(out_dir, exist_ok=True)
    base = os.path.join(out_dir, f"{report.scenario}.{report.protocol}")
    csv_path, summary_path = base + ".csv", base + ".summary.txt"
    with open(csv_path, "w", newline="") as fh:
        fh.write(report.csv_text())
    with open(summary_path, "w") as fh:
        fh.write(report.summary_text())
    return csv_path, summary_path

"""Throughput and energy accounting shared by both protocols."""
from __future__ import annotations

import math
from dataclasses import dataclass


class MetricError(ValueError):
    pass


@dataclass
class RunMetrics:
    successes: int = 0
    failures: int = 0
    tx_time: float = 0.0   # time units spent transmitting, all flows
    horizon: float = 0.0

    def __add__(self, other: "RunMetrics") -> "RunMetrics":
        return RunMetrics(self.successes + other.successes,
                          self.failures + other.failures,
                          self.tx_time + other.tx_time,
                          self.horizon + other.horizon)


def throughput(m: RunMetrics) -> float:
    """Successful flows per time unit."""
    if m.horizon <= 0:
        raise MetricError("throughput undefined for a zero-length horizon")
    return m.successes / m.horizon


def energy_per_success(m: RunMetrics) -> float:
    """Transmission time per successful flow; ``inf`` when nothing succeeded."""
    if m.successes == 0:
        return math.inf
    return m.tx_time / m.successes


def format_metric(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(float(x))

"""Flow traffic model and frame geometry.

Flows arrive as a Poisson process. Each flow carries a load (packets) and a
relative deadline (time units). Deadlines are converted to transmission-slot
counts by the master at the end of each contention phase.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class ConfigError(ValueError):
    """Invalid simulation or experiment parameters."""


class DeadlineExpired(ValueError):
    """The absolute deadline of a flow lies in the past."""


@dataclass(frozen=True)
class FlowSpec:
    id: int
    arrival: float   # generation time t_i
    load: int        # packets l_i
    deadline: float  # relative deadline d_i, time units from arrival

    @property
    def absolute_deadline(self) -> float:
        return self.arrival + self.deadline


@dataclass(frozen=True)
class FrameConfig:
    """Frame geometry: ``T = n_contention + k * n_transmission``."""

    c: int = 3
    n_contention: int = 15
    n_transmission: int = 7
    k: int = 5

    def __post_init__(self):
        if self.c < 1 or self.n_contention < 1 or self.n_transmission < 1:
            raise ConfigError(f"c, N_C, N_T must be >= 1, got {self}")
        if self.k < 2:
            raise ConfigError(f"transmission slot length k must be > 1, got {self.k}")

    @property
    def T(self) -> int:
        return self.n_contention + self.k * self.n_transmission

    @property
    def blocks(self) -> int:
        """Contention blocks per frame."""
        return self.c * self.n_contention

    @classmethod
    def from_arm(cls, arm, c=3, k=5, T=None):
        n_c, n_t = arm
        cfg = cls(c=c, n_contention=n_c, n_transmission=n_t, k=k)
        if T is not None and cfg.T != T:
            raise ConfigError(f"arm {arm} violates N_C + {k}*N_T = {T} (got {cfg.T})")
        return cfg


@dataclass(frozen=True)
class LoadModel:
    """Load distribution plus integer slack interval, both in transmission slots.

    ``kind`` is ``"deterministic"`` (every flow carries ``value`` packets) or
    ``"geometric"`` (support 1, 2, ... with mean ``value``).
    """

    kind: str = "deterministic"
    value: float = 3
    slack_min: int = 2
    slack_max: int = 20

    def __post_init__(self):
        if self.kind not in ("deterministic", "geometric"):
            raise ConfigError(f"unknown load model {self.kind!r}")
        if self.kind == "deterministic" and (self.value < 1 or int(self.value) != self.value):
            raise ConfigError("deterministic load must be a positive integer")
        if self.kind == "geometric" and self.value < 1:
            raise ConfigError("geometric mean load must be >= 1")
        if not 0 < self.slack_min <= self.slack_max:
            raise ConfigError(f"need 0 < slack_min <= slack_max, got [{self.slack_min}, {self.slack_max}]")

    @property
    def mean(self) -> float:
        return float(self.value)

    def sample_loads(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "deterministic":
            return np.full(n, int(self.value), dtype=np.int64)
        return rng.geometric(1.0 / self.value, size=n).astype(np.int64)


def deterministic(value=3, slack=(2, 20)) -> LoadModel:
    return LoadModel("deterministic", value, *slack)


def geometric(mean=1.25, slack=(2, 20)) -> LoadModel:
    return LoadModel("geometric", mean, *slack)


def generate_arrivals(rate, horizon, load_model: LoadModel, rng: np.random.Generator,
                      k: int = 5, first_id: int = 0) -> list[FlowSpec]:
    """Poisson flow arrivals on ``[0, horizon)``, sorted by arrival time.

    Deadlines are ``(load + slack) * k`` time units, slack uniform on the
    integers of ``[slack_min, slack_max]``.
    """
    if not rate > 0:
        raise ConfigError(f"arrival rate must be positive, got {rate}")
    if not horizon > 0:
        raise ConfigError(f"horizon must be positive, got {horizon}")

    times = []
    t = 0.0
    # draw exponential gaps in chunks sized to the expected count
    chunk = max(16, int(rate * horizon * 1.1) + 16)
    while t < horizon:
        gaps = rng.exponential(1.0 / rate, size=chunk)
        arr = t + np.cumsum(gaps)
        times.append(arr)
        t = arr[-1]
    times = np.concatenate(times)
    times = times[times < horizon]
    n = len(times)

    loads = load_model.sample_loads(n, rng)
    slack = rng.integers(load_model.slack_min, load_model.slack_max + 1, size=n)
    deadlines = (loads + slack) * k
    return [FlowSpec(first_id + i, float(times[i]), int(loads[i]), float(deadlines[i]))
            for i in range(n)]


def deadline_to_slots(absolute_deadline, now, cfg: FrameConfig) -> int:
    """Remaining deadline in transmission slots, seen from ``now``.

    ``now`` is the end of a contention phase, so the next ``N_T`` slots end
    at ``now + k, now + 2k, ...`` and each later frame adds ``N_T`` more.
    """
    x = absolute_deadline - now
    if x < 0:
        raise DeadlineExpired(f"deadline {absolute_deadline} already passed at {now}")
    T, k, n_t = cfg.T, cfg.k, cfg.n_transmission
    # divmod keeps {x/T}*T exact for integer-valued x
    frames, rem = divmod(x, T)
    return int(n_t * frames + min(n_t, math.floor(rem / k)))

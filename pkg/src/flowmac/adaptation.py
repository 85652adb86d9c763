"""Online tuning of the MAC parameters.

The contention probability follows a projected stochastic-approximation
step that drives the idle-block fraction to 1/e. The (N_C, N_T) split is
chosen by UCB1, one arm per split, each arm keeping its own probability.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .flows import ConfigError, FrameConfig

log = logging.getLogger(__name__)

INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class PController:
    p: float = 1.0
    delta: float = 0.05


def update_p(ctrl: PController, stats, cfg: FrameConfig) -> PController:
    idle_fraction = stats.idle / cfg.blocks
    p = ctrl.p + ctrl.delta * (idle_fraction - INV_E)
    return PController(min(1.0, max(0.0, p)), ctrl.delta)


def optimal_p(rate, cfg: FrameConfig) -> float:
    """Contention probability maximising expected received requests."""
    if not rate > 0:
        raise ConfigError(f"arrival rate must be positive, got {rate}")
    return min(1.0, cfg.blocks / (rate * cfg.T))


def expected_requests(rate, p, cfg: FrameConfig) -> float:
    """Mean number of singleton contention blocks per phase."""
    load = rate * cfg.T * p
    return load * math.exp(-load / cfg.blocks)


def play_reward(accepted, cfg: FrameConfig, r) -> float:
    if accepted < 0:
        raise ValueError("accepted count must be non-negative")
    reward = accepted / (cfg.c * cfg.T * r)
    if reward > 1.0:
        log.warning("play reward %.4f above 1 (accepted=%d); clamped", reward, accepted)
        reward = 1.0
    return reward


@dataclass
class UcbState:
    arms: list
    r: int = 50
    counts: np.ndarray = None
    means: np.ndarray = None
    controllers: list = None
    n: int = 0
    history: list = field(default_factory=list)  # (arm, reward) audit log

    def __post_init__(self):
        if not self.arms:
            raise ConfigError("UCB needs at least one arm")
        m = len(self.arms)
        if self.counts is None:
            self.counts = np.zeros(m, dtype=np.int64)
        if self.means is None:
            self.means = np.zeros(m)
        if self.controllers is None:
            self.controllers = [PController() for _ in range(m)]

    @classmethod
    def fresh(cls, arms, r=50, p_init=1.0, delta=0.05):
        return cls(list(arms), r, controllers=[PController(p_init, delta) for _ in arms])

    def index(self) -> np.ndarray:
        return self.means + np.sqrt(2.0 * math.log(self.n) / self.counts)


def ucb_select(state: UcbState) -> int:
    unplayed = np.flatnonzero(state.counts == 0)
    if len(unplayed):
        return int(unplayed[0])
    # np.argmax returns the first maximiser, i.e. the lowest index on ties
    return int(np.argmax(state.index()))


def ucb_update(state: UcbState, arm: int, reward: float) -> UcbState:
    if not 0.0 <= reward <= 1.0:
        raise ValueError(f"reward must lie in [0, 1], got {reward}")
    state.counts[arm] += 1
    state.n += 1
    state.means[arm] += (reward - state.means[arm]) / state.counts[arm]
    state.history.append((arm, reward))
    return state

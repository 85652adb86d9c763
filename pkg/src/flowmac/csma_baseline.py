"""Slotted CSMA/CA with binary exponential backoff on a single channel.

Time advances in ticks of one time unit. A flow with backoff ``b`` transmits
once it has sensed the channel idle for ``b`` ticks; transmissions starting on
the same tick collide for their whole duration. Idle stretches are skipped in
one step, so the cost is proportional to the number of channel events.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .flows import ConfigError
from .metrics import RunMetrics


def _pow2(x) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class CsmaParams:
    cw_min: int = 2
    cw_max: int = 16
    max_collisions: int = 3
    packet_duration: int = 5
    freeze: bool = True   # backoff counts down only while the channel is idle

    def __post_init__(self):
        if not (_pow2(self.cw_min) and _pow2(self.cw_max) and self.cw_min <= self.cw_max):
            raise ConfigError(f"contention windows must be powers of two with cw_min <= cw_max, "
                              f"got {self.cw_min}, {self.cw_max}")
        if self.max_collisions < 1:
            raise ConfigError("max_collisions must be >= 1")
        if self.packet_duration < 1:
            raise ConfigError("packet_duration must be >= 1")


@dataclass
class CsmaFlow:
    id: int
    packets_left: int
    absolute_deadline: float
    cw: int
    backoff: int
    successive_collisions: int = 0


def backoff_after_collision(cw, cw_max, rng):
    """Double the window (capped) and draw a backoff uniform on ``{0, ..., cw'-1}``."""
    cw = min(2 * cw, cw_max)
    return cw, int(rng.integers(0, cw))


def run_csma(arrivals, params: CsmaParams, horizon, rng, energy_log=None, trace=None) -> RunMetrics:
    """Simulate the channel over ``[0, horizon)`` ticks.

    A flow is failed once the clock passes its deadline, when one of its
    packets collides ``max_collisions`` times in a row, or when its last packet
    ends after the deadline. Flows still undecided at the horizon are left
    out of the counts. Energy is one unit per transmitting node per tick.

    ``trace``, if given, receives ``(start_tick, sender_ids)`` for every
    transmission attempt.
    """
    k = params.packet_duration
    m = RunMetrics(horizon=float(horizon))
    starts = [math.ceil(f.arrival) for f in arrivals]
    n = len(arrivals)
    i = 0
    active: list[CsmaFlow] = []
    tick = 0

    def charge(flow):
        m.tx_time += k
        if energy_log is not None:
            energy_log[flow.id] = energy_log.get(flow.id, 0) + k

    while tick < horizon:
        while i < n and starts[i] <= tick:
            f = arrivals[i]
            active.append(CsmaFlow(f.id, f.load, f.absolute_deadline, params.cw_min,
                                   int(rng.integers(0, params.cw_min))))
            i += 1
        if active:
            alive = [f for f in active if tick < f.absolute_deadline]
            m.failures += len(active) - len(alive)
            active = alive
        if not active:
            if i >= n:
                break
            tick = starts[i]
            continue

        senders = [f for f in active if f.backoff == 0]
        if not senders:
            step = min(f.backoff for f in active)
            if i < n:
                step = min(step, starts[i] - tick)
            step = min(step, horizon - tick)
            for f in active:
                f.backoff -= step
            tick += step
            continue

        end = tick + k
        for f in senders:
            charge(f)
        if trace is not None:
            trace.append((tick, tuple(f.id for f in senders)))
        done = set()
        if len(senders) == 1:
            f = senders[0]
            f.packets_left -= 1
            f.successive_collisions = 0
            if f.packets_left == 0:
                if end <= f.absolute_deadline:
                    m.successes += 1
                else:
                    m.failures += 1
                done.add(f.id)
            else:
                f.cw = params.cw_min
                f.backoff = int(rng.integers(0, params.cw_min))
        else:
            for f in senders:
                f.successive_collisions += 1
                if f.successive_collisions >= params.max_collisions:
                    m.failures += 1
                    done.add(f.id)
                else:
                    f.cw, f.backoff = backoff_after_collision(f.cw, params.cw_max, rng)

        if not params.freeze:
            sender_ids = {f.id for f in senders}
            for f in active:
                if f.id not in sender_ids:
                    f.backoff = max(0, f.backoff - k)
        if done:
            active = [f for f in active if f.id not in done]
        # flows generated while the channel is busy join with untouched counters
        tick = end

    # undecided flows whose deadline fell inside the horizon have failed
    m.failures += sum(1 for f in active if f.absolute_deadline <= horizon)
    return m

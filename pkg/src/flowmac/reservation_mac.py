"""Frame engine of the reservation MAC.

Each frame runs a contention phase (flows generated during the previous
frame send admission requests in randomly chosen contention blocks), greedy
admission control, and an LLF transmission phase. Flush frames drain the
active set between bandit plays.
"""
from __future__ import annotations

from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .deadline_core import ActiveFlow, ScheduleViolation, admission_control, build_schedule
from .flows import DeadlineExpired, FrameConfig, deadline_to_slots
from .metrics import RunMetrics

EPS = 1e-9


@dataclass
class ContentionStats:
    idle: int = 0
    success: int = 0
    collision: int = 0
    contenders: int = 0

    @property
    def blocks(self) -> int:
        return self.idle + self.success + self.collision


class Contention(NamedTuple):
    requests: list
    stats: ContentionStats
    contenders: list   # ids of flows that transmitted a request


def run_contention_phase(pending, p, cfg: FrameConfig, rng, now) -> Contention:
    """Slotted-ALOHA style request round over ``c * N_C`` blocks.

    Received requests carry the deadline in transmission slots as seen from
    ``now`` (end of the contention phase). Requests whose deadline already
    passed are dropped.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"contention probability must lie in [0, 1], got {p}")
    n_blocks = cfg.blocks
    if not pending:
        return Contention([], ContentionStats(idle=n_blocks), [])

    idx = np.flatnonzero(rng.random(len(pending)) < p)
    picks = np.asarray(rng.integers(0, n_blocks, size=len(idx)), dtype=np.int64)
    occupancy = np.bincount(picks, minlength=n_blocks)
    stats = ContentionStats(
        idle=int(np.count_nonzero(occupancy == 0)),
        success=int(np.count_nonzero(occupancy == 1)),
        collision=int(np.count_nonzero(occupancy > 1)),
        contenders=len(idx),
    )

    requests = []
    for i in idx[occupancy[picks] == 1]:
        flow = pending[i]
        try:
            slots = deadline_to_slots(flow.absolute_deadline, now, cfg)
        except DeadlineExpired:
            continue
        requests.append(ActiveFlow(flow.id, flow.load, slots))
    return Contention(requests, stats, [pending[i].id for i in idx])


@dataclass
class FrameReport:
    accepted: int = 0
    completed: int = 0
    failed: int = 0
    stats: ContentionStats = field(default_factory=ContentionStats)
    energy: float = 0.0


@dataclass
class FlushReport:
    frames: int = 0
    completed: int = 0


@dataclass
class MacState:
    """Mutable state of one reservation-MAC run.

    ``arrivals`` is the full, time-sorted arrival trace; frames consume it
    through ``cursor``.
    """

    arrivals: list
    active: list = field(default_factory=list)
    pending: list = field(default_factory=list)
    clock: float = 0.0
    frame_index: int = 0
    cursor: int = 0
    retry: bool = False
    check: bool = True
    metrics: RunMetrics = field(default_factory=RunMetrics)
    accepted: int = 0
    completed: int = 0
    abs_deadline: dict = field(default_factory=dict)   # admitted id -> wall-clock deadline
    energy_log: dict = field(default_factory=lambda: defaultdict(float))
    slot_log: list = None   # optional list of (time, ids) for every transmission slot

    def __post_init__(self):
        self._times = [f.arrival for f in self.arrivals]

    def take_arrivals(self, until) -> list:
        start = self.cursor
        end = bisect_left(self._times, until, lo=start)
        self.cursor = end
        return self.arrivals[start:end]

    def _fail(self, flows):
        self.metrics.failures += len(flows)

    def _transmit(self, schedule, completed, slot_start, k):
        """Energy, completion bookkeeping and invariant checks for one phase."""
        energy = k * schedule.transmissions
        self.metrics.tx_time += energy
        last_slot = {}
        for s, ids in enumerate(schedule.grid):
            for fid in ids:
                last_slot[fid] = s
                self.energy_log[fid] += k
            if self.slot_log is not None and ids:
                self.slot_log.append((slot_start + s * k, ids))
        if self.check:
            schedule.check()
        for fid in completed:
            finish = slot_start + (last_slot[fid] + 1) * k
            deadline = self.abs_deadline.pop(fid)
            if self.check and finish > deadline + EPS:
                raise ScheduleViolation(f"flow {fid} finished at {finish} after its deadline {deadline}")
        self.metrics.successes += len(completed)
        self.completed += len(completed)
        return energy


def run_frame(state: MacState, cfg: FrameConfig, p, rng) -> FrameReport:
    frame_start = state.clock
    now = frame_start + cfg.n_contention
    pending = state.pending

    requests, stats, contenders = run_contention_phase(pending, p, cfg, rng, now)
    energy = float(len(contenders))
    state.metrics.tx_time += energy
    for fid in contenders:
        state.energy_log[fid] += 1.0

    accepted, state.active = admission_control(state.active, requests, cfg.c)
    accepted_set = set(accepted)
    by_id = {f.id: f for f in pending}
    for fid in accepted:
        state.abs_deadline[fid] = by_id[fid].absolute_deadline
    state.accepted += len(accepted)

    schedule, state.active, completed = build_schedule(state.active, cfg.n_transmission, cfg.c)
    energy += state._transmit(schedule, completed, now, cfg.k)

    # flows that were not admitted lose their only chance, unless retrying
    next_now = frame_start + cfg.T + cfg.n_contention
    failed = [f for f in pending if f.id not in accepted_set]
    carried = []
    if state.retry:
        carried = [f for f in failed if f.absolute_deadline >= next_now]
        failed = [f for f in failed if f.absolute_deadline < next_now]
    state._fail(failed)

    state.pending = carried + state.take_arrivals(frame_start + cfg.T)
    state.clock = frame_start + cfg.T
    state.frame_index += 1
    return FrameReport(len(accepted), len(completed), len(failed), stats, energy)


def run_flush_frames(state: MacState, cfg: FrameConfig, max_frames=None) -> FlushReport:
    """Transmission-only frames of ``T // k`` slots until no flow is active.

    Pending flows and flows generated during flush frames never get a
    contention phase and are failed.
    """
    report = FlushReport()
    if not state.active:
        return report
    state._fail(state.pending)
    state.pending = []
    n_slots = cfg.T // cfg.k
    while state.active and (max_frames is None or report.frames < max_frames):
        frame_start = state.clock
        schedule, state.active, completed = build_schedule(state.active, n_slots, cfg.c)
        state._transmit(schedule, completed, frame_start, cfg.k)
        state._fail(state.take_arrivals(frame_start + cfg.T))
        state.clock = frame_start + cfg.T
        state.frame_index += 1
        report.frames += 1
        report.completed += len(completed)
    return report


def new_state(arrivals, retry=False, check=True) -> MacState:
    """Fresh run state; flows of the first frame contend in the second."""
    return MacState(list(arrivals), retry=retry, check=check)


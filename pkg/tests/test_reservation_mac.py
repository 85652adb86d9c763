import math
from collections import Counter

import numpy as np
import pytest

from flowmac.adaptation import INV_E, expected_requests, optimal_p
from flowmac.deadline_core import ActiveFlow
from flowmac.flows import FlowSpec, FrameConfig, deterministic, generate_arrivals, geometric
from flowmac.metrics import energy_per_success
from flowmac.reservation_mac import (MacState, new_state, run_contention_phase, run_flush_frames,
                                     run_frame)

cfg = FrameConfig(c=3, n_contention=15, n_transmission=7, k=5)


class ForcedRng:
    """Every flow contends and picks the listed blocks in order."""

    def __init__(self, blocks):
        self.blocks = list(blocks)

    def random(self, n):
        return np.zeros(n)

    def integers(self, lo, hi, size):
        return np.array(self.blocks[:size], dtype=np.int64)


def flow(i, t=0.0, load=2, deadline=500.0):
    return FlowSpec(i, t, load, deadline)


def test_contention_without_pending():
    requests, stats, contenders = run_contention_phase([], 0.7, cfg, np.random.default_rng(0), now=15)
    assert requests == [] and contenders == []
    assert stats.idle == cfg.blocks and stats.success == stats.collision == 0


def test_single_contender_is_received():
    requests, stats, _ = run_contention_phase([flow(1)], 1.0, cfg, np.random.default_rng(0), now=15)
    assert [r.id for r in requests] == [1]
    assert stats.success == 1 and stats.idle == cfg.blocks - 1


def test_forced_collision():
    pending = [flow(1), flow(2)]
    requests, stats, contenders = run_contention_phase(pending, 1.0, cfg, ForcedRng([7, 7]), now=15)
    assert requests == []
    assert stats.collision == 1 and stats.success == 0
    assert stats.idle == cfg.blocks - 1
    assert sorted(contenders) == [1, 2]


def test_request_deadline_in_slots():
    # arrival 3, deadline 120 -> absolute 123; now = 15 gives x = 108 -> 2 frames + 1 slot
    requests, _, _ = run_contention_phase([flow(1, 3.0, 2, 120.0)], 1.0, cfg, ForcedRng([0]), now=15)
    assert requests[0].deadline == 2 * 7 + 1


def test_expired_request_is_dropped():
    requests, stats, contenders = run_contention_phase([flow(1, 0.0, 2, 10.0)], 1.0, cfg,
                                                       ForcedRng([0]), now=15)
    assert requests == [] and stats.success == 1 and contenders == [1]


def test_contention_probability_bounds():
    with pytest.raises(ValueError):
        run_contention_phase([flow(1)], 1.5, cfg, np.random.default_rng(0), now=15)


def test_partition_identity_random():
    rng = np.random.default_rng(1)
    for _ in range(200):
        pending = [flow(i) for i in range(rng.poisson(60))]
        _, stats, contenders = run_contention_phase(pending, float(rng.random()), cfg, rng, now=15)
        assert stats.blocks == cfg.blocks
        assert stats.contenders == len(contenders) >= stats.success + 2 * stats.collision


def saturated_contention(rate, p, frames, seed):
    rng = np.random.default_rng(seed)
    successes, idle = [], []
    for _ in range(frames):
        pending = [flow(i) for i in range(rng.poisson(rate * cfg.T))]
        requests, stats, _ = run_contention_phase(pending, p, cfg, rng, now=15)
        successes.append(len(requests))
        idle.append(stats.idle / cfg.blocks)
    return np.array(successes), np.array(idle)


@pytest.mark.parametrize("rate,p", [(2.0, 0.45), (2.0, 0.9), (0.5, 1.0)])
def test_expected_received_requests(rate, p):
    succ, _ = saturated_contention(rate, p, 10_000, seed=2)
    se = succ.std(ddof=1) / math.sqrt(len(succ))
    assert abs(succ.mean() - expected_requests(rate, p, cfg)) < 3 * se


def test_idle_fraction_at_optimal_p():
    rate = 2.0
    _, idle = saturated_contention(rate, optimal_p(rate, cfg), 10_000, seed=3)
    assert abs(idle.mean() - INV_E) < 0.02


def test_empty_frame():
    state = new_state([])
    report = run_frame(state, cfg, 0.5, np.random.default_rng(0))
    assert (report.accepted, report.completed, report.failed, report.energy) == (0, 0, 0, 0)
    assert report.stats.idle == cfg.blocks
    assert state.clock == cfg.T and state.frame_index == 1


def test_single_flow_admitted_and_completed():
    state = MacState([], pending=[flow(1, 10.0, 2, 500.0)])
    report = run_frame(state, cfg, 1.0, np.random.default_rng(0))
    assert report.accepted == 1 and report.completed == 1 and report.failed == 0
    assert state.active == []


def test_energy_of_one_flow():
    state = MacState([], pending=[flow(1, 10.0, 3, 500.0)])
    run_frame(state, cfg, 1.0, np.random.default_rng(0))
    assert state.metrics.tx_time == 1 + 3 * 5
    assert energy_per_success(state.metrics) == 16
    assert state.energy_log[1] == 16


def test_first_frame_arrivals_contend_in_second_frame():
    arrivals = [flow(1, 12.0, 1, 500.0)]
    state = new_state(arrivals)
    first = run_frame(state, cfg, 1.0, np.random.default_rng(0))
    assert first.accepted == 0 and [f.id for f in state.pending] == [1]
    second = run_frame(state, cfg, 1.0, np.random.default_rng(0))
    assert second.accepted == 1 and second.completed == 1


def test_collided_and_declined_flows_fail_by_default():
    state = MacState([], pending=[flow(1), flow(2)])
    report = run_frame(state, cfg, 1.0, ForcedRng([4, 4]))
    assert report.failed == 2 and state.metrics.failures == 2 and state.pending == []


def test_retry_mode_keeps_collided_flows():
    state = MacState([], pending=[flow(1), flow(2)], retry=True)
    report = run_frame(state, cfg, 1.0, ForcedRng([4, 4]))
    assert report.failed == 0
    assert sorted(f.id for f in state.pending) == [1, 2]
    report = run_frame(state, cfg, 1.0, ForcedRng([1, 2]))
    assert report.accepted == 2


def test_flush_with_no_active_flows():
    state = MacState([], pending=[flow(9)])
    assert run_flush_frames(state, cfg).frames == 0
    assert [f.id for f in state.pending] == [9]


def test_flush_drains_one_long_flow():
    state = MacState([flow(5, 60.0, 1, 1.0)], active=[ActiveFlow(1, 10, 20)], clock=50.0)
    state.abs_deadline[1] = 1000.0
    report = run_flush_frames(state, cfg)
    assert report.frames == 1 and report.completed == 1
    assert state.active == []
    # the flow generated during the flush never had a contention phase
    assert state.metrics.failures == 1 and state.metrics.successes == 1


def simulate(arrivals, frames, cfg, rng, p_of_frame, flush_every=None):
    state = new_state(arrivals)
    state.slot_log = []
    for t in range(frames):
        run_frame(state, cfg, p_of_frame(t), rng)
        if flush_every and (t + 1) % flush_every == 0:
            run_flush_frames(state, cfg)
    run_flush_frames(state, cfg)
    return state


@pytest.mark.parametrize("load,rate", [(deterministic(3), 0.3), (geometric(1.25), 0.8), (deterministic(3), 0.05)])
def test_full_run_invariants(load, rate):
    rng = np.random.default_rng(4)
    frames = 300
    arrivals = generate_arrivals(rate, frames * cfg.T, load, rng, k=cfg.k)
    state = simulate(arrivals, frames, cfg, rng, lambda t: optimal_p(rate, cfg), flush_every=50)

    by_id = {f.id: f for f in arrivals}
    slots = Counter()
    last_end = {}
    for start, ids in state.slot_log:
        assert len(ids) <= cfg.c and len(set(ids)) == len(ids)
        for fid in ids:
            slots[fid] += 1
            last_end[fid] = start + cfg.k
    # everything admitted was drained by the final flush and met its deadline
    assert state.active == []
    assert state.accepted == state.completed == state.metrics.successes == len(slots)
    for fid, n in slots.items():
        assert n == by_id[fid].load
        assert last_end[fid] <= by_id[fid].absolute_deadline + 1e-9
    resolved = state.metrics.successes + state.metrics.failures
    assert resolved == state.cursor - len(state.pending)
    assert sum(state.energy_log.values()) == pytest.approx(state.metrics.tx_time)


def test_no_contention_energy_for_flush_frames():
    state = MacState([], active=[ActiveFlow(1, 3, 9)], clock=0.0)
    state.abs_deadline[1] = 1e9
    run_flush_frames(state, cfg)
    assert state.metrics.tx_time == 3 * cfg.k

"""Deadline scheduling of unit-slot flows on ``c`` identical channels.

All flows handled here are released at the same instant (the end of a
contention phase); ``deadline`` counts future transmission slots. A flow may
occupy at most one channel per slot.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field


class ScheduleViolation(AssertionError):
    """An admitted flow missed its deadline or a slot was overbooked."""


@dataclass
class ActiveFlow:
    id: int
    load: int       # residual packets
    deadline: int   # remaining transmission slots

    @property
    def laxity(self) -> int:
        return self.deadline - self.load

    def key(self):
        # LLF priority: least laxity, then earliest deadline, then id
        return (self.deadline - self.load, self.deadline, self.id)


@dataclass
class SlotSchedule:
    c: int
    grid: list = field(default_factory=list)  # one tuple of flow ids per slot

    def check(self):
        for s, ids in enumerate(self.grid):
            if len(ids) > self.c:
                raise ScheduleViolation(f"slot {s} carries {len(ids)} > {self.c} flows")
            if len(set(ids)) != len(ids):
                raise ScheduleViolation(f"slot {s} schedules a flow twice: {ids}")

    @property
    def transmissions(self) -> int:
        return sum(len(ids) for ids in self.grid)


def llf_step(flows, c) -> set:
    """Ids of the ``c`` flows with least laxity."""
    chosen = sorted(flows, key=ActiveFlow.key)[:c]
    return {f.id for f in chosen}


def llf_feasible(flows, c) -> bool:
    """Simulate LLF until every flow finishes; False once any laxity goes negative."""
    state = [(f.deadline - f.load, f.deadline, f.id, f.load) for f in flows]
    for lax, _, _, _ in state:
        if lax < 0:
            return False
    while state:
        if len(state) <= c:
            # every flow runs in every remaining slot; laxities are all >= 0
            return True
        state.sort()
        nxt = []
        for idx, (lax, d, fid, l) in enumerate(state):
            if idx < c:
                if l > 1:
                    nxt.append((lax, d - 1, fid, l - 1))
            elif lax == 0:
                return False
            else:
                nxt.append((lax - 1, d - 1, fid, l))
        state = nxt
    return True


def _max_flow(n_nodes, edges, source, sink) -> int:
    """Edmonds-Karp on an adjacency-list residual graph."""
    graph = [[] for _ in range(n_nodes)]
    to, cap = [], []
    for u, v, w in edges:
        graph[u].append(len(to)); to.append(v); cap.append(w)
        graph[v].append(len(to)); to.append(u); cap.append(0)

    total = 0
    while True:
        parent = [-1] * n_nodes
        parent[source] = -2
        queue = deque([source])
        while queue and parent[sink] == -1:
            u = queue.popleft()
            for e in graph[u]:
                v = to[e]
                if cap[e] > 0 and parent[v] == -1:
                    parent[v] = e
                    queue.append(v)
        if parent[sink] == -1:
            return total
        # bottleneck along the path, then augment
        push = None
        v = sink
        while v != source:
            e = parent[v]
            push = cap[e] if push is None else min(push, cap[e])
            v = to[e ^ 1]
        v = sink
        while v != source:
            e = parent[v]
            cap[e] -= push
            cap[e ^ 1] += push
            v = to[e ^ 1]
        total += push


def maxflow_feasible(flows, c) -> bool:
    """Feasibility as a max-flow problem.

    source -> flow i (capacity l_i) -> slot s <= d_i (capacity 1) -> sink
    (capacity c). Feasible iff the max flow saturates every load.
    """
    flows = list(flows)
    if not flows:
        return True
    horizon = max(f.deadline for f in flows)
    n = len(flows)
    source, sink = 0, n + horizon + 1
    edges = []
    for i, f in enumerate(flows):
        edges.append((source, 1 + i, f.load))
        for s in range(min(f.deadline, horizon)):
            edges.append((1 + i, 1 + n + s, 1))
    for s in range(horizon):
        edges.append((1 + n + s, sink, c))
    demand = sum(f.load for f in flows)
    return _max_flow(n + horizon + 2, edges, source, sink) == demand


def admission_control(active, requests, c, feasible=llf_feasible):
    """Greedy admission in increasing order of load.

    Requests are sorted by (load, deadline, arrival order); each one is kept
    iff it stays feasible together with everything already admitted.
    Returns ``(accepted_ids, new_active)``.
    """
    admitted = list(active)
    assert feasible(admitted, c), "admission_control called with an infeasible active set"
    order = sorted(range(len(requests)),
                   key=lambda i: (requests[i].load, requests[i].deadline, i))
    accepted = []
    for i in order:
        req = requests[i]
        if req.load > req.deadline:
            continue
        trial = admitted + [req]
        if feasible(trial, c):
            admitted = trial
            accepted.append(req.id)
    return accepted, admitted


def build_schedule(active, n_slots, c):
    """Run LLF over ``n_slots`` slots.

    Returns ``(schedule, survivors, completed_ids)``; survivors carry the
    decremented load and deadline. Raises `ScheduleViolation` if an
    unfinished flow ever reaches negative laxity.
    """
    flows = [ActiveFlow(f.id, f.load, f.deadline) for f in active]
    schedule = SlotSchedule(c)
    completed = []
    for _ in range(n_slots):
        if not flows:
            schedule.grid.append(())
            continue
        flows.sort(key=ActiveFlow.key)
        run, wait = flows[:c], flows[c:]
        schedule.grid.append(tuple(f.id for f in run))
        flows = []
        for f in run:
            f.load -= 1
            f.deadline -= 1
            if f.load == 0:
                completed.append(f.id)
            else:
                flows.append(f)
        for f in wait:
            f.deadline -= 1
            if f.deadline < f.load:
                raise ScheduleViolation(f"flow {f.id} can no longer meet its deadline")
            flows.append(f)
    flows.sort(key=lambda f: f.id)
    return schedule, flows, completed

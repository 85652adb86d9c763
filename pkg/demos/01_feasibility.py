# %% [markdown]
# Deadline feasibility on c channels
#
# A set of flows (remaining load l, remaining deadline d in slots) is feasible
# when every flow can get its l slots before d, with at most c flows per slot.
# LLF decides this by simulation; a max-flow construction decides it exactly.

# %%
import random

from flowmac.deadline_core import (ActiveFlow, admission_control, build_schedule, llf_feasible,
                                   maxflow_feasible)

flows = [ActiveFlow(1, 3, 3), ActiveFlow(2, 2, 4), ActiveFlow(3, 1, 2)]
for c in (1, 2, 3):
    print(f"c={c}: llf={llf_feasible(flows, c)}  maxflow={maxflow_feasible(flows, c)}")

# %% [markdown]
# The two tests agree on random small instances.

# %%
rng = random.Random(0)
agree = 0
for _ in range(2000):
    c = rng.randint(1, 3)
    inst = [ActiveFlow(i, rng.randint(1, 4), rng.randint(1, 8)) for i in range(rng.randint(0, 6))]
    agree += llf_feasible(inst, c) == maxflow_feasible(inst, c)
print("agreement:", agree, "/ 2000")

# %% [markdown]
# Admission control takes requests greedily by (load, deadline) and keeps
# only those that leave the active set feasible.

# %%
active = [ActiveFlow(1, 3, 3)]
requests = [ActiveFlow(5, 2, 2), ActiveFlow(6, 1, 5), ActiveFlow(7, 4, 4)]
accepted, active = admission_control(active, requests, c=2)
print("accepted:", accepted)

schedule, survivors, done = build_schedule(active, n_slots=3, c=2)
for s, ids in enumerate(schedule.grid):
    print(f"slot {s}: {sorted(ids)}")
print("completed:", done, " still active:", [(f.id, f.load, f.deadline) for f in survivors])

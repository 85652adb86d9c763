# %% [markdown]
# Contention phase and the contention probability
#
# Each pending flow sends a request with probability p into one of c*N_C
# blocks; a block carrying exactly one request is received. The expected
# number received is G*exp(-G/(c*N_C)) with G = lambda*T*p, maximised by
# p* = min(1, c*N_C/(lambda*T)), where a fraction 1/e of blocks stays idle.

# %%
import numpy as np

from flowmac.adaptation import INV_E, PController, expected_requests, optimal_p, update_p
from flowmac.flows import FlowSpec, FrameConfig, deterministic, generate_arrivals
from flowmac.reservation_mac import new_state, run_contention_phase, run_frame

cfg = FrameConfig(c=3, n_contention=15, n_transmission=7, k=5)
rate = 2.0
print("p* =", optimal_p(rate, cfg))
for p in (0.2, 0.45, 0.8, 1.0):
    print(f"p={p:.2f}  expected requests={expected_requests(rate, p, cfg):.3f}")

# %%
rng = np.random.default_rng(1)
pending = [FlowSpec(i, 0.0, 1, 1e9) for i in range(300)]
got = [len(run_contention_phase(pending[:rng.poisson(rate * cfg.T)], 0.45, cfg, rng, now=15).requests)
       for _ in range(5000)]
print(f"simulated mean {np.mean(got):.3f} vs formula {expected_requests(rate, 0.45, cfg):.3f}")

# %% [markdown]
# Nodes do not know lambda. They nudge p after each frame by the gap between
# the observed idle fraction and 1/e, which settles p near p*.

# %%
arrivals = generate_arrivals(rate, 800 * cfg.T, deterministic(3), rng)
state = new_state(arrivals)
ctrl = PController(1.0, 0.05)
trace, idle = [], []
for t in range(800):
    report = run_frame(state, cfg, ctrl.p, rng)
    idle.append(report.stats.idle / cfg.blocks)
    ctrl = update_p(ctrl, report.stats, cfg)
    trace.append(ctrl.p)
for t in (0, 10, 50, 100, 200, 400, 799):
    print(f"frame {t:3d}: p={trace[t]:.3f}")
print(f"mean p over 200-700: {np.mean(trace[200:701]):.3f};"
      f" idle fraction {np.mean(idle[200:701]):.3f} (1/e = {INV_E:.3f})")

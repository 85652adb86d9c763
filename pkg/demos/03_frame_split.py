# %% [markdown]
# Choosing the contention/transmission split with UCB
#
# Each arm (N_C, N_T) splits the 50-unit frame differently. A play runs one
# arm for r frames and earns accepted/(c*T*r); UCB1 picks the next arm.
# First, UCB on a plain Bernoulli bandit.

# %%
import numpy as np

from flowmac.adaptation import UcbState, ucb_select, ucb_update
from flowmac.flows import generate_arrivals
from flowmac.harness import ExperimentConfig, run_adaptive, run_fixed_arm

means = (0.8, 0.5, 0.3, 0.1)
rng = np.random.default_rng(0)
state = UcbState.fresh(range(4))
for _ in range(2000):
    arm = ucb_select(state)
    ucb_update(state, arm, float(rng.random() < means[arm]))
print("plays per arm:", state.counts.tolist())

# %% [markdown]
# On the MAC the reward gaps between arms are a few thousandths while the
# exploration bonus is of order one, so within a run of a few dozen plays
# UCB spreads its plays almost evenly.

# %%
config = ExperimentConfig(frames=1000)
rate = 1.0
arrivals = generate_arrivals(rate, config.frames * config.T, config.load_model(), np.random.default_rng(5))
res = run_adaptive(config, rate, arrivals, np.random.default_rng(6))
print("adaptive throughput", round(res.throughput, 4), "plays", res.play_counts)
print("final p per arm", {a: round(p, 3) for a, p in res.final_p.items()})
for i, arm in enumerate(config.arms):
    fixed = run_fixed_arm(config, rate, i, config.frames, arrivals, np.random.default_rng(7))
    print(f"fixed arm {arm}: throughput {fixed.throughput:.4f}")

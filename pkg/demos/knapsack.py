"""0/1 knapsack as a constrained MDP.

Epoch h offers item h: action 1 takes it (reward = value, cost = weight),
action 0 skips it.  Under the almost-sure criterion the budget caps the
total weight on every path, so the constrained optimum is the knapsack
optimum.  We solve it exactly and with the relative scheme and compare
against the textbook weight DP.
"""

import time

import numpy as np

from tsrcmdp import solve
from tsrcmdp.oracle import knapsack_dp, knapsack_instance

rng = np.random.default_rng(0)
n = 12
weights = rng.integers(1, 21, size=n).tolist()
values = rng.integers(1, 31, size=n).tolist()
capacity = sum(weights) // 2
print("weights ", weights)
print("values  ", values)
print("capacity", capacity)

best = knapsack_dp(weights, values, capacity)
print(f"\nweight DP optimum: {best}")

cmdp, crit, budget = knapsack_instance(weights, values, capacity)

# Exact covering solver: the demand domain is every reachable subset value.
t0 = time.perf_counter()
res = solve(cmdp, crit, budget, mode="exact")
print(f"exact mode       : {res.certificate_value:g}  (weight {res.certificate_cost:g}, "
      f"{len(res.grid)} demands, {time.perf_counter() - t0:.2f} s)")

# Relative rounding, both recursions.
for eps in (0.5, 0.25, 0.1):
    for variant in ("sum", "diff"):
        t0 = time.perf_counter()
        r = solve(cmdp, crit, budget, eps, "relative", variant)
        print(f"relative {eps:<4} {variant:<4}: {r.certificate_value:g}  "
              f"ratio {r.certificate_value / best:.3f}  ({len(r.grid)} demands, "
              f"{time.perf_counter() - t0:.2f} s)")

# Which items did the exact policy take?  The instance is deterministic, so
# one rollout shows the whole plan.
from tsrcmdp import execute

tr = execute(res.policy, cmdp, res.initial_position)
taken = [h for h, a in enumerate(tr.actions) if a == 1]
print("\nitems taken:", taken)
print("demand along the way:", [round(d, 3) for d in tr.demand_values])

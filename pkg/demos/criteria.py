"""One instance, three ways of charging cost.

* expectation: expected total cost
* almost_sure: worst-case total cost over paths that can happen
* anytime:     worst-case running total at any epoch

The worst case over paths is at least the mean, and with some negative
costs the running total can peak before the end, so the same budget is
progressively stricter.  Each solution is simulated to show the empirical
costs.
"""

import numpy as np

from tsrcmdp import execute, make_criterion, solve
from tsrcmdp.oracle import GeneratorSpec, random_instance

cmdp, _ = random_instance(GeneratorSpec(seed=44, num_states=3, num_actions=2, horizon=3,
                                        reward_range=(0, 9), cost_range=(-2, 2)))
budget = 0.0

for kind in ("expectation", "almost_sure", "anytime"):
    res = solve(cmdp, make_criterion(kind), budget, mode="exact")
    if not res.feasible:
        print(f"{kind:<12} infeasible")
        continue
    runs = [execute(res.policy, cmdp, res.initial_position, [7, i]) for i in range(5000)]
    totals = np.array([tr.total_cost for tr in runs])
    peaks = np.array([np.max(np.cumsum(tr.costs)) for tr in runs])
    rewards = np.array([tr.total_reward for tr in runs])
    print(f"{kind:<12} value {res.certificate_value:.4f} (simulated {rewards.mean():.4f})  "
          f"cost {res.certificate_cost:.4f}  "
          f"mean total {totals.mean():.3f}  max total {totals.max():g}  max peak {peaks.max():g}")

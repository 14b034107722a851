"""Accuracy and grid size of the approximate solvers as epsilon shrinks.

A random instance is solved by the brute-force oracle and by every
approximate configuration.  Gaps never exceed epsilon (additive) or
epsilon * optimum (relative); the number of grid points grows roughly like
1 / epsilon.
"""

import time

from tsrcmdp import make_criterion, solve
from tsrcmdp.oracle import GeneratorSpec, brute_force, random_instance

# Continuous probabilities, so rounding actually loses something.
cmdp, budget = random_instance(GeneratorSpec(seed=28, num_states=3, num_actions=2, horizon=3,
                                             reward_range=(0, 9), prob_bits=None))
crit = make_criterion("expectation")
orc = brute_force(cmdp, crit, budget)
print(f"budget {budget:g}; oracle value {orc.value!r}, cost {orc.cost!r}\n")

print(f"{'mode':<9}{'variant':<8}{'eps':>6}{'value':>10}{'gap':>10}{'bound':>10}"
      f"{'|grid|':>8}{'sec':>8}")
for mode in ("additive", "relative"):
    for variant in ("sum", "diff"):
        for eps in (1.0, 0.5, 0.25, 0.1):
            t0 = time.perf_counter()
            r = solve(cmdp, crit, budget, eps, mode, variant)
            dt = time.perf_counter() - t0
            gap = orc.value - r.certificate_value
            bound = eps if mode == "additive" else eps * orc.value
            print(f"{mode:<9}{variant:<8}{eps:>6}{r.certificate_value:>10.4f}{gap:>10.4f}"
                  f"{bound:>10.4f}{len(r.grid):>8}{dt:>8.3f}")

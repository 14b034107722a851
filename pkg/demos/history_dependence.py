"""Why deterministic policies here must look at the history.

From the start the process moves to A or B with probability 1/2 each, and
then to a junction M.  Passing through A costs 1; at M the risky action pays
10 but also costs 1.  With an almost-sure budget of 1 the risky action is
safe only on the path through B.  A Markov policy sees only M and cannot tell
the two paths apart.
"""

from tsrcmdp import solve
from tsrcmdp.oracle import best_markov, brute_force, history_dependence_example

cmdp, crit, budget = history_dependence_example()
names = ["s0", "A", "B", "M"]

print("best Markov policy value :", best_markov(cmdp, crit, budget))
orc = brute_force(cmdp, crit, budget)
print("best history policy value:", orc.value, "cost", orc.cost)

res = solve(cmdp, crit, budget, mode="exact")
print("covering solver value    :", res.certificate_value)

# The augmented policy carries a demand instead of the history.  Walk both
# paths and print the demand each state is asked to meet.
pol = res.policy
d0 = res.initial_position
vals = pol.demand_values()
a0, vec0 = pol.entry(0, 0, d0)
print(f"\nat s0 demand {vals[d0]:g}: action {a0}")
for mid in (1, 2):
    d1 = int(vec0[mid])
    a1, vec1 = pol.entry(1, mid, d1)
    d2 = int(vec1[3])
    a2, _ = pol.entry(2, 3, d2)
    print(f"  via {names[mid]}: demand {vals[d1]:g} -> at M demand {vals[d2]:g}, action {a2}")

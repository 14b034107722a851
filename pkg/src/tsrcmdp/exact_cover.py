"""Exact covering reduction.

The constrained problem "maximise value subject to cost <= B" is solved through
its covering dual: for every augmented state ``(h, s, v)`` compute the least
cost of any policy that guarantees value at least ``v`` from ``(h, s)``.  The
demands ``v`` range over the finite value space, so everything here is exact
(binary64 with a fixed left-to-right summation order).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import INF, CMdp, Criterion
from .errors import CapExceeded, MissingEntry
from .policy import AugmentedPolicy, Mode, SolveOutcome, Variant, finish
from .rounding import IdentityGrid

DEFAULT_CAP = 10 ** 6


@dataclass(frozen=True, eq=False)
class ValueSpace:
    """Sorted per-(h, s) value sets; ``layers[H][s] == [0.0]``."""

    layers: tuple
    union: np.ndarray

    @property
    def horizon(self) -> int:
        return len(self.layers) - 1

    def at(self, h: int, s: int) -> np.ndarray:
        return self.layers[h][s]

    def __len__(self):
        return len(self.union)


def _accumulate(r: float, probs, value_sets, cap: int) -> np.ndarray:
    """All sums ``r + p_1 v_1 + p_2 v_2 + ...`` (left to right), deduplicated."""
    sums = np.array([float(r)])
    for p, vals in zip(probs, value_sets):
        if sums.size * vals.size > cap:
            raise CapExceeded(f"value space exceeds the cap of {cap} candidates")
        sums = np.unique((sums[:, None] + p * vals[None, :]).ravel())
    return sums


def value_space(cmdp: CMdp, cap: int = DEFAULT_CAP) -> ValueSpace:
    """Backward enumeration of every value some policy can guarantee.

    Raises ``CapExceeded`` as soon as an intermediate candidate set or the
    union grows beyond ``cap``.
    """
    H, S, A = cmdp.horizon, cmdp.num_states, cmdp.num_actions
    P, R = cmdp.transitions, cmdp.rewards
    layers = [None] * (H + 1)
    layers[H] = tuple(np.zeros(1) for _ in range(S))
    total = S
    for h in reversed(range(H)):
        nxt = layers[h + 1]
        row = []
        for s in range(S):
            parts = []
            for a in range(A):
                supp = cmdp.support(h, s, a)
                parts.append(_accumulate(R[h, s, a], [P[h, s, a, t] for t in supp],
                                         [nxt[t] for t in supp], cap))
            vals = np.unique(np.concatenate(parts))
            vals.flags.writeable = False
            row.append(vals)
            total += vals.size
            if total > cap:
                raise CapExceeded(f"value space exceeds the cap of {cap} values")
        layers[h] = tuple(row)
    union = np.unique(np.concatenate([v for layer in layers for v in layer]))
    union.flags.writeable = False
    return ValueSpace(tuple(layers), union)


def demand_admissible(r: float, probs, demands, v: float) -> bool:
    """The covering constraint ``r + sum_t P(t) v_t >= v`` (left to right, supported t)."""
    total = float(r)
    for p, d in zip(probs, demands):
        if p > 0:
            total = total + p * d
    return total >= v


class CoverMDP:
    """The value-augmented cost-minimisation MDP over states ``(s, v)``."""

    def __init__(self, cmdp: CMdp, criterion: Criterion, vspace: ValueSpace):
        self.cmdp = cmdp
        self.criterion = criterion
        self.vspace = vspace
        self.demands = vspace.union

    @property
    def num_augmented_states(self) -> int:
        return self.cmdp.num_states * len(self.demands)

    def admissible(self, h: int, s: int, v: float, a: int, demands) -> bool:
        return demand_admissible(self.cmdp.rewards[h, s, a], self.cmdp.transitions[h, s, a],
                                 demands, v)

    def transition(self, h: int, s: int, a: int, demands) -> list[tuple[tuple[int, float], float]]:
        """Successor augmented states with their probabilities."""
        P = self.cmdp.transitions[h, s, a]
        return [((t, float(demands[t])), float(P[t])) for t in self.cmdp.support(h, s, a)]

    def cost(self, h: int, s: int, a: int) -> float:
        return float(self.cmdp.costs[h, s, a])

    @staticmethod
    def terminal_cost(v: float) -> float:
        return 0.0 if v <= 0 else INF


def build_cover_mdp(cmdp: CMdp, criterion: Criterion, vspace: ValueSpace) -> CoverMDP:
    return CoverMDP(cmdp, criterion, vspace)


def frontier(costs: np.ndarray) -> np.ndarray:
    """Demand positions that are not dominated by a larger demand.

    Position ``d`` survives iff its cost is finite and strictly below the cost
    of every larger position.  Cost tables are monotone in the demand, so
    this keeps the largest demand of each cost level.
    """
    costs = np.asarray(costs, dtype=float)
    later = np.minimum.accumulate(costs[::-1])[::-1]
    later = np.append(later[1:], INF)
    return np.flatnonzero((costs < later) & np.isfinite(costs))


def _lex_product(sizes) -> np.ndarray:
    """All index tuples of the given ranges in lexicographic order, shape (n, k)."""
    if not sizes:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices(sizes).reshape(len(sizes), -1)
    return grids.T


def _best_per_target(sigma, cost, targets):
    """For each target, the cheapest combination with ``sigma >= target``.

    Ties go to the earliest combination (lexicographic order).  Returns the
    combination index per target (``-1`` if none qualifies) and its cost.
    """
    n = sigma.size
    by_sigma = np.argsort(-sigma, kind="stable")
    rank_order = np.lexsort((np.arange(n), cost))
    rank = np.empty(n, dtype=np.int64)
    rank[rank_order] = np.arange(n)
    best_rank = np.minimum.accumulate(rank[by_sigma])
    count = np.searchsorted(-sigma[by_sigma], -targets, side="right")
    choice = np.full(targets.size, -1, dtype=np.int64)
    ok = count > 0
    choice[ok] = rank_order[best_rank[count[ok] - 1]]
    out = np.full(targets.size, INF)
    out[ok] = cost[choice[ok]]
    return choice, out


def solve_exact(cmdp: CMdp, criterion: Criterion, budget: float, cap: int = DEFAULT_CAP,
                vspace: ValueSpace | None = None) -> SolveOutcome:
    """Exact covering solve over the full value space.

    For each ``(h, s, a)`` the candidate demand vectors are the product of the
    per-successor frontiers of the ``h + 1`` table; the best vector for each
    target demand is found by sorting on the exact weighted sum.
    """
    vs = vspace if vspace is not None else value_space(cmdp, cap)
    H, S, A = cmdp.horizon, cmdp.num_states, cmdp.num_actions
    P, R, Cst = cmdp.transitions, cmdp.rewards, cmdp.costs
    grid = IdentityGrid(vs.union, S)
    V = grid.demand_keys()
    nD = V.size
    C = np.full((H + 1, S, nD), INF)
    C[H] = np.where(V <= 0, 0.0, INF)
    actions = np.full((H, S, nD), -1, dtype=np.int64)
    demands = np.zeros((H, S, nD, S), dtype=np.int64)
    for h in reversed(range(H)):
        nxt = C[h + 1]
        for s in range(S):
            best = np.full(nD, INF)
            for a in range(A):
                supp = cmdp.support(h, s, a)
                cands = [frontier(nxt[t]) for t in supp]
                if any(c.size == 0 for c in cands):
                    continue
                combo = _lex_product([c.size for c in cands])
                pos = [c[combo[:, i]] for i, c in enumerate(cands)]
                sigma = np.full(len(combo), float(R[h, s, a]))
                for t, d in zip(supp, pos):
                    sigma = sigma + P[h, s, a, t] * V[d]
                g = np.full(len(combo), criterion.empty)
                for t, d in zip(reversed(supp), reversed(pos)):
                    g = criterion.alpha_array(criterion.beta_array(P[h, s, a, t], nxt[t][d]), g)
                choice, q = _best_per_target(sigma, Cst[h, s, a] + g, V)
                better = q < best
                best[better] = q[better]
                actions[h, s, better] = a
                vec = np.zeros((better.sum(), S), dtype=np.int64)
                for t, d in zip(supp, pos):
                    vec[:, t] = d[choice[better]]
                demands[h, s, better] = vec
            C[h, s] = best
    policy = AugmentedPolicy(grid, actions, demands, C)
    return finish(policy, cmdp, criterion, budget, Mode.EXACT, Variant.SUM, None)


@dataclass(frozen=True)
class Trajectory:
    states: list
    actions: list
    rewards: list
    costs: list
    demands: list
    demand_values: list

    @property
    def total_reward(self) -> float:
        return float(sum(self.rewards))

    @property
    def total_cost(self) -> float:
        return float(sum(self.costs))


def execute(policy: AugmentedPolicy, cmdp: CMdp, d0: int, rng_seed: int = 0) -> Trajectory:
    """Simulate one episode of the augmented policy from demand position ``d0``.

    At each step the stored ``(action, demand vector)`` is read at the current
    augmented state, the next state is sampled and its demand carried forward.
    ``demands`` has ``H + 1`` entries (the last is the terminal demand).
    """
    if not 0 <= d0 < policy.num_demands:
        raise MissingEntry(f"demand position {d0} outside the policy's domain")
    rng = np.random.default_rng(rng_seed)
    P = cmdp.transitions
    vals = policy.demand_values()
    s, d = cmdp.initial_state, int(d0)
    states, acts, rews, costs, dem = [s], [], [], [], [d]
    for h in range(cmdp.horizon):
        a, vec = policy.entry(h, s, d)
        acts.append(a)
        rews.append(float(cmdp.rewards[h, s, a]))
        costs.append(float(cmdp.costs[h, s, a]))
        s = int(rng.choice(cmdp.num_states, p=P[h, s, a]))
        d = int(vec[s])
        states.append(s)
        dem.append(d)
    return Trajectory(states, acts, rews, costs, dem, [float(vals[k]) for k in dem])

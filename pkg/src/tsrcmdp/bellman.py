"""Action-space dynamic programs for the cover MDP.

One Bellman update at ``(h, s, v)`` has to choose an action and a demand for
every successor.  Instead of enumerating demand vectors, the successors are
processed one at a time while tracking a rounded partial sum ``u``:

* sum variant:  ``u_1 = r``, ``u_{t+1} = round(u_t + P(t) v_t)``, feasible iff
  ``u_{S+1}`` meets the relaxed target ``kappa(v)``;
* difference variant: ``u_1 = v``, ``u_{t+1} = round(u_t - P(t) v_t)``,
  feasible iff ``u_{S+1}`` is below the relaxed reward bound.

``g(t, u)`` is the least criterion fold over successors ``t..S`` that can
still reach a feasible end state from ``u``.  Because the reachable ``u`` sets
do not depend on the target in the sum variant, the recursion for all targets
shares one forward pass and targets are batched by their threshold in the
last set.  The difference variant needs a single table for all targets.

Successor candidates are restricted to the frontier of the next cost table
(see ``exact_cover.frontier``) unless ``prune=False``.  This leaves every
``g`` value unchanged since ``g`` is monotone in ``u`` and in the next costs.
Zero-probability successors get the fixed demand position 0; their rounding
step is still applied, but they do not enter the fold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import INF, CMdp, Criterion
from .exact_cover import ValueSpace, frontier
from .policy import AugmentedPolicy, Variant
from .rounding import IdentityGrid, ValueGrid

# Upper bound on elements of one (classes x |U_t| x candidates) block.
BLOCK = 1 << 22


@dataclass
class PartialSumTable:
    """Forward pass for one ``(h, s, a)``.

    ``sets[t]`` holds the sorted keys of ``U(t + 1)`` for ``t = 0..S`` (the
    first entry of the sum variant is the raw reward, not a key).
    ``cands[t]`` are the demand positions tried for successor ``t`` and
    ``links[t][i, j]`` the position in ``sets[t + 1]`` reached from element
    ``i`` of ``sets[t]`` with candidate ``j``.
    """

    variant: Variant
    probs: np.ndarray
    sets: list
    cands: list
    links: list
    feasible: bool = True


def _candidates(C_next_t: np.ndarray, p: float, prune: bool) -> np.ndarray:
    if p <= 0:
        return np.zeros(1, dtype=np.int64)
    if prune:
        return frontier(C_next_t)
    return np.arange(C_next_t.size, dtype=np.int64)


def forward_sets(grid: ValueGrid, cmdp: CMdp, h: int, s: int, a: int, variant: Variant,
                 C_next: np.ndarray | None = None, prune: bool = True) -> PartialSumTable:
    """Reachable rounded partial sums for every successor position."""
    variant = Variant(variant)
    S = cmdp.num_states
    probs = cmdp.transitions[h, s, a]
    keys = grid.demand_keys()
    if C_next is None:
        prune = False
        C_next = np.zeros((S, keys.size))
    if variant is Variant.SUM:
        first = np.array([cmdp.rewards[h, s, a]], dtype=float)
        coords = grid.start(cmdp.rewards[h, s, a])
        step = grid.sum_step
    else:
        first = keys
        coords = grid.coords(keys)
        step = grid.diff_step
    sets, cands, links = [first], [], []
    feasible = True
    for t in range(S):
        cand = _candidates(C_next[t], probs[t], prune)
        if cand.size == 0:
            feasible = False
            cand = np.zeros(1, dtype=np.int64)
        nxt = step(coords, float(probs[t]), keys[cand])
        uniq, inv = np.unique(nxt, return_inverse=True)
        sets.append(uniq)
        cands.append(cand)
        links.append(inv.reshape(nxt.shape))
        coords = grid.coords(uniq)
    return PartialSumTable(variant, probs, sets, cands, links, feasible)


def input_sets(h: int, s: int, a: int, grid: ValueGrid, cmdp: CMdp,
               variant: Variant | str = Variant.SUM) -> list[np.ndarray]:
    """The full (unpruned) sets ``U(1), ..., U(S + 1)`` as grid values."""
    table = forward_sets(grid, cmdp, h, s, a, Variant(variant))
    out = [np.asarray(table.sets[0], dtype=float) if table.variant is Variant.SUM
           else grid.values(table.sets[0])]
    out.extend(grid.values(u) for u in table.sets[1:])
    return out


def _backward(table: PartialSumTable, base: np.ndarray, C_next: np.ndarray,
              criterion: Criterion):
    """Run the recursion from ``base = g(S+1, .)`` (shape ``(n, |U(S+1)|)``).

    Returns ``g(1, .)`` with shape ``(n, |U(1)|)`` and per-step argmins.
    """
    G = base
    args = [None] * len(table.links)
    for t in reversed(range(len(table.links))):
        link, cand, p = table.links[t], table.cands[t], table.probs[t]
        if p <= 0:
            G = G[:, link[:, 0]]
            args[t] = np.zeros(G.shape, dtype=np.int64)
            continue
        b = criterion.beta_array(p, C_next[t, cand])
        vals = criterion.alpha_array(b[None, None, :], G[:, link])
        j = np.argmin(vals, axis=2)
        G = np.take_along_axis(vals, j[..., None], axis=2)[..., 0]
        args[t] = j
    return G, args


def _trace(table: PartialSumTable, args, start: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """Demand positions chosen from ``start`` indices into ``U(1)``.

    ``rows`` selects the batch row of the argmin arrays for each start.
    """
    S = len(table.links)
    n = start.size
    ui = start.copy()
    out = np.zeros((n, S), dtype=np.int64)
    for t in range(S):
        j = args[t][rows, ui]
        out[:, t] = table.cands[t][j]
        ui = table.links[t][ui, j]
    return out


def _threshold_classes(grid: ValueGrid, last: np.ndarray, targets: np.ndarray):
    """Index of the first element of ``last`` meeting each target, grouped."""
    meets = grid.meets(last[None, :], targets[:, None])
    first = last.size - meets.sum(axis=1)
    cls, inverse = np.unique(first, return_inverse=True)
    return cls, inverse


def sum_action(grid: ValueGrid, cmdp: CMdp, criterion: Criterion, h: int, s: int, a: int,
               C_next: np.ndarray, targets: np.ndarray, prune: bool = True):
    """``g(1, r)`` and argmin demand vectors of one action for many targets.

    Returns ``(costs, vectors)`` where ``costs[i]`` excludes the immediate cost.
    """
    S = cmdp.num_states
    n = targets.size
    costs = np.full(n, INF)
    vectors = np.zeros((n, S), dtype=np.int64)
    table = forward_sets(grid, cmdp, h, s, a, Variant.SUM, C_next, prune)
    if not table.feasible or n == 0:
        return costs, vectors
    last = table.sets[-1]
    cls, inverse = _threshold_classes(grid, last, targets)
    width = max(u.size for u in table.sets) * max(c.size for c in table.cands)
    chunk = max(1, BLOCK // max(1, width))
    pos = np.arange(last.size)
    for lo in range(0, cls.size, chunk):
        part = cls[lo:lo + chunk]
        base = np.where(pos[None, :] >= part[:, None], criterion.empty, INF)
        G, args = _backward(table, base, C_next, criterion)
        vec = _trace(table, args, np.zeros(part.size, dtype=np.int64), np.arange(part.size))
        sel = (inverse >= lo) & (inverse < lo + part.size)
        costs[sel] = G[inverse[sel] - lo, 0]
        vectors[sel] = vec[inverse[sel] - lo]
    return costs, vectors


def diff_action(grid: ValueGrid, cmdp: CMdp, criterion: Criterion, h: int, s: int, a: int,
                C_next: np.ndarray, prune: bool = True):
    """``g(1, v)`` for every demand ``v`` at once, with argmin demand vectors."""
    S = cmdp.num_states
    nD = grid.demand_keys().size
    table = forward_sets(grid, cmdp, h, s, a, Variant.DIFF, C_next, prune)
    if not table.feasible:
        return np.full(nD, INF), np.zeros((nD, S), dtype=np.int64)
    last = table.sets[-1]
    ok = grid.below(last, cmdp.rewards[h, s, a])
    base = np.where(ok, criterion.empty, INF)[None, :]
    G, args = _backward(table, base, C_next, criterion)
    # U(1) is the demand set itself, so every demand starts at its own position.
    vec = _trace(table, args, np.arange(nD), np.zeros(nD, dtype=np.int64))
    return G[0], vec


def _terminal(grid: ValueGrid) -> np.ndarray:
    return np.where(grid.values(grid.demand_keys()) <= 0, 0.0, INF)


def _solve(cmdp: CMdp, criterion: Criterion, grid: ValueGrid, variant: Variant,
           prune: bool) -> AugmentedPolicy:
    H, S, A = cmdp.horizon, cmdp.num_states, cmdp.num_actions
    keys = grid.demand_keys()
    nD = keys.size
    C = np.full((H + 1, S, nD), INF)
    C[H] = _terminal(grid)[None, :]
    actions = np.full((H, S, nD), -1, dtype=np.int64)
    demands = np.zeros((H, S, nD, S), dtype=np.int64)
    for h in reversed(range(H)):
        for s in range(S):
            best = np.full(nD, INF)
            for a in range(A):
                if variant is Variant.SUM:
                    g, vec = sum_action(grid, cmdp, criterion, h, s, a, C[h + 1], keys, prune)
                else:
                    g, vec = diff_action(grid, cmdp, criterion, h, s, a, C[h + 1], prune)
                q = cmdp.costs[h, s, a] + g
                better = q < best
                best[better] = q[better]
                actions[h, s, better] = a
                demands[h, s, better] = vec[better]
            C[h, s] = best
    return AugmentedPolicy(grid, actions, demands, C)


def approx_solve(cmdp: CMdp, criterion: Criterion, grid: ValueGrid, budget: float = INF,
                 prune: bool = True):
    """Backward induction with the rounded sum recursion.

    Returns ``(policy, cost_table)``; ``budget`` is accepted for interface
    symmetry, the feasibility check lives in the caller.
    """
    policy = _solve(cmdp, criterion, grid, Variant.SUM, prune)
    return policy, policy.costs


def diff_solve(cmdp: CMdp, criterion: Criterion, grid: ValueGrid, budget: float = INF,
               prune: bool = True):
    """Backward induction with the rounded difference recursion."""
    policy = _solve(cmdp, criterion, grid, Variant.DIFF, prune)
    return policy, policy.costs


def approx_bellman_update(h: int, s: int, v, C_next: np.ndarray, grid: ValueGrid, cmdp: CMdp,
                          criterion: Criterion, prune: bool = True):
    """One update at demand key ``v``: ``(action, demand positions, cost)``.

    The action is ``-1`` (and the cost infinite) when nothing is admissible.
    """
    target = np.array([v], dtype=grid.key_dtype())
    best, best_a = INF, -1
    best_vec = np.zeros(cmdp.num_states, dtype=np.int64)
    for a in range(cmdp.num_actions):
        g, vec = sum_action(grid, cmdp, criterion, h, s, a, C_next, target, prune)
        q = float(cmdp.costs[h, s, a] + g[0])
        if q < best:
            best, best_a, best_vec = q, a, vec[0]
    return best_a, best_vec, best


def exact_inner_min(h: int, s: int, v: float, a: int, C_next: np.ndarray, vspace: ValueSpace,
                    cmdp: CMdp, criterion: Criterion, prune: bool = True):
    """Exact inner minimisation over demand vectors for one action.

    ``C_next`` is indexed by position in ``vspace.union``.  Returns the
    demand values chosen per successor and the fold cost (without the
    immediate cost); the cost is infinite when no vector is admissible.
    """
    grid = IdentityGrid(vspace.union, cmdp.num_states)
    g, vec = sum_action(grid, cmdp, criterion, h, s, a, np.asarray(C_next, dtype=float),
                        np.array([float(v)]), prune)
    return grid.demand_keys()[vec[0]], float(g[0])

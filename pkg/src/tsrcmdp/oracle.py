"""Brute-force oracle and instance generators.

The oracle searches deterministic history-dependent policies directly on
the history tree.  It shares no code with the covering solvers: it only uses
the criterion algebra and the evaluators from ``core``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (CMdp, Criterion, CriterionKind, HistoryPolicy, evaluate_cost, evaluate_value,
                   make_criterion)
from .errors import CapExceeded, InvalidInstance, LengthMismatch

DEFAULT_NODE_CAP = 20


@dataclass(frozen=True)
class GeneratorSpec:
    """Seeded random instance family with small integer rewards and costs.

    With ``prob_bits = k`` every transition probability is a multiple of
    ``2**-k``, which keeps all value sums exact in binary64.  ``prob_bits =
    None`` draws continuous probabilities instead.
    """

    seed: int
    num_states: int = 2
    num_actions: int = 2
    horizon: int = 2
    reward_range: tuple = (0, 3)
    cost_range: tuple = (0, 2)
    transition_sparsity: float = 1.0
    budget_range: tuple = (0, 4)
    prob_bits: Optional[int] = 2

    def __post_init__(self):
        if min(self.num_states, self.num_actions, self.horizon) < 1:
            raise InvalidInstance("S, A and H must be positive")
        if not 0 < self.transition_sparsity <= 1:
            raise InvalidInstance("transition_sparsity must lie in (0, 1]")


def _row(rng, S: int, sparsity: float, bits: Optional[int]) -> np.ndarray:
    k = max(1, math.ceil(sparsity * S))
    if bits is not None:
        k = min(k, 2 ** bits)
    supp = np.sort(rng.choice(S, size=k, replace=False))
    row = np.zeros(S)
    if bits is None:
        w = rng.random(k) + 1e-3
        row[supp] = w / w.sum()
    else:
        quanta = 2 ** bits
        w = 1 + rng.multinomial(quanta - k, np.full(k, 1.0 / k))
        row[supp] = w / quanta
    return row


def random_cmdp(spec: GeneratorSpec) -> CMdp:
    """Reproducible random instance; the same spec gives a bit-identical instance."""
    rng = np.random.default_rng(spec.seed)
    H, S, A = spec.horizon, spec.num_states, spec.num_actions
    P = np.zeros((H, S, A, S))
    for h, s, a in itertools.product(range(H), range(S), range(A)):
        P[h, s, a] = _row(rng, S, spec.transition_sparsity, spec.prob_bits)
    lo, hi = spec.reward_range
    r = rng.integers(lo, hi + 1, size=(H, S, A)).astype(float)
    lo, hi = spec.cost_range
    c = rng.integers(lo, hi + 1, size=(H, S, A)).astype(float)
    return CMdp(P, r, c, 0)


def random_instance(spec: GeneratorSpec) -> tuple[CMdp, float]:
    """A random instance together with an integer budget from ``budget_range``."""
    cmdp = random_cmdp(spec)
    rng = np.random.default_rng([spec.seed, 1])
    lo, hi = spec.budget_range
    return cmdp, float(rng.integers(lo, hi + 1))


def knapsack_instance(weights, values, capacity) -> tuple[CMdp, Criterion, float]:
    """Item ``h`` is taken (action 1) or skipped (action 0) at epoch ``h``."""
    weights, values = list(weights), list(values)
    if len(weights) != len(values):
        raise LengthMismatch(f"{len(weights)} weights but {len(values)} values")
    if not weights or min(weights) <= 0 or min(values) <= 0:
        raise InvalidInstance("weights and values must be non-empty positive lists")
    n = len(weights)
    P = np.ones((n, 1, 2, 1))
    r = np.zeros((n, 1, 2))
    c = np.zeros((n, 1, 2))
    r[:, 0, 1] = values
    c[:, 0, 1] = weights
    return CMdp(P, r, c, 0), make_criterion(CriterionKind.ALMOST_SURE), float(capacity)


def knapsack_dp(weights, values, capacity: int) -> int:
    """Textbook 0/1 knapsack over integer capacities."""
    best = [0] * (int(capacity) + 1)
    for w, v in zip(weights, values):
        for cap in range(int(capacity), int(w) - 1, -1):
            best[cap] = max(best[cap], best[cap - int(w)] + int(v))
    return best[int(capacity)]


def optimal_value(cmdp: CMdp) -> float:
    """Unconstrained optimum by plain backward induction on rewards."""
    H, S, A = cmdp.horizon, cmdp.num_states, cmdp.num_actions
    P, R = cmdp.transitions, cmdp.rewards
    V = [0.0] * S
    for h in reversed(range(H)):
        nxt = []
        for s in range(S):
            best = -math.inf
            for a in range(A):
                q = R[h, s, a]
                for t in cmdp.support(h, s, a):
                    q = q + P[h, s, a, t] * V[t]
                best = max(best, float(q))
            nxt.append(best)
        V = nxt
    return V[cmdp.initial_state]


def decision_nodes(cmdp: CMdp) -> int:
    """Largest number of reachable history nodes any deterministic policy can have."""
    H, S, A = cmdp.horizon, cmdp.num_states, cmdp.num_actions
    N = [0] * S
    for h in reversed(range(H)):
        N = [1 + max(sum(N[t] for t in cmdp.support(h, s, a)) for a in range(A))
             for s in range(S)]
    return N[cmdp.initial_state]


@dataclass(frozen=True)
class OracleResult:
    value: Optional[float]
    cost: Optional[float]
    witness: Optional[HistoryPolicy]

    @property
    def feasible(self) -> bool:
        return self.value is not None


def _subtree_outcomes(cmdp: CMdp, criterion: Criterion, hist: tuple, prune: bool) -> list:
    """All (value, cost, assignment) outcomes of sub-policies rooted at ``hist``.

    With ``prune`` an outcome is dropped when another one has at least the
    value and at most the cost; both quantities are monotone in the children,
    so no optimum is lost.
    """
    h, s = len(hist) // 2, hist[-1]
    if h == cmdp.horizon:
        return [(0.0, 0.0, ())]
    P, R, Cst = cmdp.transitions, cmdp.rewards, cmdp.costs
    out = []
    for a in range(cmdp.num_actions):
        supp = cmdp.support(h, s, a)
        kids = [_subtree_outcomes(cmdp, criterion, hist + (a, t), prune) for t in supp]
        probs = [P[h, s, a, t] for t in supp]
        for combo in itertools.product(*kids):
            v = R[h, s, a]
            for p, kid in zip(probs, combo):
                v = v + p * kid[0]
            c = Cst[h, s, a] + criterion.fold(probs, [kid[1] for kid in combo])
            assign = ((hist, a),) + tuple(x for kid in combo for x in kid[2])
            out.append((float(v), float(c), assign))
    if prune:
        out = _pareto(out)
    return out


def _pareto(outcomes: list) -> list:
    # Highest value first; among equal values, lowest cost first (stable).
    order = sorted(range(len(outcomes)), key=lambda i: (-outcomes[i][0], outcomes[i][1]))
    kept, best_cost = [], math.inf
    for i in order:
        if outcomes[i][1] < best_cost:
            kept.append(outcomes[i])
            best_cost = outcomes[i][1]
    return kept


def brute_force(cmdp: CMdp, criterion: Criterion, budget: float,
                cap: int = DEFAULT_NODE_CAP, prune: bool = True) -> OracleResult:
    """Best value over deterministic history-dependent policies with cost <= budget.

    Policies are enumerated on the history tree; with ``prune`` dominated
    partial assignments are discarded.  The winning assignment is re-evaluated
    with ``core.evaluate_value`` and ``core.evaluate_cost`` before returning.
    """
    nodes = decision_nodes(cmdp)
    if nodes > cap:
        raise CapExceeded(f"{nodes} decision nodes exceed the oracle cap of {cap}")
    root = (cmdp.initial_state,)
    best = None
    for v, c, assign in _subtree_outcomes(cmdp, criterion, root, prune):
        if c <= budget and (best is None or v > best[0] or (v == best[0] and c < best[1])):
            best = (v, c, assign)
    if best is None:
        return OracleResult(None, None, None)
    witness = HistoryPolicy(dict(best[2]))
    value, cost = evaluate_value(cmdp, witness), evaluate_cost(cmdp, witness, criterion)
    if value != best[0] or cost != best[1]:
        raise AssertionError("oracle bookkeeping disagrees with the core evaluators")
    return OracleResult(value, cost, witness)


def enumerate_policies(cmdp: CMdp, cap: int = DEFAULT_NODE_CAP):
    """Yield every deterministic policy as a dict on its own reachable histories."""
    if decision_nodes(cmdp) > cap:
        raise CapExceeded("too many decision nodes for full enumeration")

    def subtree(hist):
        h, s = len(hist) // 2, hist[-1]
        if h == cmdp.horizon:
            yield {}
            return
        for a in range(cmdp.num_actions):
            kids = [list(subtree(hist + (a, t))) for t in cmdp.support(h, s, a)]
            for combo in itertools.product(*kids):
                rule = {hist: a}
                for kid in combo:
                    rule.update(kid)
                yield rule

    for rule in subtree((cmdp.initial_state,)):
        yield HistoryPolicy(rule)


def brute_force_plain(cmdp: CMdp, criterion: Criterion, budget: float,
                      cap: int = DEFAULT_NODE_CAP) -> OracleResult:
    """Unpruned version: every policy is evaluated with the ``core`` evaluators."""
    best = None
    for pol in enumerate_policies(cmdp, cap):
        c = evaluate_cost(cmdp, pol, criterion)
        if c > budget:
            continue
        v = evaluate_value(cmdp, pol)
        if best is None or v > best.value or (v == best.value and c < best.cost):
            best = OracleResult(v, c, pol)
    return best if best is not None else OracleResult(None, None, None)


def best_markov(cmdp: CMdp, criterion: Criterion, budget: float) -> Optional[float]:
    """Best value over deterministic Markov policies (all ``A**(S*H)`` tables)."""
    H, S, A = cmdp.horizon, cmdp.num_states, cmdp.num_actions
    best = None
    for flat in itertools.product(range(A), repeat=H * S):
        pol = HistoryPolicy.markov(np.reshape(flat, (H, S)))
        if evaluate_cost(cmdp, pol, criterion) <= budget:
            v = evaluate_value(cmdp, pol)
            best = v if best is None else max(best, v)
    return best


def history_dependence_example() -> tuple[CMdp, Criterion, float]:
    """Small almost-sure instance whose optimum needs history-dependent choices.

    From the start both actions lead to a junction state with probability
    1/2 each via an intermediate state; the branch through ``A`` already
    spends the whole budget, so the risky action at the junction is only
    safe after ``B``.  Markov policies cannot tell the two apart.
    """
    s0, A_, B_, M = 0, 1, 2, 3
    H, S, nA = 3, 4, 2
    P = np.zeros((H, S, nA, S))
    r = np.zeros((H, S, nA))
    c = np.zeros((H, S, nA))
    for s in range(S):
        for a in range(nA):
            P[0, s, a, s] = 1.0
            P[1, s, a, M] = 1.0
            P[2, s, a, s] = 1.0
    P[0, s0, :, s0] = 0.0
    P[0, s0, :, A_] = 0.5
    P[0, s0, :, B_] = 0.5
    c[1, A_, :] = 1.0
    r[2, M, 1] = 10.0
    c[2, M, 1] = 1.0
    return CMdp(P, r, c, s0), make_criterion(CriterionKind.ALMOST_SURE), 1.0

"""Tabular finite-horizon cMDPs, TSR cost criteria and exact evaluation.

Epochs are 0-based throughout: ``h = 0 .. H-1`` are decision epochs and
``h = H`` is the terminal layer.  A history at epoch ``h`` is the tuple
``(s_0, a_0, s_1, a_1, ..., s_h)``, so its epoch is ``len(history) // 2``.

Extended costs are plain floats where ``math.inf`` is the +infinity marker.
IEEE arithmetic already saturates (``x + inf == inf`` for finite ``x``); the
two operations that would produce NaN (``0 * inf`` and ``inf - inf``) never
occur because zero-probability successors are skipped by the fold and costs
are never subtracted.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidInstance, UndefinedAction

INF = math.inf
PROB_TOL = 1e-9


def is_inf(x: float) -> bool:
    return x == INF


def chi(pred: bool) -> float:
    """Characteristic function: 0 if ``pred`` holds, infinity otherwise."""
    return 0.0 if pred else INF


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class CMdp:
    """Tabular finite-horizon constrained MDP.

    ``transitions[h, s, a, s']`` is the probability of moving to ``s'``;
    ``rewards[h, s, a]`` and ``costs[h, s, a]`` are the immediate reward and
    cost.  Arrays are copied and made read-only on construction.
    """

    transitions: np.ndarray
    rewards: np.ndarray
    costs: np.ndarray
    initial_state: int = 0

    def __post_init__(self):
        P = _frozen(self.transitions)
        r = _frozen(self.rewards)
        c = _frozen(self.costs)
        if P.ndim != 4 or P.shape[1] != P.shape[3]:
            raise InvalidInstance(f"transitions must have shape (H, S, A, S), got {P.shape}")
        H, S, A, _ = P.shape
        if min(H, S, A) < 1:
            raise InvalidInstance("H, S and A must all be positive")
        if r.shape != (H, S, A) or c.shape != (H, S, A):
            raise InvalidInstance(
                f"rewards/costs must have shape {(H, S, A)}, got {r.shape} and {c.shape}")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(c)) and np.all(np.isfinite(P))):
            raise InvalidInstance("tables must be finite")
        if np.any(P < 0):
            raise InvalidInstance("negative transition probability")
        sums = P.sum(axis=-1)
        bad = np.argwhere(np.abs(sums - 1.0) > PROB_TOL)
        if len(bad):
            h, s, a = bad[0]
            raise InvalidInstance(
                f"P[{h}][{s}][{a}] sums to {sums[h, s, a]!r}, not 1")
        s0 = int(self.initial_state)
        if not 0 <= s0 < S:
            raise InvalidInstance(f"initial_state {s0} outside 0..{S - 1}")
        object.__setattr__(self, "transitions", P)
        object.__setattr__(self, "rewards", r)
        object.__setattr__(self, "costs", c)
        object.__setattr__(self, "initial_state", s0)

    @property
    def horizon(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_states(self) -> int:
        return self.transitions.shape[1]

    @property
    def num_actions(self) -> int:
        return self.transitions.shape[2]

    @cached_property
    def r_max(self) -> float:
        return float(np.max(np.abs(self.rewards)))

    @cached_property
    def r_min(self) -> float:
        return float(np.min(self.rewards))

    @cached_property
    def p_min(self) -> float:
        """Smallest strictly positive transition probability."""
        P = self.transitions
        return float(np.min(P[P > 0]))

    @cached_property
    def _supports(self) -> tuple:
        H, S, A = self.horizon, self.num_states, self.num_actions
        P = self.transitions
        return tuple(tuple(tuple(tuple(int(t) for t in np.flatnonzero(P[h, s, a] > 0))
                                 for a in range(A)) for s in range(S)) for h in range(H))

    def support(self, h: int, s: int, a: int) -> tuple[int, ...]:
        """Successor states with positive probability, ascending."""
        return self._supports[h][s][a]


class CriterionKind(enum.Enum):
    EXPECTATION = "expectation"
    ALMOST_SURE = "almost_sure"
    ANYTIME = "anytime"


@dataclass(frozen=True)
class Criterion:
    """A time-space-recursive cost criterion given by its (alpha, beta) pair.

    The successor fold runs right to left over the *supported* successors,
    starting from ``empty``::

        g = empty
        for t in reversed(support):
            g = alpha(beta(P[t], C[t]), g)

    ``empty`` is 0 for expectation and anytime.  For almost-sure it is -inf,
    the identity of ``max``, so that negative costs are not clipped at 0.
    """

    kind: CriterionKind

    @property
    def empty(self) -> float:
        return -INF if self.kind is CriterionKind.ALMOST_SURE else 0.0

    def alpha(self, x: float, y: float) -> float:
        if self.kind is CriterionKind.EXPECTATION:
            return x + y
        if self.kind is CriterionKind.ALMOST_SURE:
            return max(x, y)
        return max(0.0, x, y)

    def beta(self, p: float, z: float) -> float:
        if p <= 0:
            return 0.0
        if self.kind is CriterionKind.EXPECTATION:
            return p * z
        return z

    def alpha_array(self, x, y):
        """Vectorised ``alpha`` over broadcastable numpy arrays."""
        if self.kind is CriterionKind.EXPECTATION:
            return x + y
        if self.kind is CriterionKind.ALMOST_SURE:
            return np.maximum(x, y)
        return np.maximum(np.maximum(x, y), 0.0)

    def beta_array(self, p: float, z):
        """Vectorised ``beta`` for one probability ``p > 0`` over an array of costs."""
        z = np.asarray(z, dtype=float)
        return p * z if self.kind is CriterionKind.EXPECTATION else z

    def fold(self, probs: Sequence[float], costs: Sequence[float]) -> float:
        """The successor aggregate ``f`` of the TR recursion."""
        g = self.empty
        for p, z in zip(reversed(probs), reversed(costs)):
            if p > 0:
                g = self.alpha(self.beta(p, z), g)
        return g


def make_criterion(kind: CriterionKind | str) -> Criterion:
    return Criterion(CriterionKind(kind))


History = tuple


class HistoryPolicy:
    """Deterministic policy mapping histories to actions.

    ``rule`` is either a mapping keyed by history tuples or a callable.
    Markov policies should be built with :meth:`markov`, which lets the
    evaluators memoise on ``(h, state)``.
    """

    def __init__(self, rule: Mapping[History, int] | Callable[[History], int],
                 is_markov: bool = False):
        self._rule = rule
        self.is_markov = is_markov

    @classmethod
    def markov(cls, table) -> "HistoryPolicy":
        table = np.asarray(table, dtype=int)
        return cls(lambda hist: int(table[len(hist) // 2, hist[-1]]), is_markov=True)

    def __call__(self, history: History) -> int:
        try:
            a = self._rule[history] if isinstance(self._rule, Mapping) else self._rule(history)
        except (KeyError, IndexError) as exc:
            raise UndefinedAction(f"no action for history {history}") from exc
        if a is None or a < 0:
            raise UndefinedAction(f"no action for history {history}")
        return int(a)


def _check_action(cmdp: CMdp, a: int, history: History) -> int:
    if not 0 <= a < cmdp.num_actions:
        raise UndefinedAction(f"action {a} out of range at history {history}")
    return a


def evaluate_value(cmdp: CMdp, policy: HistoryPolicy) -> float:
    """Exact expected total reward by backward recursion over the history tree.

    Successor contributions are added left to right, ``r + P[0] V[0] + P[1]
    V[1] + ...``, the same order the value-space enumeration uses.
    """
    H, P, R = cmdp.horizon, cmdp.transitions, cmdp.rewards
    memo: dict = {}

    def value(hist: History) -> float:
        h, s = len(hist) // 2, hist[-1]
        if h == H:
            return 0.0
        if policy.is_markov and (h, s) in memo:
            return memo[h, s]
        a = _check_action(cmdp, policy(hist), hist)
        v = R[h, s, a]
        for t in cmdp.support(h, s, a):
            v = v + P[h, s, a, t] * value(hist + (a, t))
        v = float(v)
        if policy.is_markov:
            memo[h, s] = v
        return v

    return value((cmdp.initial_state,))


def evaluate_cost(cmdp: CMdp, policy: HistoryPolicy, criterion: Criterion) -> float:
    """Criterion cost of ``policy`` via the TR recursion with the SR fold."""
    H, P, Cst = cmdp.horizon, cmdp.transitions, cmdp.costs
    memo: dict = {}

    def cost(hist: History) -> float:
        h, s = len(hist) // 2, hist[-1]
        if h == H:
            return 0.0
        if policy.is_markov and (h, s) in memo:
            return memo[h, s]
        a = _check_action(cmdp, policy(hist), hist)
        supp = cmdp.support(h, s, a)
        child = [cost(hist + (a, t)) for t in supp]
        c = float(Cst[h, s, a] + criterion.fold([P[h, s, a, t] for t in supp], child))
        if policy.is_markov:
            memo[h, s] = c
        return c

    return cost((cmdp.initial_state,))


def min_cost_policy(cmdp: CMdp, criterion: Criterion) -> tuple[HistoryPolicy, float]:
    """Minimum-cost deterministic Markov policy by backward induction.

    Ties go to the lowest action index.
    """
    H, S, A = cmdp.horizon, cmdp.num_states, cmdp.num_actions
    P, Cst = cmdp.transitions, cmdp.costs
    C = np.zeros(S)
    table = np.zeros((H, S), dtype=int)
    for h in reversed(range(H)):
        nxt = np.empty(S)
        for s in range(S):
            best, best_a = INF, 0
            for a in range(A):
                supp = cmdp.support(h, s, a)
                q = float(Cst[h, s, a] + criterion.fold([P[h, s, a, t] for t in supp],
                                                        [C[t] for t in supp]))
                if q < best:
                    best, best_a = q, a
            nxt[s], table[h, s] = best, best_a
        C = nxt
    return HistoryPolicy.markov(table), float(C[cmdp.initial_state])

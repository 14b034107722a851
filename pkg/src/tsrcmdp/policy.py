"""Value-augmented policies, solver outcomes and their independent evaluation."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import INF, CMdp, Criterion, HistoryPolicy, evaluate_cost, evaluate_value
from .errors import MissingEntry
from .rounding import GridPoint, ValueGrid

# Largest S**H for which certificates walk the full history tree.
TREE_CERT_LEAVES = 4096


class Verdict(enum.Enum):
    FEASIBLE = "Feasible"
    INFEASIBLE = "Infeasible"


class Mode(enum.Enum):
    EXACT = "exact"
    ADDITIVE = "additive"
    RELATIVE = "relative"


class Variant(enum.Enum):
    SUM = "sum"
    DIFF = "diff"


@dataclass(frozen=True, eq=False)
class AugmentedPolicy:
    """Deterministic policy over augmented states ``(h, s, demand)``.

    Demands are addressed by their position ``d`` in ``grid.demand_keys()``.
    ``actions[h, s, d]`` is the chosen action (``-1`` where no action is
    admissible, i.e. the cost is infinite) and ``demands[h, s, d]`` holds one
    future demand position per successor state.  ``costs`` is the cost table
    the policy was extracted from, with ``costs[H]`` the terminal layer.
    """

    grid: ValueGrid
    actions: np.ndarray
    demands: np.ndarray
    costs: np.ndarray

    def __post_init__(self):
        for a in (self.actions, self.demands, self.costs):
            a.flags.writeable = False

    @property
    def horizon(self) -> int:
        return self.actions.shape[0]

    @property
    def num_states(self) -> int:
        return self.actions.shape[1]

    @property
    def num_demands(self) -> int:
        return self.actions.shape[2]

    def demand_values(self) -> np.ndarray:
        return self.grid.values(self.grid.demand_keys())

    def demand_point(self, d: int) -> GridPoint:
        keys = self.grid.demand_keys()
        return GridPoint(keys[d].item(), float(self.grid.values(keys[d])))

    def entry(self, h: int, s: int, d: int) -> tuple[int, np.ndarray]:
        a = int(self.actions[h, s, d])
        if a < 0:
            raise MissingEntry(f"no admissible action at (h={h}, s={s}, demand #{d})")
        return a, self.demands[h, s, d]

    def as_history_policy(self, d0: int) -> HistoryPolicy:
        """The history-dependent policy obtained by replaying demands from ``d0``."""
        def rule(hist):
            d = d0
            for k in range(len(hist) // 2):
                _, vec = self.entry(k, hist[2 * k], d)
                d = int(vec[hist[2 * k + 2]])
            return self.entry(len(hist) // 2, hist[-1], d)[0]

        return HistoryPolicy(rule)

    def evaluate(self, cmdp: CMdp, criterion: Criterion, d0: int, h0: int = 0,
                 s0: Optional[int] = None) -> tuple[float, float]:
        """Exact (value, cost) from ``(h0, s0, d0)`` by evaluation in the cover MDP.

        ``s0`` defaults to the instance's initial state.
        """
        P, R, Cst = cmdp.transitions, cmdp.rewards, cmdp.costs
        H = cmdp.horizon
        memo: dict = {}

        def ev(h, s, d):
            if h == H:
                return 0.0, 0.0
            if (h, s, d) in memo:
                return memo[h, s, d]
            a, vec = self.entry(h, s, d)
            supp = cmdp.support(h, s, a)
            children = [ev(h + 1, t, int(vec[t])) for t in supp]
            v = R[h, s, a]
            for t, (cv, _) in zip(supp, children):
                v = v + P[h, s, a, t] * cv
            c = Cst[h, s, a] + criterion.fold([P[h, s, a, t] for t in supp],
                                              [cc for _, cc in children])
            memo[h, s, d] = (float(v), float(c))
            return memo[h, s, d]

        return ev(h0, cmdp.initial_state if s0 is None else s0, d0)


def certify(policy: AugmentedPolicy, cmdp: CMdp, criterion: Criterion,
            d0: int) -> tuple[float, float]:
    """Exact value and cost of the executed policy, recomputed from scratch.

    Small instances go through the history-tree evaluators in ``core``;
    larger ones through the memoised cover-MDP evaluation.
    """
    if cmdp.num_states ** cmdp.horizon <= TREE_CERT_LEAVES:
        hp = policy.as_history_policy(d0)
        return evaluate_value(cmdp, hp), evaluate_cost(cmdp, hp, criterion)
    return policy.evaluate(cmdp, criterion, d0)


def select_initial_demand(root_costs: np.ndarray, budget: float) -> Optional[int]:
    """Largest demand position whose (finite) root cost is within budget, else ``None``."""
    for d in range(len(root_costs) - 1, -1, -1):
        if root_costs[d] <= budget and root_costs[d] < INF:
            return d
    return None


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    verdict: Verdict
    mode: Mode
    variant: Variant
    epsilon: Optional[float]
    grid: ValueGrid
    policy: AugmentedPolicy
    initial_demand: Optional[GridPoint] = None
    initial_position: Optional[int] = None
    certificate_value: Optional[float] = None
    certificate_cost: Optional[float] = None
    budget: float = INF
    initial_state: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.verdict is Verdict.FEASIBLE

    @property
    def cost_table(self) -> np.ndarray:
        return self.policy.costs

    @property
    def cost_table_root(self) -> np.ndarray:
        """Root costs over all demands at the initial state."""
        return self.policy.costs[0, self.initial_state]


def finish(policy: AugmentedPolicy, cmdp: CMdp, criterion: Criterion, budget: float,
           mode: Mode, variant: Variant, epsilon: Optional[float]) -> SolveOutcome:
    """Feasibility check, initial-demand selection and certificates."""
    root = policy.costs[0, cmdp.initial_state]
    d0 = select_initial_demand(root, budget)
    common = dict(mode=mode, variant=variant, epsilon=epsilon, grid=policy.grid,
                  policy=policy, budget=budget, initial_state=cmdp.initial_state)
    if d0 is None:
        return SolveOutcome(Verdict.INFEASIBLE, **common)
    value, cost = certify(policy, cmdp, criterion, d0)
    return SolveOutcome(Verdict.FEASIBLE, initial_demand=policy.demand_point(d0),
                        initial_position=d0, certificate_value=value,
                        certificate_cost=cost, **common)

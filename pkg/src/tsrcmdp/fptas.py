"""Top-level solver: exact, additive or relative mode, sum or difference variant."""

from __future__ import annotations

from typing import Optional

from .bellman import approx_solve, diff_solve
from .core import CMdp, Criterion
from .errors import NegativeRewards, NonPositiveEpsilon
from .exact_cover import DEFAULT_CAP, solve_exact, value_space
from .policy import Mode, SolveOutcome, Variant, Verdict, finish
from .rounding import IdentityGrid, Scheme, build_grid

__all__ = ["solve", "SolveOutcome", "Mode", "Variant", "Verdict"]


def solve(cmdp: CMdp, criterion: Criterion, budget: float, epsilon: Optional[float] = None,
          mode: Mode | str = Mode.ADDITIVE, variant: Variant | str = Variant.SUM,
          cap: int = DEFAULT_CAP, prune: bool = True) -> SolveOutcome:
    """Solve ``max value s.t. cost <= budget`` over deterministic policies.

    ``mode="exact"`` runs over the full value space (``CapExceeded`` if it is
    too large).  The approximate modes need ``epsilon > 0``; the relative
    mode also needs non-negative rewards.  The returned certificates are the
    exact value and cost of the returned policy.
    """
    mode, variant = Mode(mode), Variant(variant)
    if mode is Mode.EXACT:
        if variant is Variant.SUM:
            return solve_exact(cmdp, criterion, budget, cap=cap)
        grid = IdentityGrid(value_space(cmdp, cap).union, cmdp.num_states)
        policy, _ = diff_solve(cmdp, criterion, grid, budget, prune=prune)
        return finish(policy, cmdp, criterion, budget, mode, variant, None)
    if mode is Mode.RELATIVE and cmdp.r_min < 0:
        raise NegativeRewards(f"relative mode needs rewards >= 0 (min is {cmdp.r_min})")
    if epsilon is None or not epsilon > 0:
        raise NonPositiveEpsilon(f"epsilon must be positive, got {epsilon}")
    scheme = Scheme.ADDITIVE if mode is Mode.ADDITIVE else Scheme.RELATIVE
    grid = build_grid(scheme, epsilon, cmdp, difference=variant is Variant.DIFF)
    run = approx_solve if variant is Variant.SUM else diff_solve
    policy, _ = run(cmdp, criterion, grid, budget, prune=prune)
    return finish(policy, cmdp, criterion, budget, mode, variant, float(epsilon))

"""Deterministic policies for finite-horizon constrained MDPs.

Exact covering solver, rounded action-space dynamic programs (additive and
relative schemes, sum and difference variants) and a brute-force oracle.
"""

from .core import (INF, CMdp, Criterion, CriterionKind, HistoryPolicy, evaluate_cost,
                   evaluate_value, make_criterion, min_cost_policy)
from .errors import (CapExceeded, CmdpError, DimensionMismatch, FormatError, InvalidInstance,
                     LengthMismatch, MissingEntry, NegativeRewards, NonPositiveEpsilon,
                     OutOfRange, UndefinedAction)
from .exact_cover import execute, solve_exact, value_space
from .fptas import solve
from .policy import AugmentedPolicy, Mode, SolveOutcome, Variant, Verdict
from .rounding import AdditiveGrid, IdentityGrid, RelativeGrid, Scheme, build_grid

__version__ = "0.1.0"

"""Value grids: the set of representable demands and the round-down map.

Every grid point has a canonical *key*:

* ``AdditiveGrid``: the integer ``k`` of the point ``k * delta``.
* ``RelativeGrid``: the exponent ``k >= 0`` of ``v_min / (1 - delta)**k``, with
  key ``-1`` reserved for the point 0.
* ``IdentityGrid``: the value itself (exact mode; no rounding).

DP tables are keyed on these, never on float values.  Besides the scalar
``round_down`` / ``kappa`` maps, each grid exposes the vectorised primitives
the Bellman recursions need (``sum_step``, ``diff_step``, ``meets``,
``below``).
"""

from __future__ import annotations

import enum
import math
from typing import NamedTuple

import numpy as np

from .core import CMdp
from .errors import NegativeRewards, NonPositiveEpsilon, OutOfRange

NUDGE = 1e-12
V_MIN_FLOOR = 1e-300
ZERO_KEY = -1


class Scheme(enum.Enum):
    IDENTITY = "identity"
    ADDITIVE = "additive"
    RELATIVE = "relative"


class GridPoint(NamedTuple):
    key: float | int
    value: float


def _floor_nudged(x):
    """``floor`` after a small relative upward nudge (absorbs representation error)."""
    return np.floor(x + NUDGE * np.maximum(1.0, np.abs(x)))


def resolution(epsilon: float, horizon: int, num_states: int) -> float:
    if not epsilon > 0:
        raise NonPositiveEpsilon(f"epsilon must be positive, got {epsilon}")
    return epsilon / (horizon * (num_states + 1) + 1)


class ValueGrid:
    scheme: Scheme
    delta: float
    v_min: float
    v_max: float
    num_states: int

    def demand_keys(self) -> np.ndarray:
        """Keys of the demand set, ascending."""
        raise NotImplementedError

    def values(self, keys) -> np.ndarray:
        raise NotImplementedError

    def round_keys(self, x) -> np.ndarray:
        """Vectorised round-down of real values to keys (no range checks)."""
        raise NotImplementedError

    def round_down(self, v: float) -> GridPoint:
        raise NotImplementedError

    def kappa(self, v: float) -> float:
        raise NotImplementedError

    # Partial-sum primitives.  "coords" are what a key is combined in:
    # the key itself for additive/identity, the value for relative.
    def start(self, r: float):
        raise NotImplementedError

    def coords(self, keys):
        raise NotImplementedError

    def sum_step(self, u_coords, p: float, v_keys) -> np.ndarray:
        """Keys of ``round(u + p * v)`` for every (u, v) pair (outer product)."""
        raise NotImplementedError

    def diff_step(self, u_coords, p: float, v_keys) -> np.ndarray:
        """Keys of ``round(u - p * v)`` for every (u, v) pair (outer product)."""
        raise NotImplementedError

    def meets(self, u_keys, target_keys) -> np.ndarray:
        """``value(u) >= kappa(value(target))``, broadcast."""
        raise NotImplementedError

    def below_key(self, r: float):
        """Largest key ``u`` with ``value(u) <= kappa_r(r)`` (difference variant)."""
        raise NotImplementedError

    def below(self, u_keys, r: float) -> np.ndarray:
        return np.asarray(u_keys) <= self.below_key(r)

    def key_dtype(self):
        return np.int64

    def spec(self) -> dict:
        """JSON-serialisable description sufficient to rebuild the grid."""
        return {"scheme": self.scheme.value, "delta": self.delta, "v_min": self.v_min,
                "v_max": self.v_max, "num_states": self.num_states}

    def __len__(self):
        return len(self.demand_keys())

    def __repr__(self):
        return (f"{type(self).__name__}(delta={self.delta!r}, v_min={self.v_min!r}, "
                f"v_max={self.v_max!r}, size={len(self)})")


class IdentityGrid(ValueGrid):
    """No rounding; the demand set is an explicit sorted list of reals."""

    scheme = Scheme.IDENTITY

    def __init__(self, values, num_states: int):
        vals = np.unique(np.asarray(values, dtype=float))
        vals.flags.writeable = False
        self._values = vals
        self.delta = 0.0
        self.v_min = float(vals[0])
        self.v_max = float(vals[-1])
        self.num_states = num_states

    def demand_keys(self):
        return self._values

    def values(self, keys):
        return np.asarray(keys, dtype=float)

    def round_keys(self, x):
        return np.asarray(x, dtype=float)

    def round_down(self, v):
        return GridPoint(float(v), float(v))

    def kappa(self, v):
        return float(v)

    def start(self, r):
        return np.array([float(r)])

    def coords(self, keys):
        return np.asarray(keys, dtype=float)

    def sum_step(self, u, p, v_keys):
        return np.asarray(u)[:, None] + p * np.asarray(v_keys)[None, :]

    def diff_step(self, u, p, v_keys):
        return np.asarray(u)[:, None] - p * np.asarray(v_keys)[None, :]

    def meets(self, u_keys, target_keys):
        return np.asarray(u_keys) >= np.asarray(target_keys)

    def below_key(self, r):
        return float(r)

    def key_dtype(self):
        return np.float64

    def spec(self):
        d = super().spec()
        d["values"] = [float(x) for x in self._values]
        return d


class AdditiveGrid(ValueGrid):
    """Integer multiples of ``delta``; ``kappa(v) = v - delta (S + 1)``."""

    scheme = Scheme.ADDITIVE

    def __init__(self, delta: float, v_min: float, v_max: float, num_states: int):
        if not delta > 0:
            raise NonPositiveEpsilon(f"delta must be positive, got {delta}")
        self.delta = float(delta)
        self.v_min = float(v_min)
        self.v_max = float(v_max)
        self.num_states = num_states
        self.k_lo = int(self.round_keys(self.v_min))
        self.k_hi = int(self.round_keys(self.v_max))
        # Rounded partial sums stay above this (worst case: every step loses delta).
        self.floor_value = 2 * self.v_min - self.delta * (num_states + 1)

    def demand_keys(self):
        return np.arange(self.k_lo, self.k_hi + 1, dtype=np.int64)

    def values(self, keys):
        return np.asarray(keys, dtype=float) * self.delta

    def round_keys(self, x):
        return _floor_nudged(np.asarray(x, dtype=float) / self.delta).astype(np.int64)

    def round_down(self, v):
        if v < self.floor_value:
            raise OutOfRange(f"{v} is below the partial-sum floor {self.floor_value}")
        k = int(self.round_keys(v))
        if k * self.delta > v:
            k -= 1
        return GridPoint(k, k * self.delta)

    def kappa(self, v):
        return v - self.delta * (self.num_states + 1)

    def start(self, r):
        return np.array([float(r) / self.delta])

    def coords(self, keys):
        return np.asarray(keys, dtype=float)

    def sum_step(self, u, p, v_keys):
        x = np.asarray(u, dtype=float)[:, None] + p * np.asarray(v_keys, dtype=float)[None, :]
        return _floor_nudged(x).astype(np.int64)

    def diff_step(self, u, p, v_keys):
        x = np.asarray(u, dtype=float)[:, None] - p * np.asarray(v_keys, dtype=float)[None, :]
        return _floor_nudged(x).astype(np.int64)

    def meets(self, u_keys, target_keys):
        return np.asarray(u_keys) >= np.asarray(target_keys) - (self.num_states + 1)

    def below_key(self, r):
        # value(u) <= r + delta  <=>  u - 1 <= floor(r / delta)
        return int(self.round_keys(r)) + 1


class RelativeGrid(ValueGrid):
    """``{0} U {v_min / (1 - delta)**k}``; ``kappa(v) = v (1 - delta)**(S + 1)``.

    Anything below ``v_min``, negatives included, rounds to the zero point.
    """

    scheme = Scheme.RELATIVE

    def __init__(self, delta: float, v_min: float, v_max: float, num_states: int):
        if not 0 < delta < 1:
            raise NonPositiveEpsilon(f"delta must lie in (0, 1), got {delta}")
        self.delta = float(delta)
        self.v_min = float(v_min)
        self.v_max = float(v_max)
        self.num_states = num_states
        self.base = 1.0 / (1.0 - self.delta)
        self._log_base = -math.log1p(-self.delta)
        self._powers = np.array([self.v_min])
        self.k_hi = int(self.round_keys(self.v_max)) if self.v_max >= self.v_min > 0 else ZERO_KEY

    def demand_keys(self):
        return np.arange(ZERO_KEY, self.k_hi + 1, dtype=np.int64)

    def _table(self, k_max: int) -> np.ndarray:
        # One value per key, computed once, so a key maps to the same float
        # whether it is looked up alone or inside an array.
        n = self._powers.size
        if k_max >= n:
            n = max(k_max + 1, 2 * n)
            self._powers = np.array([self.v_min * self.base ** k for k in range(n)])
        return self._powers

    def values(self, keys):
        k = np.asarray(keys, dtype=np.int64)
        if k.size == 0:
            return np.zeros(k.shape)
        table = self._table(int(k.max()))
        return np.where(k < 0, 0.0, table[np.maximum(k, 0)])

    def round_keys(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.log(np.where(x > 0, x, 1.0) / self.v_min) / self._log_base
        k = _floor_nudged(lg)
        k = np.where((x > 0) & (k >= 0), k, ZERO_KEY)
        return k.astype(np.int64)

    def round_down(self, v):
        k = int(self.round_keys(v))
        if k >= 0 and float(self.values(k)) > v:
            k -= 1
        return GridPoint(k, float(self.values(k)))

    def kappa(self, v):
        return v * (1.0 - self.delta) ** (self.num_states + 1)

    def start(self, r):
        return np.array([float(r)])

    def coords(self, keys):
        return self.values(keys)

    def sum_step(self, u, p, v_keys):
        return self.round_keys(np.asarray(u, dtype=float)[:, None]
                               + p * self.values(v_keys)[None, :])

    def diff_step(self, u, p, v_keys):
        return self.round_keys(np.asarray(u, dtype=float)[:, None]
                               - p * self.values(v_keys)[None, :])

    def meets(self, u_keys, target_keys):
        u = np.asarray(u_keys)
        tgt = np.asarray(target_keys)
        shifted = u >= tgt - (self.num_states + 1)
        return np.where(tgt < 0, True, (u >= 0) & shifted)

    def below_key(self, r):
        return int(self.round_keys(r))


def build_grid(scheme: Scheme | str, epsilon: float, cmdp: CMdp,
               difference: bool = False) -> ValueGrid:
    """Grid of the additive or relative approximation scheme for ``cmdp``.

    ``difference=True`` builds the relative grid for the difference variant,
    whose ``v_min`` is shrunk by a further ``(1 - delta)**H`` so that the
    scaled optimal demand stays representable.
    """
    scheme = Scheme(scheme)
    H, S = cmdp.horizon, cmdp.num_states
    delta = resolution(epsilon, H, S)
    v_max = H * cmdp.r_max
    if scheme is Scheme.ADDITIVE:
        return AdditiveGrid(delta, -v_max, v_max, S)
    if scheme is Scheme.RELATIVE:
        if cmdp.r_min < 0:
            raise NegativeRewards(f"relative rounding needs rewards >= 0 (min is {cmdp.r_min})")
        pos = cmdp.rewards[cmdp.rewards > 0]
        if pos.size == 0:
            return RelativeGrid(delta, 1.0, 0.0, S)
        # v_min from the smallest positive reward: with r_min = 0 the geometric grid is undefined.
        log_vmin = H * math.log(cmdp.p_min) + math.log(float(pos.min()))
        if difference:
            log_vmin += H * math.log1p(-delta)
        if log_vmin < math.log(V_MIN_FLOOR):
            raise OutOfRange(f"v_min = exp({log_vmin:.1f}) underflows; instance too deep for "
                             "relative rounding")
        return RelativeGrid(delta, math.exp(log_vmin), v_max, S)
    raise ValueError("identity grids are built from a value space; use IdentityGrid(values)")


def round_down(grid: ValueGrid, v: float) -> GridPoint:
    return grid.round_down(v)


def kappa(grid: ValueGrid, v: float) -> float:
    return grid.kappa(v)


def grid_from_spec(spec: dict) -> ValueGrid:
    scheme = Scheme(spec["scheme"])
    S = int(spec["num_states"])
    if scheme is Scheme.IDENTITY:
        return IdentityGrid(spec["values"], S)
    cls = AdditiveGrid if scheme is Scheme.ADDITIVE else RelativeGrid
    return cls(spec["delta"], spec["v_min"], spec["v_max"], S)

"""JSON formats for instances, problems and policies.

All indices are 0-based.  Floats are written with Python's shortest
round-trip repr, so a save/load cycle reproduces every number bit for bit.
Infinite costs are written as ``null``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import CMdp, CriterionKind
from .errors import DimensionMismatch, FormatError, InvalidInstance
from .policy import AugmentedPolicy, Mode, SolveOutcome, Variant
from .rounding import grid_from_spec

INSTANCE_FORMAT = "tsrcmdp-instance/1"
POLICY_FORMAT = "tsrcmdp-policy/1"
INSTANCE_KEYS = ("horizon", "num_states", "num_actions", "initial_state",
                 "transitions", "rewards", "costs")


def _loads(text: str, where: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{where}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{where}:1:1: top level must be an object")
    return doc


def _read(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None
    return _loads(text, str(path))


def _require(doc: dict, keys, where: str):
    missing = [k for k in keys if k not in doc]
    if missing:
        raise FormatError(f"{where}: missing key(s) {', '.join(missing)}")


def _array(doc: dict, key: str, shape: tuple, where: str) -> np.ndarray:
    try:
        a = np.array(doc[key], dtype=float)
    except (TypeError, ValueError):
        raise FormatError(f"{where}: '{key}' must be a nested array of numbers") from None
    if a.shape != shape:
        raise FormatError(f"{where}: '{key}' has shape {a.shape}, expected {shape}")
    return a


def instance_from_dict(doc: dict, where: str = "<instance>") -> CMdp:
    _require(doc, INSTANCE_KEYS, where)
    try:
        H, S, A = int(doc["horizon"]), int(doc["num_states"]), int(doc["num_actions"])
    except (TypeError, ValueError):
        raise FormatError(f"{where}: dimensions must be integers") from None
    if min(H, S, A) < 1:
        raise FormatError(f"{where}: horizon, num_states and num_actions must be positive")
    P = _array(doc, "transitions", (H, S, A, S), where)
    r = _array(doc, "rewards", (H, S, A), where)
    c = _array(doc, "costs", (H, S, A), where)
    try:
        return CMdp(P, r, c, int(doc["initial_state"]))
    except InvalidInstance as exc:
        raise InvalidInstance(f"{where}: {exc}") from None


def instance_to_dict(cmdp: CMdp) -> dict:
    return {
        "format": INSTANCE_FORMAT,
        "horizon": cmdp.horizon,
        "num_states": cmdp.num_states,
        "num_actions": cmdp.num_actions,
        "initial_state": cmdp.initial_state,
        "transitions": cmdp.transitions.tolist(),
        "rewards": cmdp.rewards.tolist(),
        "costs": cmdp.costs.tolist(),
    }


def parse_instance(text: str, where: str = "<instance>") -> CMdp:
    return instance_from_dict(_loads(text, where), where)


def serialize_instance(cmdp: CMdp) -> str:
    return json.dumps(instance_to_dict(cmdp), indent=1)


def load_instance(path) -> CMdp:
    return instance_from_dict(_read(path), str(path))


def save_instance(cmdp: CMdp, path):
    Path(path).write_text(serialize_instance(cmdp) + "\n")


def load_problem(path) -> dict:
    """Problem settings: ``criterion`` and ``budget``, optional solver defaults."""
    where = str(path)
    doc = _read(path)
    _require(doc, ("criterion", "budget"), where)
    try:
        crit = CriterionKind(doc["criterion"])
    except ValueError:
        names = ", ".join(k.value for k in CriterionKind)
        raise FormatError(f"{where}: criterion must be one of {names}") from None
    out = {"criterion": crit, "budget": float(doc["budget"])}
    if doc.get("epsilon") is not None:
        out["epsilon"] = float(doc["epsilon"])
    if "mode" in doc:
        out["mode"] = Mode(doc["mode"])
    if "variant" in doc:
        out["variant"] = Variant(doc["variant"])
    return out


def save_problem(path, criterion, budget: float, **defaults):
    doc = {"criterion": CriterionKind(criterion).value, "budget": float(budget)}
    doc.update({k: (v.value if hasattr(v, "value") else v) for k, v in defaults.items()})
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def _finite_or_none(a: np.ndarray):
    return [None if not np.isfinite(x) else float(x) for x in a.ravel()]


def policy_to_dict(outcome: SolveOutcome, criterion: CriterionKind) -> dict:
    pol = outcome.policy
    H, S, nD = pol.actions.shape
    return {
        "format": POLICY_FORMAT,
        "grid": pol.grid.spec(),
        "horizon": H,
        "num_states": S,
        "num_demands": nD,
        "criterion": CriterionKind(criterion).value,
        "budget": outcome.budget,
        "mode": outcome.mode.value,
        "variant": outcome.variant.value,
        "epsilon": outcome.epsilon,
        "verdict": outcome.verdict.value,
        "initial_position": outcome.initial_position,
        "certificate_value": outcome.certificate_value,
        "certificate_cost": outcome.certificate_cost,
        "actions": pol.actions.tolist(),
        "demands": pol.demands.tolist(),
        "costs": _finite_or_none(pol.costs),
    }


def save_policy(outcome: SolveOutcome, criterion, path):
    Path(path).write_text(json.dumps(policy_to_dict(outcome, criterion)) + "\n")


def policy_from_dict(doc: dict, where: str = "<policy>") -> tuple[AugmentedPolicy, dict]:
    """The policy and the remaining metadata (criterion, initial position, ...)."""
    _require(doc, ("grid", "horizon", "num_states", "num_demands", "actions", "demands",
                   "costs"), where)
    grid = grid_from_spec(doc["grid"])
    H, S, nD = int(doc["horizon"]), int(doc["num_states"]), int(doc["num_demands"])
    if len(grid) != nD:
        raise DimensionMismatch(f"{where}: grid has {len(grid)} demands, file says {nD}")
    actions = np.array(doc["actions"], dtype=np.int64)
    demands = np.array(doc["demands"], dtype=np.int64)
    costs = np.array([np.inf if x is None else x for x in doc["costs"]], dtype=float)
    if actions.shape != (H, S, nD) or demands.shape != (H, S, nD, S) or costs.size != (H + 1) * S * nD:
        raise DimensionMismatch(f"{where}: table shapes do not match the declared dimensions")
    meta = {k: doc.get(k) for k in ("criterion", "budget", "mode", "variant", "epsilon",
                                    "verdict", "initial_position", "certificate_value",
                                    "certificate_cost")}
    return AugmentedPolicy(grid, actions, demands, costs.reshape(H + 1, S, nD)), meta


def load_policy(path) -> tuple[AugmentedPolicy, dict]:
    return policy_from_dict(_read(path), str(path))


def check_policy_fits(policy: AugmentedPolicy, cmdp: CMdp):
    if policy.horizon != cmdp.horizon or policy.num_states != cmdp.num_states:
        raise DimensionMismatch(
            f"policy is for H={policy.horizon}, S={policy.num_states}; instance has "
            f"H={cmdp.horizon}, S={cmdp.num_states}")
    if policy.actions.max(initial=-1) >= cmdp.num_actions:
        raise DimensionMismatch("policy uses actions the instance does not have")

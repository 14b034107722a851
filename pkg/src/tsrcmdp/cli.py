"""Command-line front end.

    tsrcmdp solve    INSTANCE PROBLEM [--mode ...] [--epsilon E] [--variant ...] [--out POLICY]
    tsrcmdp execute  POLICY INSTANCE [--seed N] [--episodes N] [--show N]
    tsrcmdp compare  INSTANCE PROBLEM [--epsilons 1,0.5,0.25] [--csv PATH]
    tsrcmdp generate --seed N --states S --actions A --horizon H OUT_INSTANCE OUT_PROBLEM

Exit status: 0 on success (feasible), 2 when the problem is infeasible,
1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys

import numpy as np

from . import fileio
from .core import make_criterion
from .errors import CmdpError, DimensionMismatch
from .exact_cover import execute
from .fptas import solve
from .oracle import GeneratorSpec, brute_force, random_instance
from .policy import Mode, Variant

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2
CSV_HEADER = ["epsilon", "mode", "variant", "verdict", "value", "cost", "gap"]


def _fmt(x) -> str:
    return "-" if x is None else repr(float(x))


def cmd_solve(args, out) -> int:
    cmdp = fileio.load_instance(args.instance)
    prob = fileio.load_problem(args.problem)
    mode = Mode(args.mode or prob.get("mode", Mode.EXACT))
    variant = Variant(args.variant or prob.get("variant", Variant.SUM))
    eps = args.epsilon if args.epsilon is not None else prob.get("epsilon")
    if mode is not Mode.EXACT and eps is None:
        raise CmdpError(f"--epsilon is required for mode {mode.value}")
    criterion = make_criterion(prob["criterion"])
    res = solve(cmdp, criterion, prob["budget"], eps, mode, variant)
    print(f"verdict: {res.verdict.value}", file=out)
    print(f"mode: {mode.value}  variant: {variant.value}  epsilon: {_fmt(res.epsilon)}", file=out)
    print(f"grid: {res.grid!r}", file=out)
    if res.feasible:
        print(f"initial demand: {res.initial_demand.value!r} (position {res.initial_position})",
              file=out)
        print(f"certificate value: {res.certificate_value!r}", file=out)
        print(f"certificate cost: {res.certificate_cost!r}  (budget {prob['budget']!r})", file=out)
    if args.out:
        fileio.save_policy(res, prob["criterion"], args.out)
        print(f"policy written to {args.out}", file=out)
    return EXIT_OK if res.feasible else EXIT_INFEASIBLE


def cmd_execute(args, out) -> int:
    policy, meta = fileio.load_policy(args.policy)
    cmdp = fileio.load_instance(args.instance)
    fileio.check_policy_fits(policy, cmdp)
    d0 = meta.get("initial_position")
    if d0 is None:
        print("policy file records an infeasible solve; nothing to execute", file=out)
        return EXIT_INFEASIBLE
    if not 0 <= d0 < policy.num_demands:
        raise DimensionMismatch(f"initial position {d0} outside the demand domain")
    rewards, costs = [], []
    for i in range(args.episodes):
        tr = execute(policy, cmdp, d0, [args.seed, i])
        rewards.append(tr.total_reward)
        costs.append(tr.total_cost)
        if i < args.show:
            print(f"episode {i}: states={tr.states} actions={tr.actions} "
                  f"rewards={tr.rewards} costs={tr.costs} demands={tr.demand_values}", file=out)
    r = np.asarray(rewards)
    se = r.std(ddof=1) / math.sqrt(r.size) if r.size > 1 else 0.0
    print(f"episodes: {r.size}  mean reward: {float(r.mean())!r}  (s.e. {se:.6g})", file=out)
    print(f"mean cost: {float(np.mean(costs))!r}  max cost: {float(np.max(costs))!r}", file=out)
    if meta.get("certificate_value") is not None:
        print(f"certificate value: {meta['certificate_value']!r}", file=out)
    return EXIT_OK


def compare_rows(cmdp, criterion, budget, epsilons):
    """Oracle result and one CSV row per solver configuration."""
    oracle = brute_force(cmdp, criterion, budget)
    runs = [(None, Mode.EXACT, Variant.SUM)]
    for eps in epsilons:
        for mode in (Mode.ADDITIVE, Mode.RELATIVE):
            for variant in (Variant.SUM, Variant.DIFF):
                runs.append((eps, mode, variant))
    rows = []
    for eps, mode, variant in runs:
        if mode is Mode.RELATIVE and cmdp.r_min < 0:
            rows.append([eps, mode.value, variant.value, "skipped", None, None, None])
            continue
        res = solve(cmdp, criterion, budget, eps, mode, variant)
        gap = (oracle.value - res.certificate_value
               if res.feasible and oracle.feasible else None)
        rows.append([eps, mode.value, variant.value, res.verdict.value,
                     res.certificate_value, res.certificate_cost, gap])
    return oracle, rows


def cmd_compare(args, out) -> int:
    cmdp = fileio.load_instance(args.instance)
    prob = fileio.load_problem(args.problem)
    criterion = make_criterion(prob["criterion"])
    epsilons = [float(x) for x in args.epsilons.split(",") if x.strip()]
    oracle, rows = compare_rows(cmdp, criterion, prob["budget"], epsilons)
    verdict = "Feasible" if oracle.feasible else "Infeasible"
    print(f"# oracle: {verdict} value={_fmt(oracle.value)} cost={_fmt(oracle.cost)}", file=out)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow(["" if x is None else x for x in row])
    out.write(buf.getvalue())
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(buf.getvalue())
    return EXIT_OK


def cmd_generate(args, out) -> int:
    spec = GeneratorSpec(seed=args.seed, num_states=args.states, num_actions=args.actions,
                         horizon=args.horizon, transition_sparsity=args.sparsity)
    cmdp, budget = random_instance(spec)
    fileio.save_instance(cmdp, args.instance_out)
    fileio.save_problem(args.problem_out, args.criterion, budget)
    print(f"wrote {args.instance_out} and {args.problem_out} (budget {budget!r})", file=out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tsrcmdp", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve an instance and optionally save the policy")
    s.add_argument("instance")
    s.add_argument("problem")
    s.add_argument("--mode", choices=[m.value for m in Mode])
    s.add_argument("--epsilon", type=float)
    s.add_argument("--variant", choices=[v.value for v in Variant])
    s.add_argument("--out", help="policy file to write")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("execute", help="simulate a saved policy")
    e.add_argument("policy")
    e.add_argument("instance")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--episodes", type=int, default=1)
    e.add_argument("--show", type=int, default=10, help="episodes to print in full")
    e.set_defaults(func=cmd_execute)

    c = sub.add_parser("compare", help="oracle vs every solver configuration")
    c.add_argument("instance")
    c.add_argument("problem")
    c.add_argument("--epsilons", default="1,0.5,0.25")
    c.add_argument("--csv", help="also write the CSV table here")
    c.set_defaults(func=cmd_compare)

    g = sub.add_parser("generate", help="write a random instance and problem file")
    g.add_argument("instance_out")
    g.add_argument("problem_out")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--states", type=int, default=2)
    g.add_argument("--actions", type=int, default=2)
    g.add_argument("--horizon", type=int, default=2)
    g.add_argument("--sparsity", type=float, default=1.0)
    g.add_argument("--criterion", default="expectation",
                   choices=["expectation", "almost_sure", "anytime"])
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (CmdpError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

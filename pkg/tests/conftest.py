import numpy as np
import pytest

from tsrcmdp.core import CMdp
from tsrcmdp.oracle import GeneratorSpec, random_instance


def chain(rewards, costs=None):
    """Deterministic single-state, single-action chain."""
    H = len(rewards)
    costs = [0.0] * H if costs is None else costs
    P = np.ones((H, 1, 1, 1))
    return CMdp(P, np.reshape(rewards, (H, 1, 1)), np.reshape(costs, (H, 1, 1)))


def branch(r1, c1, leaf_rewards, leaf_costs, p=0.5):
    """Two epochs: from state 0 move to state 0 w.p. p or state 1, then collect a leaf."""
    P = np.zeros((2, 2, 1, 2))
    P[0, :, 0] = [p, 1 - p]
    P[1, :, 0, 0] = 1.0
    r = np.zeros((2, 2, 1))
    c = np.zeros((2, 2, 1))
    r[0, 0, 0], c[0, 0, 0] = r1, c1
    r[1, :, 0] = leaf_rewards
    c[1, :, 0] = leaf_costs
    return CMdp(P, r, c)


def acceptance_specs(n=60, seed=2024):
    """Seeded random family: S <= 3, A <= 2, H <= 3, rewards 0..3, costs 0..2, budgets 0..4."""
    rng = np.random.default_rng(seed)
    specs = []
    for i in range(n):
        specs.append(GeneratorSpec(
            seed=int(seed * 1000 + i),
            num_states=int(rng.integers(1, 4)),
            num_actions=int(rng.integers(1, 3)),
            horizon=int(rng.integers(1, 4)),
            transition_sparsity=float(rng.choice([0.34, 0.67, 1.0])),
        ))
    return specs


def acceptance_instances(n=60):
    return [random_instance(s) for s in acceptance_specs(n)]


@pytest.fixture(scope="session")
def small_instances():
    return acceptance_instances(25)


_REPORT = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def report(pytestconfig):
    """Record one PASS/FAIL line per acceptance criterion."""
    lines = pytestconfig.stash.setdefault(_REPORT, [])

    def record(number, title, failures, detail=""):
        status = "PASS" if not failures else "FAIL"
        line = f"[{status}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        print(line)
        lines.append(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)

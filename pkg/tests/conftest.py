import itertools

import numpy as np
import pytest

from grouplect import Dataset, GroupStructure, discretize, generate_illustrative


@pytest.fixture(scope="session")
def illustrative():
    return generate_illustrative(5000, 0.2, seed=0)


@pytest.fixture(scope="session")
def illustrative_view(illustrative):
    data, _ = illustrative
    return discretize(data)


@pytest.fixture
def xor_view():
    """Exact truth table of Y = XOR(Xk, Xj) plus an independent noise bit Xn."""
    rows = list(itertools.product((0, 1), repeat=3))
    X = np.array([[a, b, c] for a, b, c in rows], dtype=float)
    Y = np.array([[int(a != b)] for a, b, _ in rows])
    return discretize(Dataset(X, Y, ("Xk", "Xj", "Xn"), ("Y",)))


def random_instance(rng, n=None, p=None, q=None, max_arity=3, max_groups=None):
    """Small random discrete dataset with a random group partition and costs."""
    n = n or int(rng.integers(20, 200))
    p = p or int(rng.integers(2, 7))
    q = q or int(rng.integers(1, 4))
    X = rng.integers(0, max_arity, size=(n, p)).astype(float)
    # make some labels depend on features so selection is not trivial
    Y = rng.integers(0, 2, size=(n, q))
    for l in range(q):
        j = int(rng.integers(0, p))
        flip = rng.random(n) < 0.2
        Y[:, l] = np.where(flip, Y[:, l], (X[:, j] > 0).astype(int))
    k = int(rng.integers(1, (max_groups or p) + 1))
    owner = np.concatenate([np.arange(k), rng.integers(0, k, size=p - k)])
    rng.shuffle(owner)
    groups = tuple(tuple(int(j) for j in np.flatnonzero(owner == g)) for g in range(k))
    costs = tuple(float(c) for c in rng.choice([0.5, 1.0, 1.5, 2.0, 3.0], size=k))
    data = Dataset(X, Y, tuple(f"f{j}" for j in range(p)), tuple(f"y{l}" for l in range(q)))
    return data, GroupStructure(groups, costs)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import VERDICTS
    except ImportError:
        return
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)

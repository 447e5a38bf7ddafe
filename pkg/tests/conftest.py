import itertools

import numpy as np
import pytest

from cubicflow import BinaryOp, CubicMatrix, GroupTable, MulRule, mu_norm

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_matrix(rng, m, scale=1.0):
    return CubicMatrix(scale * rng.standard_normal((m, m, m)))


def unit_ball_matrix(rng, rule, radius=1.0):
    """Random Q with ||Q||_mu equal to ``radius * u`` for u uniform in (0, 1]."""
    q = random_matrix(rng, rule.dim)
    return q * (radius * (1 - rng.random()) / mu_norm(rule, q))


def naive_maksimov(table, a, b):
    """Five-index loop: c_ijr = sum_{l,n: a(l,n)=j} sum_k a_ilk b_knr."""
    m = a.dim
    out = np.zeros((m, m, m))
    for i, j, r in itertools.product(range(1, m + 1), repeat=3):
        total = 0.0
        for l, n in itertools.product(range(1, m + 1), repeat=2):
            if table[l - 1][n - 1] != j:
                continue
            for k in range(1, m + 1):
                total += a[i, l, k] * b[k, n, r]
        out[i - 1, j - 1, r - 1] = total
    return CubicMatrix(out)


def naive_a0(a, b):
    """Triple loop: c_ijr = sum_{k,n} a_ijk b_knr."""
    m = a.dim
    out = np.zeros((m, m, m))
    for i, j, r, k, n in itertools.product(range(1, m + 1), repeat=5):
        out[i - 1, j - 1, r - 1] += a[i, j, k] * b[k, n, r]
    return CubicMatrix(out)


def square_zero_rule(m):
    """Unital commutative associative rule: E_1 is the unit, E_p * E_q = 0 otherwise."""
    n = m**3
    entries = [(1, q, q, 1.0) for q in range(1, n + 1)] + [(p, 1, p, 1.0) for p in range(2, n + 1)]
    return MulRule.general(m, entries)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def group_rule():
    return MulRule.group(GroupTable.cyclic_product(2))


@pytest.fixture
def a0_op():
    return BinaryOp.from_function(2, lambda j, n: j)


ASSOCIATIVE_OPS_M2 = {
    "left": [[1, 1], [2, 2]],
    "right": [[1, 2], [1, 2]],
    "const1": [[1, 1], [1, 1]],
    "min": [[1, 1], [1, 2]],
    "z2": [[1, 2], [2, 1]],
}

import itertools

import numpy as np
import pytest

from cubicflow.rules import AxiomError, BinaryOp, GroupTable, MulRule, multiply, power
from cubicflow.tensor import basis, zero

from conftest import ASSOCIATIVE_OPS_M2, naive_a0, naive_maksimov, random_matrix


def test_binary_op_rejects_nonassociative():
    with pytest.raises(AxiomError) as info:
        BinaryOp([[2, 1], [1, 1]])
    i, j, k = info.value.witness
    t = np.array([[2, 1], [1, 1]])
    assert t[t[i - 1, j - 1] - 1, k - 1] != t[i - 1, t[j - 1, k - 1] - 1]


def test_binary_op_range_checked():
    with pytest.raises(ValueError):
        BinaryOp([[1, 3], [1, 2]])


@pytest.mark.parametrize("name", sorted(ASSOCIATIVE_OPS_M2))
def test_known_associative_ops(name):
    BinaryOp(ASSOCIATIVE_OPS_M2[name])


def test_group_table_axioms():
    g = GroupTable.cyclic_product(2)
    assert g.order == 8 and g.identity == 1 and g.is_commutative()
    z = g.table - 1
    for p in range(8):
        assert z[p, g.inverse[p] - 1] == 0
    # Latin square
    for row in z:
        assert sorted(row) == list(range(8))
    for col in z.T:
        assert sorted(col) == list(range(8))


def test_group_table_rejects_nongroup():
    table = np.ones((8, 8), dtype=int)
    with pytest.raises(AxiomError):
        GroupTable(table)


def test_cyclic_order_8():
    g = GroupTable.cyclic_product(2, factors=[8])
    assert g.is_commutative()
    assert g.inverse[1] == 8


def test_maksimov_basis_example():
    rule = MulRule.a0(2)
    assert multiply(rule, basis(2, 1, 1, 2), basis(2, 2, 1, 1)) == basis(2, 1, 1, 1)
    mak = MulRule.maksimov(BinaryOp(ASSOCIATIVE_OPS_M2["left"]))
    assert multiply(mak, basis(2, 1, 1, 2), basis(2, 2, 1, 1)) == basis(2, 1, 1, 1)


@pytest.mark.parametrize("name", sorted(ASSOCIATIVE_OPS_M2))
def test_kronecker_kill(name):
    rule = MulRule.maksimov(BinaryOp(ASSOCIATIVE_OPS_M2[name]))
    assert multiply(rule, basis(2, 1, 1, 1), basis(2, 2, 1, 1)) == zero(2)


def _ops_m3():
    yield BinaryOp.from_function(3, lambda j, n: j)
    yield BinaryOp.from_function(3, lambda j, n: n)
    yield BinaryOp.from_function(3, lambda j, n: min(j, n))
    yield BinaryOp.from_function(3, lambda j, n: (j + n - 2) % 3 + 1)


@pytest.mark.parametrize("op", [BinaryOp(t) for t in ASSOCIATIVE_OPS_M2.values()] + list(_ops_m3()),
                         ids=repr)
def test_kronecker_structure_exhaustive(op):
    m = op.dim
    rule = MulRule.maksimov(op)
    idx = list(itertools.product(range(1, m + 1), repeat=3))
    for (i, j, k), (l, n, r) in itertools.product(idx, idx):
        got = multiply(rule, basis(m, i, j, k), basis(m, l, n, r))
        want = basis(m, i, op(j, n), r) if k == l else zero(m)
        assert got == want


def test_a0_matches_triple_loop(rng):
    rule = MulRule.a0(2)
    for _ in range(20):
        a, b = random_matrix(rng, 2), random_matrix(rng, 2)
        assert multiply(rule, a, b).equals(naive_a0(a, b), 1e-12)


@pytest.mark.parametrize("m", [2, 3])
def test_a0_equals_maksimov_left(rng, m):
    fast = MulRule.a0(m)
    mak = MulRule.maksimov(BinaryOp.from_function(m, lambda j, n: j))
    for _ in range(20):
        a, b = random_matrix(rng, m), random_matrix(rng, m)
        assert multiply(fast, a, b).equals(multiply(mak, a, b), 1e-12)
    assert np.array_equal(fast.structure_constants(), mak.structure_constants())


def test_general_encoding_matches_maksimov(rng):
    op = BinaryOp(ASSOCIATIVE_OPS_M2["min"])
    mak = MulRule.maksimov(op)
    gen = mak.to_general()
    assert gen.kind == "general"
    for _ in range(100):
        a, b = random_matrix(rng, 2), random_matrix(rng, 2)
        want = naive_maksimov(op.table, a, b)
        assert multiply(mak, a, b).equals(want, 1e-12)
        assert multiply(gen, a, b).equals(want, 1e-12)


def test_group_rule_product(group_rule):
    g = group_rule.group_table
    for p, q in itertools.product(range(1, 9), repeat=2):
        ep = basis(2, *_ijk(p))
        eq = basis(2, *_ijk(q))
        assert multiply(group_rule, ep, eq) == basis(2, *_ijk(int(g.table[p - 1, q - 1])))


def _ijk(p, m=2):
    i, rest = divmod(p - 1, m * m)
    j, k = divmod(rest, m)
    return i + 1, j + 1, k + 1


def test_general_rule_validation():
    with pytest.raises(ValueError):
        MulRule.general(1, [(1, 1, 1, 1.0), (1, 1, 1, 2.0)])
    with pytest.raises(ValueError):
        MulRule.general(1, [(1, 1, 2, 1.0)])
    with pytest.raises(ValueError):
        MulRule.general(1, [(1, 1, 1, float("inf"))])


def test_dimension_mismatch(group_rule):
    with pytest.raises(ValueError):
        multiply(group_rule, zero(2), zero(3))


RULES = {
    "a0": lambda: MulRule.a0(2),
    "min": lambda: MulRule.maksimov(BinaryOp(ASSOCIATIVE_OPS_M2["min"])),
    "group": lambda: MulRule.group(GroupTable.cyclic_product(2)),
    "general": lambda: MulRule.from_structure_constants(
        np.random.default_rng(3).standard_normal((8, 8, 8)) * (np.random.default_rng(4).random((8, 8, 8)) < 0.1)),
}


@pytest.mark.parametrize("name", sorted(RULES))
def test_bilinearity(rng, name):
    rule = RULES[name]()
    for _ in range(20):
        a, a2, b, b2 = (random_matrix(rng, 2) for _ in range(4))
        lam = rng.standard_normal()
        assert multiply(rule, a + a2, b).equals(multiply(rule, a, b) + multiply(rule, a2, b), 1e-9)
        assert multiply(rule, a, b + b2).equals(multiply(rule, a, b) + multiply(rule, a, b2), 1e-9)
        assert multiply(rule, lam * a, b).equals(lam * multiply(rule, a, b), 1e-9)


def test_power_basics(rng, group_rule):
    q = random_matrix(rng, 2, 0.3)
    assert power(group_rule, q, 1) == q
    assert power(group_rule, q, 2) == multiply(group_rule, q, q)
    with pytest.raises(ValueError):
        power(group_rule, q, 0)
    u = basis(2, 1, 1, 1)
    assert power(group_rule, q, 0, unit=u) == u


def test_power_squaring_matches_left_fold(rng, group_rule):
    q = random_matrix(rng, 2, 0.3)
    naive = multiply(group_rule, multiply(group_rule, multiply(group_rule, q, q), q), q)
    for n, want in [(4, naive)]:
        assert power(group_rule, q, n, associative=True).equals(want, 1e-12)
    for n in range(1, 9):
        assert power(group_rule, q, n, associative=True).equals(power(group_rule, q, n), 1e-12)


def test_power_of_idempotent():
    rule = MulRule.a0(2)
    # E_111 * E_111 = E_111 under a0
    x = basis(2, 1, 1, 1)
    assert power(rule, x, 5) == x

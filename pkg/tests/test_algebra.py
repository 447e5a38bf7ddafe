import numpy as np
import pytest

from cubicflow.algebra import (DimensionGuardError, NotInvertibleError, analyze, find_idempotents,
                               find_unit, inverse, is_associative, is_commutative, is_cubic_stochastic,
                               mu_norm, mul_norm_constant, sample_power_associativity, unit_of)
from cubicflow.rules import BinaryOp, GroupTable, MulRule, multiply
from cubicflow.tensor import basis, zero

from conftest import ASSOCIATIVE_OPS_M2, random_matrix, square_zero_rule


def _ijk(p, m=2):
    i, rest = divmod(p - 1, m * m)
    j, k = divmod(rest, m)
    return i + 1, j + 1, k + 1


def test_group_report(group_rule):
    report = analyze(group_rule)
    assert report.commutative and report.associative and report.unital
    assert report.unit == basis(2, 1, 1, 1)
    assert report.power_assoc.passed
    assert report.norm_constant == 1
    assert report.cubic_stochastic
    for x in report.idempotents:
        assert (multiply(group_rule, x, x) - x).norm_l1() <= 1e-8
    assert any(x == zero(2) for x in report.idempotents)
    assert any(x.equals(basis(2, 1, 1, 1), 1e-9) for x in report.idempotents)


def test_noncommutative_group():
    # cyclic order 8 table permuted into a non-abelian group is hard to hand-build;
    # use the dihedral group D4 of order 8 instead
    rot = lambda k: (k % 4, 0)
    elems = [(r, s) for s in (0, 1) for r in range(4)]

    def mul(x, y):
        (r1, s1), (r2, s2) = x, y
        return ((r1 + (-r2 if s1 else r2)) % 4, s1 ^ s2)

    index = {e: n + 1 for n, e in enumerate(elems)}
    table = [[index[mul(x, y)] for y in elems] for x in elems]
    rule = MulRule.group(GroupTable(table))
    report = analyze(rule)
    assert report.associative and report.unital and not report.commutative
    assert report.unit == basis(2, *_ijk(index[rot(0)]))


@pytest.mark.parametrize("name", sorted(ASSOCIATIVE_OPS_M2))
def test_maksimov_associative_matches_random_triples(rng, name):
    rule = MulRule.maksimov(BinaryOp(ASSOCIATIVE_OPS_M2[name]))
    verdict = is_associative(rule)
    oracle = True
    for _ in range(50):
        a, b, c = (random_matrix(rng, 2) for _ in range(3))
        lhs = multiply(rule, multiply(rule, a, b), c)
        rhs = multiply(rule, a, multiply(rule, b, c))
        oracle &= lhs.equals(rhs, 1e-9)
    assert verdict == oracle
    assert verdict


def test_nonassociative_general_rule(rng):
    rule = MulRule.from_structure_constants(np.random.default_rng(1).random((8, 8, 8)))
    assert not is_associative(rule)
    assert not is_commutative(rule)
    a, b, c = (random_matrix(rng, 2) for _ in range(3))
    assert not multiply(rule, multiply(rule, a, b), c).equals(multiply(rule, a, multiply(rule, b, c)), 1e-9)
    assert not sample_power_associativity(rule, samples=5).passed


def test_commutative_verdict_agrees_with_oracle(rng, group_rule):
    assert is_commutative(group_rule)
    for _ in range(20):
        a, b = random_matrix(rng, 2), random_matrix(rng, 2)
        assert multiply(group_rule, a, b).equals(multiply(group_rule, b, a), 1e-9)
    assert not is_commutative(MulRule.a0(2))


def test_dimension_guard():
    with pytest.raises(DimensionGuardError):
        is_associative(MulRule.a0(3), max_dim=2)
    with pytest.raises(DimensionGuardError):
        analyze(MulRule.a0(5))


def test_a0_not_unital():
    assert find_unit(MulRule.a0(2)) is None
    with pytest.raises(ValueError):
        unit_of(MulRule.a0(2))


def test_norm_constant():
    assert mul_norm_constant(MulRule.a0(2)) == 1
    for table in ASSOCIATIVE_OPS_M2.values():
        assert mul_norm_constant(MulRule.maksimov(BinaryOp(table))) == 1
    assert mul_norm_constant(MulRule.group(GroupTable.cyclic_product(2))) == 1
    assert mul_norm_constant(MulRule.general(1, [(1, 1, 1, 3.0)])) == 3


@pytest.mark.parametrize("rule", [
    MulRule.a0(2),
    MulRule.group(GroupTable.cyclic_product(2)),
    MulRule.general(2, [(1, 2, 3, 3.0), (4, 4, 1, -2.0), (2, 2, 2, 0.5)]),
    MulRule.from_structure_constants(np.random.default_rng(7).standard_normal((8, 8, 8))),
], ids=["a0", "group", "sparse", "dense"])
def test_submultiplicative(rng, rule):
    for _ in range(1000):
        a, b = random_matrix(rng, 2), random_matrix(rng, 2)
        assert mu_norm(rule, multiply(rule, a, b)) <= mu_norm(rule, a) * mu_norm(rule, b) * (1 + 1e-12)


def test_inverse_identity_and_scalar(group_rule):
    u = unit_of(group_rule)
    assert inverse(group_rule, u, u).equals(u, 1e-12)
    assert inverse(group_rule, 2 * u, u).equals(0.5 * u, 1e-12)


def test_inverse_of_basis_is_group_inverse(group_rule):
    g = group_rule.group_table
    u = unit_of(group_rule)
    for p in range(1, 9):
        got = inverse(group_rule, basis(2, *_ijk(p)), u)
        assert got.equals(basis(2, *_ijk(int(g.inverse[p - 1]))), 1e-12)


def test_inverse_round_trip(rng, group_rule):
    u = unit_of(group_rule)
    for _ in range(20):
        a = u * 3 + random_matrix(rng, 2, 0.2)
        x = inverse(group_rule, a, u)
        assert multiply(group_rule, a, x).equals(u, 1e-9)
        assert multiply(group_rule, x, a).equals(u, 1e-9)


def test_singular_not_invertible(group_rule):
    u = unit_of(group_rule)
    # sum over the group is a zero divisor
    ones = zero(2) + 1.0 * sum((basis(2, *_ijk(p)) for p in range(2, 9)), basis(2, 1, 1, 1))
    with pytest.raises(NotInvertibleError):
        inverse(group_rule, ones, u)


def test_idempotents_unital_square_zero():
    rule = square_zero_rule(2)
    u = unit_of(rule)
    found = find_idempotents(rule, n_starts=5, unit=u)
    assert any(x == zero(2) for x in found)
    assert any(x.equals(u, 1e-12) for x in found)


def test_idempotent_stochastic():
    c = np.random.default_rng(11).random((8, 8, 8))
    c /= c.sum(axis=2, keepdims=True)
    rule = MulRule.from_structure_constants(c)
    assert is_cubic_stochastic(rule)
    found = find_idempotents(rule)
    simplex = [x for x in found if abs(x.flat.sum() - 1) < 1e-9 and x.flat.min() >= -1e-12]
    assert simplex
    for x in found:
        assert (multiply(rule, x, x) - x).norm_l1() <= 1e-8

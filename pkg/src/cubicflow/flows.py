"""Time-indexed families of cubic matrices that solve the Kolmogorov-Chapman
equation ``M[s,t] = M[s,tau] * M[tau,t]`` under a fixed rule.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import algebra
from .expr import Expression
from .rules import BinaryOp, MulRule, multiply, power
from .tensor import CubicMatrix, DEFAULT_TOL, linear_combination


class ConstraintError(ValueError):
    """A construction precondition failed.

    ``constraint`` names the violated condition; ``details`` carries the
    location (time, index, residual or witness).
    """

    def __init__(self, constraint: str, message: str, **details):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint
        self.details = details


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    start: float = 0.0
    end: float = 10.0
    step: float = 0.05

    def times(self) -> np.ndarray:
        if self.step <= 0 or self.end < self.start:
            raise ValueError(f"invalid time grid {self}")
        count = int(math.floor((self.end - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(count)


DEFAULT_GRID = TimeGrid()


@dataclass(eq=False)
class FlowFamily:
    """``(s, t) -> M[s,t]`` for ``0 <= s < t`` together with its rule."""

    rule: MulRule
    evaluator: Callable[[float, float], CubicMatrix]
    homogeneous: bool
    discrete: bool
    label: str
    params: dict = field(default_factory=dict, repr=False)

    def check_domain(self, s, t) -> None:
        if self.discrete:
            for x in (s, t):
                if float(x) != int(x):
                    raise DomainError(f"{self.label} is discrete-time; got non-integer time {x!r}")
        if not 0 <= s < t:
            raise DomainError(f"{self.label} is defined for 0 <= s < t; got s={s!r}, t={t!r}")

    def eval(self, s, t) -> CubicMatrix:
        self.check_domain(s, t)
        if self.discrete:
            s, t = int(s), int(t)
        out = self.evaluator(s, t)
        if out.dim != self.rule.dim:
            raise DomainError(f"{self.label} produced dim {out.dim}, rule has dim {self.rule.dim}")
        return out

    __call__ = eval


class ScalarFamily:
    """Named scalar functions of time: ``f_i``, ``g_i`` and ``gamma_ij``.

    Each function is a callable ``t -> float``. Use :meth:`from_expressions`
    to build one from expression strings; then ``sources`` records them.
    """

    def __init__(self, m: int, f=None, g=None, gamma=None, sources: Optional[dict] = None):
        self.dim = m
        self.f = list(f) if f is not None else None
        self.g = list(g) if g is not None else None
        self.gamma = [list(row) for row in gamma] if gamma is not None else None
        for name, seq in (("f", self.f), ("g", self.g)):
            if seq is not None and len(seq) != m:
                raise ValueError(f"{name} needs {m} functions, got {len(seq)}")
        if self.gamma is not None and (len(self.gamma) != m or any(len(r) != m for r in self.gamma)):
            raise ValueError(f"gamma needs an {m}x{m} array of functions")
        self.sources = sources

    @classmethod
    def from_expressions(cls, m: int, f=None, g=None, gamma=None) -> ScalarFamily:
        """Expressions in ``t`` (and ``m``).

        A single string for ``f``/``g`` is a template over the index ``k``
        (alias ``i``); a single string for ``gamma`` is a template over ``i, j``.
        Lists give one expression per index.
        """
        sources = {}

        def vector(name, spec):
            if spec is None:
                return None
            if isinstance(spec, (str, int, float)):
                expr = Expression(spec, ("t", "m", "k", "i"))
                sources[name] = str(spec)
                return [(lambda t, k=k: expr(t=t, m=m, k=k, i=k)) for k in range(1, m + 1)]
            exprs = [Expression(s, ("t", "m")) for s in spec]
            sources[name] = [str(s) for s in spec]
            return [(lambda t, e=e: e(t=t, m=m)) for e in exprs]

        def matrix(spec):
            if spec is None:
                return None
            if isinstance(spec, (str, int, float)):
                expr = Expression(spec, ("t", "m", "i", "j"))
                sources["gamma"] = str(spec)
                return [[(lambda t, i=i, j=j: expr(t=t, m=m, i=i, j=j)) for j in range(1, m + 1)]
                        for i in range(1, m + 1)]
            exprs = [[Expression(s, ("t", "m")) for s in row] for row in spec]
            sources["gamma"] = [[str(s) for s in row] for row in spec]
            return [[(lambda t, e=e: e(t=t, m=m)) for e in row] for row in exprs]

        return cls(m, vector("f", f), vector("g", g), matrix(gamma), sources)

    def f_at(self, t) -> np.ndarray:
        return np.array([fn(t) for fn in self.f])

    def g_at(self, t) -> np.ndarray:
        return np.array([fn(t) for fn in self.g])

    def gamma_at(self, t) -> np.ndarray:
        return np.array([[fn(t) for fn in row] for row in self.gamma])


class MatrixPath:
    """``t -> sum_n c_n(t) * B_n`` for fixed matrices ``B_n``.

    ``terms`` holds ``(coefficient, matrix)`` pairs; a coefficient is an
    expression string in ``t`` or a callable.
    """

    def __init__(self, terms):
        self.terms = []
        self.serializable = True
        for coeff, mat in terms:
            if isinstance(coeff, (str, int, float)):
                e = Expression(coeff, ("t",))
                self.terms.append((str(coeff), e, mat))
            else:
                self.serializable = False
                self.terms.append((None, coeff, mat))
        if not self.terms:
            raise ValueError("matrix path needs at least one term")

    def __call__(self, t) -> CubicMatrix:
        return linear_combination((fn(t=t) if src is not None else fn(t), mat)
                                  for src, fn, mat in self.terms)


# -- families ---------------------------------------------------------------

def flow_power(rule: MulRule, q: CubicMatrix, samples: int = 100, seed=0) -> FlowFamily:
    """Discrete family ``M[n,k] = q^(k-n)``; needs sampled power-associativity."""
    verdict = algebra.sample_power_associativity(rule, samples=samples, seed=seed)
    if not verdict.passed:
        raise ConstraintError("power-associativity", "sampled check failed", witness=verdict.witness)
    cache: dict[int, CubicMatrix] = {1: q}
    lock = threading.Lock()

    def evaluate(s, t):
        n = t - s
        with lock:
            if n not in cache:
                top = max(k for k in cache if k < n)
                cur = cache[top]
                for k in range(top + 1, n + 1):
                    cur = multiply(rule, cur, q)
                    cache[k] = cur
            return cache[n]

    return FlowFamily(rule, evaluate, homogeneous=True, discrete=True,
                      label="A1 (power-associativity sampled, not proved)",
                      params={"family": "a1", "Q": q})


def flow_idempotent(rule: MulRule, x: CubicMatrix, tol: float = DEFAULT_TOL) -> FlowFamily:
    """Constant family ``M[s,t] = x`` for an idempotent ``x``."""
    res = (multiply(rule, x, x) - x).norm_l1()
    if res > tol:
        raise ConstraintError("idempotent", f"||X*X - X||_1 = {res:.3e} exceeds {tol:g}", residual=res)
    return FlowFamily(rule, lambda s, t: x, homogeneous=True, discrete=False, label="A2",
                      params={"family": "a2", "X": x})


def exp_mu(rule: MulRule, q: CubicMatrix, t: float = 1.0, tol: float = 1e-12,
           max_terms: int = 10_000) -> CubicMatrix:
    """Truncated series ``sum_n (tq)^n / n!`` in a unital associative algebra.

    Stops at the first N whose tail bound
    ``x^(N+1) / (N+1)! * e^x`` (``x = ||tq||_mu``) is at most ``tol``.
    """
    algebra.require_associative(rule)
    unit = algebra.unit_of(rule)
    x = algebra.mu_norm(rule, q) * abs(t)
    tq = t * q
    total = unit
    term = unit
    log_x = math.log(x) if x > 0 else -math.inf
    for n in range(1, max_terms + 1):
        if log_x == -math.inf:
            break
        term = multiply(rule, term, tq) / n
        total = total + term
        # x^(n+1) / (n+1)! * e^x, in logs to avoid overflow
        log_tail = (n + 1) * log_x - math.lgamma(n + 2) + x
        if log_tail <= math.log(tol):
            break
    else:
        raise RuntimeError(f"series did not reach tol {tol:g} in {max_terms} terms")
    return total


def flow_exp(rule: MulRule, q: CubicMatrix, tol: float = 1e-12) -> FlowFamily:
    """Homogeneous family ``M[s,t] = exp_mu((t-s) q)``."""
    algebra.require_associative(rule)
    algebra.unit_of(rule)
    return FlowFamily(rule, lambda s, t: exp_mu(rule, q, t - s, tol), homogeneous=True,
                      discrete=False, label="A3", params={"family": "a3", "Q": q, "tol": tol})


def flow_invertible(rule: MulRule, path: Callable[[float], CubicMatrix],
                    tol: float = DEFAULT_TOL) -> FlowFamily:
    """``M[s,t] = A[s] * inverse(A[t])`` for an invertible path ``t -> A[t]``.

    Inverses are cached per exact float time.
    """
    algebra.require_associative(rule)
    unit = algebra.unit_of(rule)
    cache: dict[float, CubicMatrix] = {}
    lock = threading.Lock()

    def inv_at(t):
        key = float(t)
        with lock:
            hit = cache.get(key)
        if hit is not None:
            return hit
        try:
            val = algebra.inverse(rule, path(t), unit, tol)
        except algebra.NotInvertibleError as exc:
            raise DomainError(f"A[t] is not invertible at t = {t!r}: {exc}") from None
        with lock:
            return cache.setdefault(key, val)

    def evaluate(s, t):
        return multiply(rule, path(s), inv_at(t))

    return FlowFamily(rule, evaluate, homogeneous=False, discrete=False, label="A4",
                      params={"family": "a4", "path": path})


def is_uniformly_distributed(op: BinaryOp) -> bool:
    """True iff every value of ``op`` has exactly m preimage pairs."""
    return bool(np.all(op.preimage_counts() == op.dim))


def _check_times(grid: TimeGrid):
    return grid.times() if isinstance(grid, TimeGrid) else np.asarray(grid, dtype=float)


def flow_fg(op: BinaryOp, fam: ScalarFamily, check_tol: float = 1e-9,
            grid: TimeGrid = DEFAULT_GRID) -> FlowFamily:
    """``M[s,t]_ijk = f_i(s) g_k(t)`` under the Maksimov rule of a uniformly
    distributed ``op``; requires ``sum_k f_k g_k = 1/m`` on the grid."""
    if not isinstance(op, BinaryOp):
        op = BinaryOp(op)
    m = op.dim
    if fam.dim != m:
        raise ValueError(f"scalar family has dim {fam.dim}, operation has dim {m}")
    if not is_uniformly_distributed(op):
        raise ConstraintError("uniform distribution", "operation is not uniformly distributed",
                              counts=op.preimage_counts().tolist())
    for t in _check_times(grid):
        res = float(fam.f_at(t) @ fam.g_at(t) - 1.0 / m)
        if abs(res) > check_tol:
            raise ConstraintError("sum_k f_k g_k = 1/m",
                                  f"violated at t = {t:g} (residual {res:.3e})", t=float(t), residual=res)

    def evaluate(s, t):
        outer = np.outer(fam.f_at(s), fam.g_at(t))
        return CubicMatrix(np.repeat(outer[:, None, :], m, axis=1))

    return FlowFamily(MulRule.maksimov(op), evaluate, homogeneous=False, discrete=False,
                      label="A5", params={"family": "a5", "op": op, "scalars": fam})


def flow_gamma(fam: ScalarFamily, check_tol: float = 1e-9, grid: TimeGrid = DEFAULT_GRID) -> FlowFamily:
    """``M[s,t]_ijr = gamma_ij(s) / g_r(t)`` under the a0 rule; requires
    ``g_i != 0`` and ``m * sum_j gamma_ij = g_i`` on the grid."""
    m = fam.dim
    for t in _check_times(grid):
        g = fam.g_at(t)
        zeros = np.nonzero(g == 0)[0]
        if len(zeros):
            raise ConstraintError("g_i != 0", f"g_{zeros[0] + 1} vanishes at t = {t:g}",
                                  i=int(zeros[0]) + 1, t=float(t))
        res = m * fam.gamma_at(t).sum(axis=1) - g
        worst = int(np.argmax(np.abs(res)))
        if abs(res[worst]) > check_tol:
            raise ConstraintError("m * sum_j gamma_ij = g_i",
                                  f"violated for i = {worst + 1} at s = {t:g} (residual {res[worst]:.3e})",
                                  i=worst + 1, s=float(t), residual=float(res[worst]))

    def evaluate(s, t):
        g = fam.g_at(t)
        if np.any(g == 0):
            raise DomainError(f"g vanishes at t = {t!r}")
        gam = fam.gamma_at(s)
        return CubicMatrix(gam[:, :, None] / g[None, None, :])

    return FlowFamily(MulRule.a0(m), evaluate, homogeneous=False, discrete=False, label="A6",
                      params={"family": "a6", "scalars": fam})


def _invert_perm(perm: Sequence[int]) -> list:
    inv = [0] * len(perm)
    for x, y in enumerate(perm, start=1):
        inv[y - 1] = x
    return inv


def transport(source: FlowFamily, perm: Sequence[int], op: BinaryOp) -> FlowFamily:
    """Carry a family over the Maksimov rule of ``b`` to the rule of ``op``.

    Needs ``op(j, n) = perm^-1(b(perm(j), perm(n)))`` for all j, n; the new
    matrices are ``N[i,j,r] = M[perm(i), perm(j), perm(r)]``.
    """
    b = source.rule.binary_op
    if b is None:
        raise ValueError(f"transport needs a Maksimov-rule source, got kind {source.rule.kind!r}")
    if not isinstance(op, BinaryOp):
        op = BinaryOp(op)
    perm = [int(p) for p in perm]
    m = b.dim
    if sorted(perm) != list(range(1, m + 1)) or op.dim != m:
        raise ValueError(f"perm must be a permutation of 1..{m} and op must have dim {m}")
    inv = _invert_perm(perm)
    for j in range(1, m + 1):
        for n in range(1, m + 1):
            want = inv[b(perm[j - 1], perm[n - 1]) - 1]
            if op(j, n) != want:
                raise ConstraintError("permutation compatibility",
                                      f"a({j},{n}) = {op(j, n)} but pi^-1(b(pi(j),pi(n))) = {want}",
                                      witness=(j, n))

    return FlowFamily(MulRule.maksimov(op), lambda s, t: source.eval(s, t).relabel(perm),
                      homogeneous=source.homogeneous, discrete=source.discrete,
                      label=f"transport({source.label})",
                      params={"family": "transport", "source": source, "perm": perm, "op": op})


def rules_equal(a: MulRule, b: MulRule) -> bool:
    if a is b:
        return True
    return a.dim == b.dim and np.array_equal(a.structure_constants(), b.structure_constants())


def flow_product(rule: MulRule, factors: Sequence[FlowFamily]) -> FlowFamily:
    """Pointwise product ``M1[s,t] * M2[s,t] * ...`` in a commutative associative algebra."""
    factors = list(factors)
    if not factors:
        raise ValueError("flow_product needs at least one factor")
    algebra.require_associative(rule)
    algebra.require_commutative(rule)
    for f in factors:
        if not rules_equal(f.rule, rule):
            raise ValueError(f"factor {f.label} uses a different rule")
    if len(factors) == 1:
        return factors[0]

    def evaluate(s, t):
        out = factors[0].eval(s, t)
        for f in factors[1:]:
            out = multiply(rule, out, f.eval(s, t))
        return out

    return FlowFamily(rule, evaluate,
                      homogeneous=all(f.homogeneous for f in factors),
                      discrete=any(f.discrete for f in factors),
                      label="product(" + ", ".join(f.label for f in factors) + ")",
                      params={"family": "product", "factors": factors})


__all__ = [
    "ConstraintError", "DomainError", "FlowFamily", "MatrixPath", "ScalarFamily", "TimeGrid",
    "exp_mu", "flow_exp", "flow_fg", "flow_gamma", "flow_idempotent", "flow_invertible",
    "flow_power", "flow_product", "is_uniformly_distributed", "power", "transport",
]

"""Property analysis of an algebra of cubic matrices under a fixed rule."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .rules import MulRule, multiply
from .tensor import CubicMatrix, DEFAULT_TOL

MAX_ASSOC_DIM = 4


class DimensionGuardError(ValueError):
    pass


class NotInvertibleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class PowerAssociativity:
    passed: bool
    n_samples: int
    witness: Optional[dict] = None

    def __str__(self):
        if self.passed:
            return f"pass (sampled, {self.n_samples} samples)"
        return f"fail (witness n={self.witness['n']}, k={self.witness['k']}, residual={self.witness['residual']:.3e})"


@dataclass
class AlgebraReport:
    commutative: bool
    associative: bool
    unital: bool
    unit: Optional[CubicMatrix]
    idempotents: list = field(default_factory=list)
    power_assoc: Optional[PowerAssociativity] = None
    norm_constant: float = 1.0
    cubic_stochastic: bool = False

    def to_dict(self) -> dict:
        return {
            "commutative": self.commutative,
            "associative": self.associative,
            "unital": self.unital,
            "unit": None if self.unit is None else self.unit.flat.tolist(),
            "idempotents": [x.flat.tolist() for x in self.idempotents],
            "power_associative": None if self.power_assoc is None else {
                "passed": self.power_assoc.passed,
                "n_samples": self.power_assoc.n_samples,
                "witness": self.power_assoc.witness,
            },
            "norm_constant": self.norm_constant,
            "cubic_stochastic": self.cubic_stochastic,
        }


def is_commutative(rule: MulRule, tol: float = DEFAULT_TOL) -> bool:
    c = rule.structure_constants()
    return bool(np.all(np.abs(c - c.transpose(1, 0, 2)) <= tol))


def is_associative(rule: MulRule, tol: float = DEFAULT_TOL, max_dim: int = MAX_ASSOC_DIM) -> bool:
    """Exhaustive check of ``sum_r c_ij^r c_rk^l == sum_r c_ir^l c_jk^r``."""
    if rule.dim > max_dim:
        raise DimensionGuardError(
            f"exhaustive associativity check limited to m <= {max_dim}, got m = {rule.dim}")
    c = rule.structure_constants()
    n = rule.n
    left = (c.reshape(n * n, n) @ c.reshape(n, n * n)).reshape(n, n, n, n)        # [i,j,k,l]
    right = np.einsum("irl,jkr->ijkl", c, c, optimize=True)
    return bool(np.all(np.abs(left - right) <= tol))


def is_cubic_stochastic(rule: MulRule, tol: float = DEFAULT_TOL) -> bool:
    c = rule.structure_constants()
    return bool(np.all(c >= -tol) and np.all(np.abs(c.sum(axis=2) - 1.0) <= tol))


def find_unit(rule: MulRule, tol: float = DEFAULT_TOL) -> Optional[CubicMatrix]:
    """Least-squares solve ``u * E_p = E_p = E_p * u`` for every basis element.

    Returns None when the residual exceeds ``tol``.
    """
    c = rule.structure_constants()
    n = rule.n
    eye = np.eye(n).ravel()
    # (u * E_p)_w = sum_i u_i c[i, p, w];  (E_p * u)_w = sum_i u_i c[p, i, w]
    lhs = np.vstack([c.reshape(n, n * n).T, c.transpose(1, 0, 2).reshape(n, n * n).T])
    rhs = np.concatenate([eye, eye])
    u, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    if np.abs(lhs @ u - rhs).max() > tol:
        return None
    snapped = np.where(np.abs(u - np.round(u)) < 1e-10, np.round(u), u)
    if np.abs(lhs @ snapped - rhs).max() <= np.abs(lhs @ u - rhs).max():
        u = snapped
    return CubicMatrix.from_flat(u)


def _random_matrix(rng, m):
    return CubicMatrix(rng.standard_normal((m, m, m)))


def sample_power_associativity(rule: MulRule, samples: int = 100, max_total: int = 8,
                               tol: float = 1e-7, seed=0) -> PowerAssociativity:
    """Falsification test ``x^n * x^k == x^(n+k)`` for n + k <= ``max_total``.

    Samples are scaled to unit ``C * ||x||_1`` so powers stay bounded.
    """
    rng = np.random.default_rng(seed)
    const = mul_norm_constant(rule)
    for _ in range(samples):
        x = _random_matrix(rng, rule.dim)
        x = x / (const * x.norm_l1())
        powers = [None, x]
        for _ in range(2, max_total + 1):
            powers.append(multiply(rule, powers[-1], x))
        for total in range(2, max_total + 1):
            for n in range(1, total):
                res = (multiply(rule, powers[n], powers[total - n]) - powers[total]).norm_l1()
                if res > tol:
                    return PowerAssociativity(False, samples, {"n": n, "k": total - n, "residual": res})
    return PowerAssociativity(True, samples)


def mul_norm_constant(rule: MulRule) -> float:
    """``max(1, max_pq ||E_p * E_q||_1)``.

    ``||A||_mu = C * ||A||_1`` is then submultiplicative for this rule.
    """
    if "norm_const" not in rule._cache:
        c = rule.structure_constants()
        rule._cache["norm_const"] = max(1.0, float(np.abs(c).sum(axis=2).max()))
    return rule._cache["norm_const"]


def mu_norm(rule: MulRule, a: CubicMatrix) -> float:
    return mul_norm_constant(rule) * a.norm_l1()


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1), 0.0)


def _newton_polish(c: np.ndarray, x: np.ndarray, iters: int = 30, tol: float = 1e-14):
    n = len(x)
    eye = np.eye(n)
    for _ in range(iters):
        vx = np.einsum("p,q,pqw->w", x, x, c)
        f = vx - x
        if np.abs(f).sum() <= tol:
            break
        jac = np.einsum("q,pqw->wp", x, c) + np.einsum("p,pqw->wq", x, c) - eye
        try:
            step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        x = x + step
        if not np.all(np.isfinite(x)) or np.abs(x).max() > 1e8:
            break
    return x


def find_idempotents(rule: MulRule, n_starts: int = 20, iters: int = 500,
                     tol: float = 1e-8, damping: float = 0.5, seed=0,
                     unit: Optional[CubicMatrix] = None) -> list:
    """Fixed points of ``V(x) = x * x`` found by damped iteration.

    Starts are 0, ``unit`` (if given) and ``n_starts`` random points. For a
    cubic-stochastic rule the random starts lie on the simplex and their
    iterates are projected back onto it. Each candidate is refined by Newton steps and
    kept only when ``||X * X - X||_1 <= tol``; near-duplicates are merged.
    """
    c = rule.structure_constants()
    n = rule.n
    rng = np.random.default_rng(seed)
    stochastic = is_cubic_stochastic(rule)
    starts = [np.zeros(n)]
    if unit is not None:
        starts.append(unit.flat.copy())
    for _ in range(n_starts):
        if stochastic:
            starts.append(rng.dirichlet(np.ones(n)))
        else:
            starts.append(rng.standard_normal(n) / n)

    found: list[CubicMatrix] = []
    for n_start, x in enumerate(starts):
        x = np.array(x, dtype=float)
        project = stochastic and n_start >= len(starts) - n_starts
        for _ in range(iters):
            vx = np.einsum("p,q,pqw->w", x, x, c)
            nxt = (1 - damping) * x + damping * vx
            if project:
                nxt = _project_simplex(nxt)
            if not np.all(np.isfinite(nxt)) or np.abs(nxt).max() > 1e6:
                break
            done = np.abs(nxt - x).sum() < 1e-15
            x = nxt
            if done:
                break
        if not np.all(np.isfinite(x)):
            continue
        x = _newton_polish(c, x)
        if not np.all(np.isfinite(x)):
            continue
        cand = CubicMatrix.from_flat(x)
        if (multiply(rule, cand, cand) - cand).norm_l1() > tol:
            continue
        if any(cand.equals(prev, 1e-6) for prev in found):
            continue
        found.append(cand)
    return found


def inverse(rule: MulRule, a: CubicMatrix, unit: CubicMatrix, tol: float = DEFAULT_TOL) -> CubicMatrix:
    """Two-sided inverse of ``a``: solve ``a * x = unit`` then verify ``x * a = unit``."""
    lmat = rule.left_matrix(a)
    cond = np.linalg.cond(lmat)
    if not np.isfinite(cond) or cond > 1e12:
        raise NotInvertibleError(f"left multiplication is singular (cond = {cond:.3e})")
    x = CubicMatrix.from_flat(np.linalg.solve(lmat, unit.flat))
    if (multiply(rule, a, x) - unit).norm_l1() > tol:
        raise NotInvertibleError("no right inverse within tolerance")
    if (multiply(rule, x, a) - unit).norm_l1() > tol:
        raise NotInvertibleError("only a one-sided inverse exists")
    return x


def analyze(rule: MulRule, tol: float = DEFAULT_TOL, samples: int = 100,
            max_dim: int = MAX_ASSOC_DIM, idempotent_starts: int = 20, seed=0) -> AlgebraReport:
    """Commutativity, associativity, unit, idempotents and sampled power-associativity."""
    if rule.dim > max_dim:
        raise DimensionGuardError(f"analysis limited to m <= {max_dim}, got m = {rule.dim}")
    unit = find_unit(rule, tol)
    return AlgebraReport(
        commutative=is_commutative(rule, tol),
        associative=is_associative(rule, tol, max_dim),
        unital=unit is not None,
        unit=unit,
        idempotents=find_idempotents(rule, n_starts=idempotent_starts, tol=max(tol, 1e-8),
                                     seed=seed, unit=unit),
        power_assoc=sample_power_associativity(rule, samples=samples, seed=seed),
        norm_constant=mul_norm_constant(rule),
        cubic_stochastic=is_cubic_stochastic(rule, tol),
    )


def unit_of(rule: MulRule, tol: float = DEFAULT_TOL) -> CubicMatrix:
    """Cached unit; raises when the rule is not unital."""
    if "unit" not in rule._cache:
        rule._cache["unit"] = find_unit(rule, tol)
    u = rule._cache["unit"]
    if u is None:
        raise ValueError(f"{rule!r} is not unital")
    return u


def require_associative(rule: MulRule, tol: float = DEFAULT_TOL) -> None:
    if "assoc" not in rule._cache:
        rule._cache["assoc"] = is_associative(rule, tol)
    if not rule._cache["assoc"]:
        raise ValueError(f"{rule!r} is not associative")


def require_commutative(rule: MulRule, tol: float = DEFAULT_TOL) -> None:
    if "comm" not in rule._cache:
        rule._cache["comm"] = is_commutative(rule, tol)
    if not rule._cache["comm"]:
        raise ValueError(f"{rule!r} is not commutative")


__all__ = [
    "AlgebraReport", "DimensionGuardError", "NotInvertibleError", "PowerAssociativity",
    "analyze", "find_idempotents", "find_unit", "inverse", "is_associative",
    "is_commutative", "is_cubic_stochastic", "mu_norm", "mul_norm_constant",
    "require_associative", "require_commutative", "sample_power_associativity", "unit_of",
]

"""Multiplication rules between cubic matrices.

Four kinds are supported:

``general``
    an arbitrary structure tensor ``C[uvw | ijk, lnr]`` stored as a sparse
    coordinate list over flat indices;
``maksimov``
    ``E_ijk * E_lnr = delta_kl E_{i a(j,n) r}`` for an associative
    operation ``a`` on ``{1..m}``;
``a0``
    the Maksimov rule with ``a(j, n) = j``, i.e. ``c_ijr = sum_kn a_ijk b_knr``;
``group``
    ``E_p * E_q = E_{alpha(p, q)}`` for a group ``alpha`` on the m**3 flat
    indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .tensor import CubicMatrix, _check_dim


class AxiomError(ValueError):
    """An operation table violates a required axiom.

    ``witness`` holds the offending (1-based) indices.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def _as_table(table, n: int, name: str) -> np.ndarray:
    arr = np.asarray(table)
    if arr.shape != (n, n):
        raise ValueError(f"{name} table must be {n}x{n}, got shape {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.round(arr)):
            raise ValueError(f"{name} table entries must be integers")
        arr = arr.astype(int)
    if arr.min() < 1 or arr.max() > n:
        raise ValueError(f"{name} table entries must lie in 1..{n}")
    arr = arr.astype(int)
    arr.flags.writeable = False
    return arr


def _associativity_witness(t: np.ndarray) -> Optional[tuple[int, int, int]]:
    """First (1-based) triple with t(t(x,y),z) != t(x,t(y,z)), else None."""
    z = t - 1
    left = z[z, :]                  # left[x, y, w] = t(t(x,y), w)
    right = z[:, z]                 # right[x, y, w] = t(x, t(y,w))
    bad = np.argwhere(left != right)
    if len(bad):
        return tuple(int(v) + 1 for v in bad[0])
    return None


class BinaryOp:
    """Associative binary operation ``a: I x I -> I`` with I = {1..m}.

    Associativity is checked exhaustively at construction.
    """

    def __init__(self, table):
        arr = np.asarray(table)
        if arr.ndim != 2:
            raise ValueError("operation table must be two-dimensional")
        self.dim = arr.shape[0]
        _check_dim(self.dim)
        self.table = _as_table(arr, self.dim, "operation")
        w = _associativity_witness(self.table)
        if w is not None:
            raise AxiomError(f"operation is not associative at (i, j, k) = {w}", w)

    @classmethod
    def from_function(cls, m: int, fn) -> BinaryOp:
        return cls([[fn(i, j) for j in range(1, m + 1)] for i in range(1, m + 1)])

    def __call__(self, i: int, j: int) -> int:
        return int(self.table[i - 1, j - 1])

    def preimage_counts(self) -> np.ndarray:
        """``counts[j-1] = #{(l, n): a(l, n) = j}``."""
        return np.bincount(self.table.ravel() - 1, minlength=self.dim)

    def __eq__(self, other) -> bool:
        return isinstance(other, BinaryOp) and np.array_equal(self.table, other.table)

    def __hash__(self):
        return hash(self.table.tobytes())

    def __repr__(self):
        return f"BinaryOp({self.table.tolist()})"


class GroupTable:
    """A group on the flat index set ``{1..m**3}``."""

    def __init__(self, table, m: Optional[int] = None):
        arr = np.asarray(table)
        if arr.ndim != 2:
            raise ValueError("group table must be two-dimensional")
        n = arr.shape[0]
        if m is None:
            m = round(n ** (1 / 3))
        if m**3 != n:
            raise ValueError(f"group order {n} is not m**3 for m = {m}")
        self.dim = m
        self.order = n
        self.table = _as_table(arr, n, "group")
        w = _associativity_witness(self.table)
        if w is not None:
            raise AxiomError(f"group table is not associative at {w}", w)
        z = self.table - 1
        idx = np.arange(n)
        ids = [e for e in range(n) if np.array_equal(z[e], idx) and np.array_equal(z[:, e], idx)]
        if not ids:
            raise AxiomError("group table has no two-sided identity")
        e = ids[0]
        self.identity = e + 1
        inv = np.full(n, -1)
        for p in range(n):
            hits = np.nonzero((z[p] == e) & (z[:, p] == e))[0]
            if not len(hits):
                raise AxiomError(f"element {p + 1} has no two-sided inverse", (p + 1,))
            inv[p] = hits[0]
        self.inverse = inv + 1
        self.inverse.flags.writeable = False

    @classmethod
    def cyclic_product(cls, m: int, factors=None) -> GroupTable:
        """Direct product of cyclic groups of the given orders on flat indices.

        ``factors`` defaults to ``(m, m, m)`` so that the group acts coordinatewise
        on ``(i, j, k)``; its product must be m**3. The result is commutative.
        """
        factors = tuple(factors or (m, m, m))
        n = m**3
        if int(np.prod(factors)) != n:
            raise ValueError(f"factor orders {factors} do not multiply to {n}")
        coords = np.array(list(itertools.product(*[range(f) for f in factors])))
        mods = np.array(factors)
        weights = np.array([int(np.prod(factors[i + 1:])) for i in range(len(factors))])
        s = (coords[:, None, :] + coords[None, :, :]) % mods
        return cls(s @ weights + 1, m)

    def is_commutative(self) -> bool:
        return bool(np.array_equal(self.table, self.table.T))

    def __repr__(self):
        return f"GroupTable(order={self.order}, identity={self.identity})"


KINDS = ("general", "maksimov", "a0", "group")


@dataclass(frozen=True, eq=False)
class MulRule:
    """A bilinear multiplication on m x m x m cubic matrices.

    Build instances with :meth:`general`, :meth:`maksimov`, :meth:`a0` or
    :meth:`group`.
    """

    dim: int
    kind: str
    op: Optional[BinaryOp] = None
    group_table: Optional[GroupTable] = None
    # general: 0-based flat (p, q, w) arrays and coefficients, sorted by (p, q)
    entries: Optional[tuple] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def general(cls, m: int, entries) -> MulRule:
        """``entries`` is an iterable of 1-based ``(ijk, lnr, uvw, coeff)``."""
        _check_dim(m)
        n = m**3
        rows = [tuple(e) for e in entries]
        seen = set()
        for row in rows:
            if len(row) != 4:
                raise ValueError(f"entry must be (ijk, lnr, uvw, coeff), got {row}")
            key = tuple(int(v) for v in row[:3])
            if any(not 1 <= v <= n for v in key):
                raise ValueError(f"flat index out of range 1..{n} in entry {row}")
            if key in seen:
                raise ValueError(f"duplicate structure-tensor key {key}")
            if not np.isfinite(row[3]):
                raise ValueError(f"non-finite coefficient in entry {row}")
            seen.add(key)
        rows.sort(key=lambda r: (int(r[0]), int(r[1]), int(r[2])))
        p = np.array([int(r[0]) - 1 for r in rows], dtype=int)
        q = np.array([int(r[1]) - 1 for r in rows], dtype=int)
        w = np.array([int(r[2]) - 1 for r in rows], dtype=int)
        c = np.array([float(r[3]) for r in rows])
        for a in (p, q, w, c):
            a.flags.writeable = False
        return cls(m, "general", entries=(p, q, w, c))

    @classmethod
    def from_structure_constants(cls, c: np.ndarray) -> MulRule:
        """General rule from a dense ``c[p, q, w]`` array over 0-based flat indices."""
        c = np.asarray(c, dtype=float)
        n = c.shape[0]
        m = round(n ** (1 / 3))
        if c.shape != (n, n, n) or m**3 != n:
            raise ValueError(f"structure constants must have shape (m^3,)*3, got {c.shape}")
        nz = np.argwhere(c != 0)
        return cls.general(m, [(p + 1, q + 1, w + 1, c[p, q, w]) for p, q, w in nz])

    @classmethod
    def maksimov(cls, op: BinaryOp) -> MulRule:
        if not isinstance(op, BinaryOp):
            op = BinaryOp(op)
        return cls(op.dim, "maksimov", op=op)

    @classmethod
    def a0(cls, m: int) -> MulRule:
        _check_dim(m)
        return cls(m, "a0")

    @classmethod
    def group(cls, table: GroupTable) -> MulRule:
        return cls(table.dim, "group", group_table=table)

    @property
    def n(self) -> int:
        return self.dim**3

    @property
    def binary_op(self) -> Optional[BinaryOp]:
        """The Maksimov operation behind this rule (``a0`` included)."""
        if self.kind == "maksimov":
            return self.op
        if self.kind == "a0":
            return BinaryOp.from_function(self.dim, lambda j, n: j)
        return None

    def __call__(self, a: CubicMatrix, b: CubicMatrix) -> CubicMatrix:
        return multiply(self, a, b)

    def structure_constants(self) -> np.ndarray:
        """Dense ``c[p, q, w]`` with ``E_p * E_q = sum_w c[p, q, w] E_w`` (0-based flat).

        Cached; treat the result as read-only.
        """
        if "dense" not in self._cache:
            n = self.n
            c = np.zeros((n, n, n))
            if self.kind == "general":
                p, q, w, coef = self.entries
                c[p, q, w] = coef
            elif self.kind == "group":
                z = self.group_table.table - 1
                pp, qq = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
                c[pp, qq, z] = 1.0
            else:
                m = self.dim
                t = self.binary_op.table - 1
                for i, j, k, n_, r in itertools.product(range(m), repeat=5):
                    p = (i * m + j) * m + k
                    q = (k * m + n_) * m + r
                    w = (i * m + t[j, n_]) * m + r
                    c[p, q, w] = 1.0
            c.flags.writeable = False
            self._cache["dense"] = c
        return self._cache["dense"]

    def to_general(self) -> MulRule:
        """Equivalent rule of kind ``general`` (explicit sparse structure tensor)."""
        return MulRule.from_structure_constants(self.structure_constants())

    def left_matrix(self, a: CubicMatrix) -> np.ndarray:
        """Matrix ``L`` with ``flat(a * x) = L @ flat(x)``."""
        return np.einsum("p,pqw->wq", a.flat, self.structure_constants())

    def right_matrix(self, b: CubicMatrix) -> np.ndarray:
        """Matrix ``R`` with ``flat(x * b) = R @ flat(x)``."""
        return np.einsum("q,pqw->wp", b.flat, self.structure_constants())

    def __repr__(self):
        extra = ""
        if self.kind == "maksimov":
            extra = f", op={self.op.table.tolist()}"
        elif self.kind == "general":
            extra = f", nnz={len(self.entries[3])}"
        return f"MulRule(dim={self.dim}, kind={self.kind!r}{extra})"


def _maksimov_product(table: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    m = a.shape[0]
    t = np.einsum("ilk,knr->ilnr", a, b).reshape(m, m * m, m)
    onehot = np.zeros((m * m, m))
    onehot[np.arange(m * m), table.ravel() - 1] = 1.0
    return np.einsum("ipr,pj->ijr", t, onehot)


def multiply(rule: MulRule, a: CubicMatrix, b: CubicMatrix) -> CubicMatrix:
    """Product ``a * b`` under ``rule``."""
    if a.dim != rule.dim or b.dim != rule.dim:
        raise ValueError(f"dimension mismatch: rule {rule.dim}, operands {a.dim} and {b.dim}")
    if rule.kind == "a0":
        return CubicMatrix(np.einsum("ijk,knr->ijr", a.array, b.array))
    if rule.kind == "maksimov":
        return CubicMatrix(_maksimov_product(rule.op.table, a.array, b.array))
    n = rule.n
    if rule.kind == "group":
        weights = np.outer(a.flat, b.flat).ravel()
        out = np.bincount(rule.group_table.table.ravel() - 1, weights=weights, minlength=n)
        return CubicMatrix.from_flat(out)
    p, q, w, coef = rule.entries
    out = np.bincount(w, weights=a.flat[p] * b.flat[q] * coef, minlength=n)
    return CubicMatrix.from_flat(out)


def power(rule: MulRule, q: CubicMatrix, n: int, *, associative: bool = False,
          unit: Optional[CubicMatrix] = None) -> CubicMatrix:
    """Left-nested ``q * q * ... * q`` (n factors).

    With ``associative=True`` repeated squaring is used. ``n = 0`` returns
    ``unit``, which must then be supplied.
    """
    if int(n) != n or n < 0:
        raise ValueError(f"power must be a nonnegative integer, got {n!r}")
    if n == 0:
        if unit is None:
            raise ValueError("zeroth power needs a unital rule")
        return unit
    if not associative:
        out = q
        for _ in range(n - 1):
            out = multiply(rule, out, q)
        return out
    result, base = None, q
    while n:
        if n & 1:
            result = base if result is None else multiply(rule, result, base)
        n >>= 1
        if n:
            base = multiply(rule, base, base)
    return result

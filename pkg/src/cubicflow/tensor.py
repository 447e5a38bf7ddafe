"""Cubic matrices: m x m x m real arrays of structural constants.

Indices are 1-based in the public API (matching the usual ``q_{ijk}``
notation) and the flattened view uses the row-major map

    flat = (i - 1) * m**2 + (j - 1) * m + (k - 1) + 1

so that flat indices run over ``1..m**3``.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

import numpy as np

DEFAULT_TOL = 1e-9


class FlatIndex(NamedTuple):
    """A 1-based flat index together with its ``(i, j, k)`` decomposition."""

    value: int
    i: int
    j: int
    k: int


def flat_index(m: int, i: int, j: int, k: int) -> FlatIndex:
    _check_dim(m)
    for x in (i, j, k):
        if not 1 <= x <= m:
            raise IndexError(f"index {x} out of range 1..{m}")
    return FlatIndex((i - 1) * m * m + (j - 1) * m + (k - 1) + 1, i, j, k)


def unflatten(m: int, value: int) -> FlatIndex:
    _check_dim(m)
    if not 1 <= value <= m**3:
        raise IndexError(f"flat index {value} out of range 1..{m**3}")
    i, rest = divmod(value - 1, m * m)
    j, k = divmod(rest, m)
    return FlatIndex(value, i + 1, j + 1, k + 1)


def _check_dim(m: int) -> None:
    if int(m) != m or m < 1:
        raise ValueError(f"dimension must be a positive integer, got {m!r}")


class CubicMatrix:
    """Immutable m x m x m real array.

    Arithmetic (``+``, ``-``, scalar ``*``) is entrywise. ``==`` is exact
    equality; use :meth:`equals` for a tolerance.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.array(data, dtype=np.float64)
        if arr.ndim == 1:
            m = round(len(arr) ** (1 / 3))
            if m**3 != len(arr):
                raise ValueError(f"flat length {len(arr)} is not a cube")
            arr = arr.reshape(m, m, m)
        if arr.ndim != 3 or not (arr.shape[0] == arr.shape[1] == arr.shape[2]) or arr.shape[0] < 1:
            raise ValueError(f"expected shape (m, m, m), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("cubic matrix entries must be finite")
        arr.flags.writeable = False
        self._data = arr

    @classmethod
    def from_flat(cls, vec) -> CubicMatrix:
        return cls(np.asarray(vec, dtype=np.float64).ravel())

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    @property
    def array(self) -> np.ndarray:
        """Read-only (m, m, m) view of the entries."""
        return self._data

    @property
    def flat(self) -> np.ndarray:
        """Read-only length m**3 vector in row-major order."""
        return self._data.reshape(-1)

    def __getitem__(self, ijk):
        i, j, k = ijk
        return float(self._data[i - 1, j - 1, k - 1])

    def _same_dim(self, other: CubicMatrix) -> None:
        if not isinstance(other, CubicMatrix):
            raise TypeError(f"expected CubicMatrix, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: CubicMatrix) -> CubicMatrix:
        self._same_dim(other)
        return CubicMatrix(self._data + other._data)

    def __sub__(self, other: CubicMatrix) -> CubicMatrix:
        self._same_dim(other)
        return CubicMatrix(self._data - other._data)

    def __neg__(self) -> CubicMatrix:
        return CubicMatrix(-self._data)

    def __mul__(self, lam) -> CubicMatrix:
        if isinstance(lam, CubicMatrix):
            raise TypeError("use a MulRule to multiply cubic matrices")
        return CubicMatrix(float(lam) * self._data)

    __rmul__ = __mul__

    def __truediv__(self, lam) -> CubicMatrix:
        return CubicMatrix(self._data / float(lam))

    def __eq__(self, other) -> bool:
        if not isinstance(other, CubicMatrix):
            return NotImplemented
        return self.dim == other.dim and bool(np.array_equal(self._data, other._data))

    def __hash__(self) -> int:
        return hash((self.dim, self._data.tobytes()))

    def equals(self, other: CubicMatrix, tol: float = DEFAULT_TOL) -> bool:
        """Entrywise agreement within absolute ``tol`` (exact when 0)."""
        if self.dim != other.dim:
            return False
        return bool(np.all(np.abs(self._data - other._data) <= tol))

    def norm_l1(self) -> float:
        return float(np.abs(self._data).sum())

    def max_abs(self) -> float:
        return float(np.abs(self._data).max())

    def nonzero(self) -> list[tuple[tuple[int, int, int], float]]:
        """1-based ``((i, j, k), value)`` pairs for the nonzero entries."""
        return [(tuple(int(x) + 1 for x in idx), float(self._data[idx]))
                for idx in zip(*np.nonzero(self._data))]

    def relabel(self, perm) -> CubicMatrix:
        """Return ``N`` with ``N[i,j,k] = self[perm(i), perm(j), perm(k)]``.

        ``perm`` is a 1-based sequence: ``perm[x - 1]`` is the image of x.
        """
        p = np.asarray(perm, dtype=int) - 1
        if sorted(p.tolist()) != list(range(self.dim)):
            raise ValueError(f"not a permutation of 1..{self.dim}: {list(perm)}")
        return CubicMatrix(self._data[np.ix_(p, p, p)])

    def __repr__(self) -> str:
        return f"CubicMatrix(dim={self.dim}, nnz={np.count_nonzero(self._data)})"


def zero(m: int) -> CubicMatrix:
    _check_dim(m)
    return CubicMatrix(np.zeros((m, m, m)))


def basis(m: int, i: int, j: int, k: int) -> CubicMatrix:
    """The unit cubic matrix with a single 1 at ``(i, j, k)``."""
    idx = flat_index(m, i, j, k)
    vec = np.zeros(m**3)
    vec[idx.value - 1] = 1.0
    return CubicMatrix.from_flat(vec)


def add(a: CubicMatrix, b: CubicMatrix) -> CubicMatrix:
    return a + b


def scale(lam: float, a: CubicMatrix) -> CubicMatrix:
    return lam * a


def norm_l1(a: CubicMatrix) -> float:
    return a.norm_l1()


def linear_combination(terms: Iterable[tuple[float, CubicMatrix]]) -> CubicMatrix:
    terms = list(terms)
    if not terms:
        raise ValueError("empty linear combination")
    out = np.zeros_like(terms[0][1].array)
    for c, mat in terms:
        terms[0][1]._same_dim(mat)
        out = out + c * mat.array
    return CubicMatrix(out)

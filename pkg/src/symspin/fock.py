"""Truncated Fock (Hermite product) realization of one symplectic spinor fiber.

The fiber over a point of a 2n-dimensional symplectic manifold is modelled by
products h_{a_1}(x_1)...h_{a_n}(x_n) of unit-normalized Hermite functions with
total degree |a| <= L. Clifford multiplication by the unitary frame is realized
as e_j -> i x_j and f_j -> d/dx_j.

Truncation corrupts the top levels of any product of Clifford factors, so every
operator carries a ``guard_level``: the highest level on which its matrix
agrees with the untruncated operator.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


def rank(n: int, l: int) -> int:
    """Dimension of the level-l subspace: (l+n-1)!/(l!(n-1)!)."""
    if n < 1 or l < 0:
        raise ValueError("need n >= 1 and l >= 0")
    return math.comb(l + n - 1, l)


def complex_structure(n: int) -> np.ndarray:
    """Matrix of J in the frame (e_1..e_n, f_1..f_n).

    Column a holds the components of J e_a, so J e_j = f_j and J f_j = -e_j.
    """
    J = np.zeros((2 * n, 2 * n))
    for j in range(n):
        J[j + n, j] = 1.0
        J[j, j + n] = -1.0
    return J


def symplectic_matrix(n: int) -> np.ndarray:
    """Gram matrix of omega in the unitary frame: omega(e_i, f_j) = delta_ij."""
    W = np.zeros((2 * n, 2 * n))
    W[:n, n:] = np.eye(n)
    W[n:, :n] = -np.eye(n)
    return W


@dataclass(frozen=True)
class FockBasis:
    """Multi-indices alpha in N^n with |alpha| <= L in graded-lexicographic order.

    Within a level, indices are sorted in descending lexicographic order, so
    (l, 0, ..., 0) comes first and every level occupies a contiguous block.
    """

    n: int
    L: int
    index_map: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1 or self.L < 0:
            raise ValueError("need n >= 1 and L >= 0")
        idx = []
        for l in range(self.L + 1):
            level = [a for a in itertools.product(range(l + 1), repeat=self.n) if sum(a) == l]
            idx.extend(sorted(level, reverse=True))
        object.__setattr__(self, "index_map", tuple(idx))

    @property
    def dim(self) -> int:
        return len(self.index_map)

    @cached_property
    def position(self) -> dict:
        return {a: i for i, a in enumerate(self.index_map)}

    @cached_property
    def levels(self) -> np.ndarray:
        return np.array([sum(a) for a in self.index_map], dtype=int)

    def index(self, alpha) -> int:
        return self.position[tuple(alpha)]

    def level_slice(self, l: int) -> slice:
        if not 0 <= l <= self.L:
            raise ValueError(f"level {l} outside 0..{self.L}")
        start = sum(rank(self.n, k) for k in range(l))
        return slice(start, start + rank(self.n, l))

    def guarded_mask(self, guard: int) -> np.ndarray:
        return self.levels <= guard

    def vector(self, alpha, coeff: complex = 1.0) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(alpha)] = coeff
        return v


@dataclass(frozen=True)
class FiberOperator:
    """Dense complex matrix on a FockBasis with truncation bookkeeping.

    ``degree`` is the maximal level shift, ``guard_level`` the highest input
    level on which the matrix is exact. For a product A @ B the input must
    stay below B's guard and B's output (shifted by up to deg B) below A's.
    """

    basis: FockBasis
    matrix: np.ndarray
    guard_level: int
    degree: int = 0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.basis.dim, self.basis.dim):
            raise ValueError("matrix dimension does not match basis")
        object.__setattr__(self, "matrix", m)

    def _check(self, other: "FiberOperator"):
        if other.basis != self.basis:
            raise ValueError("operators act on different bases")

    def __matmul__(self, other: "FiberOperator") -> "FiberOperator":
        self._check(other)
        guard = min(other.guard_level, self.guard_level - other.degree)
        return FiberOperator(self.basis, self.matrix @ other.matrix, guard, self.degree + other.degree)

    def __add__(self, other: "FiberOperator") -> "FiberOperator":
        self._check(other)
        return FiberOperator(self.basis, self.matrix + other.matrix,
                             min(self.guard_level, other.guard_level), max(self.degree, other.degree))

    def __sub__(self, other: "FiberOperator") -> "FiberOperator":
        return self + (-1.0) * other

    def __mul__(self, s: complex) -> "FiberOperator":
        return FiberOperator(self.basis, s * self.matrix, self.guard_level, self.degree)

    __rmul__ = __mul__

    def __neg__(self) -> "FiberOperator":
        return (-1.0) * self

    def commutator(self, other: "FiberOperator") -> "FiberOperator":
        return self @ other - other @ self

    def apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def guarded(self) -> np.ndarray:
        """Columns on guarded levels (the trustworthy part of the matrix)."""
        return self.matrix[:, self.basis.guarded_mask(self.guard_level)]

    def block(self, l: int) -> np.ndarray:
        """Level-l diagonal block; requires l <= guard_level."""
        if l > self.guard_level:
            raise ValueError(f"level {l} above guard {self.guard_level}")
        s = self.basis.level_slice(l)
        return self.matrix[s, s]

    def adjoint(self) -> "FiberOperator":
        return FiberOperator(self.basis, self.matrix.conj().T, self.guard_level, self.degree)


def identity(basis: FockBasis) -> FiberOperator:
    return FiberOperator(basis, np.eye(basis.dim), basis.L, 0)


def _axis(basis: FockBasis, j: int) -> int:
    if not 1 <= j <= basis.n:
        raise ValueError(f"axis {j} outside 1..{basis.n}")
    return j - 1


def _ladder_entries(basis: FockBasis, j: int, up: float, down: float) -> FiberOperator:
    """Operator with <a+1|O|a> = up*sqrt((a+1)/2) and <a-1|O|a> = down*sqrt(a/2) on axis j."""
    ax = _axis(basis, j)
    M = np.zeros((basis.dim, basis.dim))
    for col, a in enumerate(basis.index_map):
        k = a[ax]
        raised = a[:ax] + (k + 1,) + a[ax + 1:]
        if raised in basis.position:
            M[basis.position[raised], col] = up * math.sqrt((k + 1) / 2)
        if k > 0:
            lowered = a[:ax] + (k - 1,) + a[ax + 1:]
            M[basis.position[lowered], col] = down * math.sqrt(k / 2)
    return FiberOperator(basis, M, basis.L - 1, 1)


def build_position(basis: FockBasis, j: int) -> FiberOperator:
    """Multiplication by x_j (axis j is 1-based)."""
    return _ladder_entries(basis, j, 1.0, 1.0)


def build_derivative(basis: FockBasis, j: int) -> FiberOperator:
    """d/dx_j (axis j is 1-based)."""
    return _ladder_entries(basis, j, -1.0, 1.0)


@dataclass(frozen=True)
class FrameVector:
    """Tangent vector sum_j a_j e_j + b_j f_j in a unitary frame."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("a and b must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("frame coefficients must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def components(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])

    @classmethod
    def from_components(cls, v) -> "FrameVector":
        v = np.asarray(v, dtype=float)
        n = v.size // 2
        return cls(v[:n], v[n:])

    @classmethod
    def unit(cls, n: int, k: int) -> "FrameVector":
        """k-th frame vector, k = 0..2n-1 ordered (e_1..e_n, f_1..f_n)."""
        v = np.zeros(2 * n)
        v[k] = 1.0
        return cls.from_components(v)


def omega(v: FrameVector, w: FrameVector) -> float:
    return float(v.components @ symplectic_matrix(v.n) @ w.components)


def clifford_generators(basis: FockBasis) -> list:
    """[e_1., ..., e_n., f_1., ..., f_n.] as fiber operators."""
    es = [1j * build_position(basis, j) for j in range(1, basis.n + 1)]
    fs = [build_derivative(basis, j) for j in range(1, basis.n + 1)]
    return es + fs


def clifford_mult(basis: FockBasis, v: FrameVector) -> FiberOperator:
    """Clifford multiplication v. = sum_j a_j (i x_j) + b_j d_j."""
    if v.n != basis.n:
        raise ValueError("frame vector dimension does not match basis")
    out = FiberOperator(basis, np.zeros((basis.dim, basis.dim)), basis.L - 1, 1)
    for coeff, c in zip(v.components, clifford_generators(basis)):
        if coeff != 0.0:
            out = out + coeff * c
    return out


def hamiltonian_HJ(basis: FockBasis) -> FiberOperator:
    """H^J = 1/2 sum_a c_a c_a; equals -(l + n/2) on level l for l <= L-2."""
    out = None
    for c in clifford_generators(basis):
        out = c @ c if out is None else out + c @ c
    return 0.5 * out


def ladder(basis: FockBasis, j: int, sign: int) -> FiberOperator:
    """L^(+-)_j = (f_j -+ i e_j). ; L^(+) = d + x annihilates level 0."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    x = build_position(basis, j)
    d = build_derivative(basis, j)
    # e_j. = i x_j, so -+ i e_j. = +- x_j
    return d + x if sign == 1 else d - x


def level_projector(basis: FockBasis, l: int) -> FiberOperator:
    P = np.zeros((basis.dim, basis.dim))
    s = basis.level_slice(l)
    P[s, s] = np.eye(s.stop - s.start)
    return FiberOperator(basis, P, basis.L, 0)

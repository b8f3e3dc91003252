"""u(n) in its real 2n-dimensional defining representation and its image on spinors.

An element of u(n) is a real antisymmetric 2n x 2n matrix commuting with J.
The map r_Q sends it to the fiber operator (i/2) sum_{jk} A_jk e_k. (J e_j). ,
which preserves every level and restricts there to the (l, 0, ..., 0)
representation of su(n) with u(1) charge q_l = -(l + n/2).

Trace constants come in two conventions: ``"verified"`` (the default) uses the
constants confirmed by brute-force fiber traces, ``"printed"`` keeps the
alternative closed forms whose su(n) normalization constant is half as large.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .fock import FiberOperator, FockBasis, clifford_generators, complex_structure, rank

CONVENTIONS = ("verified", "printed")


def q_level(n: int, l: int) -> Fraction:
    """Eigenvalue of H^J on level l."""
    return -Fraction(2 * l + n, 2)


def _check_convention(convention: str):
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")


@dataclass(frozen=True)
class UnAlgebraElement:
    """Real antisymmetric 2n x 2n matrix commuting with J."""

    A: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
            raise ValueError("expected a real 2n x 2n matrix")
        scale = max(1.0, float(np.abs(A).max(initial=0.0)))
        if np.abs(A + A.T).max() > 1e-12 * scale:
            raise ValueError("u(n) element must be antisymmetric")
        J = complex_structure(A.shape[0] // 2)
        if np.abs(A @ J - J @ A).max() > 1e-12 * scale:
            raise ValueError("u(n) element must commute with J")
        object.__setattr__(self, "A", A)

    @property
    def n(self) -> int:
        return self.A.shape[0] // 2

    @property
    def u1_part(self) -> float:
        """s_A = sum_j A_{j, j+n}."""
        n = self.n
        return float(sum(self.A[j, j + n] for j in range(n)))

    def bracket(self, other: "UnAlgebraElement") -> "UnAlgebraElement":
        return UnAlgebraElement(self.A @ other.A - other.A @ self.A)

    def __add__(self, other: "UnAlgebraElement") -> "UnAlgebraElement":
        return UnAlgebraElement(self.A + other.A)

    def __sub__(self, other: "UnAlgebraElement") -> "UnAlgebraElement":
        return UnAlgebraElement(self.A - other.A)

    def __mul__(self, s: float) -> "UnAlgebraElement":
        return UnAlgebraElement(s * self.A)

    __rmul__ = __mul__

    @classmethod
    def from_complex(cls, X: np.ndarray) -> "UnAlgebraElement":
        """Real form [[Re X, -Im X], [Im X, Re X]] of an anti-hermitian n x n matrix."""
        X = np.asarray(X, dtype=complex)
        return cls(np.block([[X.real, -X.imag], [X.imag, X.real]]))

    @classmethod
    def project(cls, M: np.ndarray) -> "UnAlgebraElement":
        """Orthogonal projection of an arbitrary real 2n x 2n matrix onto u(n)."""
        M = np.asarray(M, dtype=float)
        A = 0.5 * (M - M.T)
        J = complex_structure(M.shape[0] // 2)
        return cls(0.5 * (A - J @ A @ J))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "UnAlgebraElement":
        """Entries uniform in [-1, 1], projected onto the constraint space."""
        return cls.project(rng.uniform(-1.0, 1.0, size=(2 * n, 2 * n)))


def defining_cartan(n: int, j: int) -> UnAlgebraElement:
    """K_j with (K_j)_{j,j+n} = -(K_j)_{j+n,j} = 1 (j is 1-based)."""
    if not 1 <= j <= n:
        raise ValueError(f"index {j} outside 1..{n}")
    K = np.zeros((2 * n, 2 * n))
    K[j - 1, j - 1 + n] = 1.0
    K[j - 1 + n, j - 1] = -1.0
    return UnAlgebraElement(K)


def u1_projection(A: UnAlgebraElement) -> UnAlgebraElement:
    """Pi A = (s_A / n) sum_j K_j, the u(1) component of A."""
    n = A.n
    return (A.u1_part / n) * sum((defining_cartan(n, j) for j in range(2, n + 1)), defining_cartan(n, 1))


def su_basis(n: int) -> list:
    """Basis T_a of su(n) orthonormal for <A, B> = -tr(AB)/2 in the real representation.

    Equivalently T_a = i t_a with hermitian t_a, tr(t_a t_b) = delta_ab.
    """
    out = []
    s = 1.0 / math.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            t = np.zeros((n, n), complex)
            t[j, k] = t[k, j] = s
            out.append(t)
            t = np.zeros((n, n), complex)
            t[j, k], t[k, j] = -1j * s, 1j * s
            out.append(t)
    for k in range(1, n):
        d = np.zeros(n)
        d[:k] = 1.0
        d[k] = -k
        out.append(np.diag(d / math.sqrt(k * (k + 1))).astype(complex))
    return [UnAlgebraElement.from_complex(1j * t) for t in out]


def r_Q(A: UnAlgebraElement, basis: FockBasis) -> FiberOperator:
    """(i/2) sum_{jk} A_jk e_k. (J e_j). as a fiber operator."""
    if A.n != basis.n:
        raise ValueError("u(n) element and basis have different n")
    M = 0.5j * np.tensordot(A.A, _rq_products(basis), axes=([0, 1], [0, 1]))
    # level preserving: exact up to L-2, shifts no level
    return FiberOperator(basis, M, basis.L - 2, 0)


@lru_cache(maxsize=16)
def _rq_products(basis: FockBasis) -> np.ndarray:
    """H[j, k] = e_k. (J e_j). as dense matrices."""
    Cm = np.array([op.matrix for op in clifford_generators(basis)])
    Jc = np.einsum("mj,mab->jab", complex_structure(basis.n), Cm)
    return np.einsum("kab,jbc->jkac", Cm, Jc, optimize=True)


def casimir_value(n: int, l: int) -> Fraction:
    """Quadratic Casimir l(n+l)(n-1)/n of su(n) on (l, 0, ..., 0)."""
    if n < 2:
        raise ValueError("su(1) is trivial; Casimir needs n >= 2")
    if l < 0:
        raise ValueError("level must be non-negative")
    return Fraction(l * (n + l) * (n - 1), n)


def casimir_operator(basis: FockBasis) -> FiberOperator:
    """sum_a r_Q(T_a)^2 over the orthonormal su(n) basis; equals -C_2(n,l) on level l."""
    ops = [r_Q(T, basis) for T in su_basis(basis.n)]
    out = ops[0] @ ops[0]
    for op in ops[1:]:
        out = out + op @ op
    return out


def proportionality_c(n: int, l: int, convention: str = "verified") -> Fraction:
    """c(n,l) with tr_l(r_Q(A) r_Q(B)) = c(n,l) tr(AB) for A, B in su(n).

    verified: (l+n)!/(2 (l-1)! (n+1)!), so c(n,1) = 1/2.
    printed:  (l+n)!/(4 (l-1)! (n+1)!), so c(n,1) = 1/4.
    """
    _check_convention(convention)
    if n < 2:
        raise ValueError("c(n,l) is defined for n >= 2")
    if l < 1:
        raise ValueError("c(n,l) is defined for l >= 1")
    den = 2 if convention == "verified" else 4
    return Fraction(math.factorial(l + n), den * math.factorial(l - 1) * math.factorial(n + 1))


def _perp_coefficient(n: int, l: int, convention: str) -> Fraction:
    if l == 0:
        return Fraction(0)
    den = 2 if convention == "verified" else 4
    return Fraction(math.factorial(l + n), den * math.factorial(l - 1) * math.factorial(n + 1))


def trace_rQ(A: UnAlgebraElement, n: int, l: int) -> complex:
    """tr_l r_Q(A) = i q_l rank_l s_A / n."""
    return 1j * float(q_level(n, l)) * rank(n, l) / n * A.u1_part


def trace_perp_form(A: UnAlgebraElement, B: UnAlgebraElement) -> float:
    """tr((1-Pi)A(1-Pi)B) = sum A_jk B_kj + (2/n) s_A s_B."""
    n = A.n
    return float(np.sum(A.A * B.A.T) + 2.0 / n * A.u1_part * B.u1_part)


def trace_pair(A: UnAlgebraElement, B: UnAlgebraElement, n: int, l: int,
               mode: str = "full", convention: str = "verified") -> complex:
    """Closed-form tr_l of r_Q(A) r_Q(B) split into u(1) and su(n) parts.

    mode "pipi": both factors projected onto u(1); "perp": both projected
    onto su(n); "full": the sum, which is the unprojected trace.
    """
    _check_convention(convention)
    if mode not in ("pipi", "perp", "full"):
        raise ValueError("mode must be 'pipi', 'perp' or 'full'")
    pipi = -float(q_level(n, l)) ** 2 * rank(n, l) / n**2 * A.u1_part * B.u1_part
    perp = float(_perp_coefficient(n, l, convention)) * trace_perp_form(A, B)
    return {"pipi": pipi, "perp": perp, "full": pipi + perp}[mode]


@dataclass(frozen=True)
class RepTraceReport:
    lhs: complex
    rhs: complex

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def _basis_for_level(n: int, l: int, basis: FockBasis | None) -> FockBasis:
    if basis is None:
        return FockBasis(n, l + 2)
    if basis.L < l + 2:
        raise ValueError("fiber cutoff must satisfy L >= l + 2")
    return basis


def brute_trace(A: UnAlgebraElement, l: int, basis: FockBasis | None = None) -> complex:
    """Matrix trace of r_Q(A) over the level-l block."""
    basis = _basis_for_level(A.n, l, basis)
    return complex(np.trace(r_Q(A, basis).block(l)))


def brute_trace_pair(A: UnAlgebraElement, B: UnAlgebraElement, l: int, mode: str = "full",
                     basis: FockBasis | None = None) -> complex:
    """Matrix trace over level l of the (projected) product r_Q(A) r_Q(B)."""
    basis = _basis_for_level(A.n, l, basis)
    if mode == "pipi":
        A, B = u1_projection(A), u1_projection(B)
    elif mode == "perp":
        A, B = A - u1_projection(A), B - u1_projection(B)
    elif mode != "full":
        raise ValueError("mode must be 'pipi', 'perp' or 'full'")
    s = basis.level_slice(l)
    RA, RB = r_Q(A, basis), r_Q(B, basis)
    # r_Q preserves levels, so the product block is the product of blocks
    return complex(np.trace(RA.matrix[s, s] @ RB.matrix[s, s]))


def trace_report(A: UnAlgebraElement, B: UnAlgebraElement | None, n: int, l: int,
                 mode: str = "full", convention: str = "verified") -> RepTraceReport:
    """Closed form against brute force; B=None checks the single trace."""
    if B is None:
        return RepTraceReport(trace_rQ(A, n, l), brute_trace(A, l))
    return RepTraceReport(trace_pair(A, B, n, l, mode, convention), brute_trace_pair(A, B, l, mode))


def weyl_dimension(weights) -> int:
    """Dimension of the su(n) irrep with partition weights (lambda_1 >= ... >= lambda_n)."""
    lam = list(weights)
    num = Fraction(1)
    for i in range(len(lam)):
        for j in range(i + 1, len(lam)):
            num *= Fraction(lam[i] - lam[j] + j - i, j - i)
    return int(num)


@dataclass(frozen=True)
class HighestWeightReport:
    n: int
    l: int
    weights: tuple
    expected: tuple
    residual: float
    rank: int
    dim_rep: int

    @property
    def ok(self) -> bool:
        return self.residual <= 1e-12 and self.rank == self.dim_rep


def highest_weight_check(n: int, l: int, basis: FockBasis | None = None) -> HighestWeightReport:
    """Weights of K_i - K_{i+1} on h_l(x_1) h_0(x_2)...h_0(x_n) against -i (l, 0, ..., 0)."""
    if basis is None:
        basis = FockBasis(n, l + 2)
    if basis.L < l + 2:
        raise ValueError("fiber cutoff must satisfy L >= l + 2")
    v = basis.vector((l,) + (0,) * (n - 1))
    weights, expected, res = [], [], 0.0
    for i in range(1, n):
        H = r_Q(defining_cartan(n, i) - defining_cartan(n, i + 1), basis)
        w = H.apply(v)
        lam = w[basis.index((l,) + (0,) * (n - 1))]
        weights.append(complex(lam))
        expected.append(-1j * (l if i == 1 else 0))
        res = max(res, float(np.linalg.norm(w - lam * v)), abs(lam - expected[-1]))
    return HighestWeightReport(n, l, tuple(weights), tuple(expected), res, rank(n, l),
                               weyl_dimension((l,) + (0,) * (n - 1)))

"""Verification suites over the fiber algebra and the u(n) representation.

Every check returns a ``Check`` with the largest residual found, so the CLI
and the acceptance tests share one implementation.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .fock import (FockBasis, FrameVector, clifford_mult, hamiltonian_HJ, identity, ladder,
                   level_projector, omega, rank)
from .unrep import (UnAlgebraElement, brute_trace_pair, casimir_operator, casimir_value, defining_cartan,
                    highest_weight_check, proportionality_c, r_Q, trace_report, u1_projection)


@dataclass(frozen=True)
class Check:
    name: str
    n: int
    residual: float
    tol: float
    l: int | None = None
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.tol)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d


def _guarded_residual(M: np.ndarray, basis: FockBasis, guard: int) -> float:
    cols = basis.guarded_mask(guard)
    return float(np.abs(M[:, cols]).max(initial=0.0))


def _unit_frame_vector(n: int, rng: np.random.Generator) -> FrameVector:
    v = rng.uniform(-1.0, 1.0, 2 * n)
    return FrameVector.from_components(v / np.linalg.norm(v))


def clifford_check(n: int, L: int, draws: int, rng: np.random.Generator, tol: float) -> Check:
    """[V., W.] + i omega(V, W) = 0 on levels <= L-2."""
    basis = FockBasis(n, L)
    res = 0.0
    for _ in range(draws):
        V, W = _unit_frame_vector(n, rng), _unit_frame_vector(n, rng)
        C = clifford_mult(basis, V).commutator(clifford_mult(basis, W)) + 1j * omega(V, W) * identity(basis)
        res = max(res, _guarded_residual(C.matrix, basis, L - 2))
    return Check("clifford", n, res, tol)


def hj_spectrum_check(n: int, L: int, tol: float) -> Check:
    """H^J = -(l + n/2) on each guarded level block, with rank_l multiplicity."""
    basis = FockBasis(n, L)
    H = hamiltonian_HJ(basis)
    res = 0.0
    for l in range(H.guard_level + 1):
        s = basis.level_slice(l)
        col = H.matrix[:, s].copy()
        col[s] -= -(l + n / 2) * np.eye(s.stop - s.start)
        res = max(res, float(np.abs(col).max()))
        res = max(res, float(abs((s.stop - s.start) - rank(n, l))))
    return Check("hj_spectrum", n, res, tol)


def rank_check(n: int, L: int) -> Check:
    basis = FockBasis(n, L)
    res = max(abs(int(np.sum(basis.levels == l)) - rank(n, l)) for l in range(L + 1))
    return Check("rank", n, float(res), 0.0)


def parseval_check(n: int, L: int, tol: float) -> Check:
    basis = FockBasis(n, L)
    P = sum(level_projector(basis, l).matrix for l in range(L + 1))
    return Check("parseval", n, float(np.abs(P - np.eye(basis.dim)).max()), tol)


def ladder_check(n: int, L: int, tol: float) -> Check:
    """L+ phi0 = 0, (L-)^dagger = -L+ on guarded levels, <phi0,(L-L+ + 2) phi0> = 2|phi0|^2."""
    basis = FockBasis(n, L)
    phi0 = basis.vector((0,) * n)
    res = 0.0
    for j in range(1, n + 1):
        Lp, Lm = ladder(basis, j, 1), ladder(basis, j, -1)
        res = max(res, float(np.abs(Lp.apply(phi0)).max()))
        res = max(res, _guarded_residual(Lm.adjoint().matrix + Lp.matrix, basis, L - 1))
        q = phi0.conj() @ ((Lm @ Lp).matrix @ phi0 + 2 * phi0)
        res = max(res, abs(q - 2.0))
    return Check("ladder", n, res, tol)


def homomorphism_check(n: int, L: int, draws: int, rng: np.random.Generator, tol: float) -> Check:
    """[r_Q(A), r_Q(B)] = r_Q([A, B]) on guarded levels."""
    basis = FockBasis(n, L)
    res = 0.0
    for _ in range(draws):
        A, B = UnAlgebraElement.random(n, rng), UnAlgebraElement.random(n, rng)
        C = r_Q(A, basis).commutator(r_Q(B, basis)) - r_Q(A.bracket(B), basis)
        res = max(res, _guarded_residual(C.matrix, basis, C.guard_level))
    return Check("homomorphism", n, res, tol)


def u1_charge_check(n: int, L: int, tol: float) -> Check:
    """sum_j r_Q(K_j) = i H^J on guarded levels."""
    basis = FockBasis(n, L)
    S = r_Q(defining_cartan(n, 1), basis)
    for j in range(2, n + 1):
        S = S + r_Q(defining_cartan(n, j), basis)
    D = S - 1j * hamiltonian_HJ(basis)
    return Check("u1_charge", n, _guarded_residual(D.matrix, basis, D.guard_level), tol)


def casimir_check(n: int, l: int, tol: float) -> Check:
    """-sum_a r_Q(T_a)^2 = C_2(n, l) on the level-l block."""
    basis = FockBasis(n, l + 2)
    blk = -casimir_operator(basis).block(l)
    res = float(np.abs(blk - float(casimir_value(n, l)) * np.eye(blk.shape[0])).max())
    return Check("casimir", n, res, tol, l)


def highest_weight_suite(n: int, l: int, tol: float) -> Check:
    rep = highest_weight_check(n, l)
    res = rep.residual + abs(rep.rank - rep.dim_rep)
    return Check("highest_weight", n, res, tol, l)


def trace_checks(n: int, l: int, draws: int, rng: np.random.Generator, tol: float,
                 convention: str = "verified") -> list:
    """Closed-form fiber traces against brute force: single, u(1) pair, su(n) pair, full pair."""
    out = {"trace_single": 0.0, "trace_pipi": 0.0, "trace_perp": 0.0, "trace_full": 0.0}
    for _ in range(draws):
        A, B = UnAlgebraElement.random(n, rng), UnAlgebraElement.random(n, rng)
        out["trace_single"] = max(out["trace_single"], trace_report(A, None, n, l).residual)
        for mode in ("pipi", "perp", "full"):
            r = trace_report(A, B, n, l, mode, convention).residual
            out[f"trace_{mode}"] = max(out[f"trace_{mode}"], r)
    return [Check(k, n, v, tol, l, convention) for k, v in out.items()]


def proportionality_check(n: int, l: int, draws: int, rng: np.random.Generator, tol: float,
                          convention: str = "verified") -> Check:
    """tr_l(r_Q(A) r_Q(B)) = c(n, l) tr(AB) for A, B in su(n)."""
    c = float(proportionality_c(n, l, convention))
    res = 0.0
    for _ in range(draws):
        A, B = UnAlgebraElement.random(n, rng), UnAlgebraElement.random(n, rng)
        A, B = A - u1_projection(A), B - u1_projection(B)
        lhs = brute_trace_pair(A, B, l, "full")
        res = max(res, abs(lhs - c * np.trace(A.A @ B.A)))
    return Check("c_proportionality", n, res, tol, l, convention)


def algebra_suite(n_values=(1, 2, 3), l_max: int = 3, L: int = 8, draws: int = 100, seed: int = 0,
                  tol: float = 1e-10, trace_draws: int = 5) -> list:
    """Run all fiber-algebra and representation checks; returns a list of Check."""
    if L < l_max + 2:
        raise ValueError(f"cutoff L={L} must be at least l_max + 2 = {l_max + 2}")
    checks = []
    for n in n_values:
        rng = np.random.default_rng([seed, n])
        checks += [clifford_check(n, L, draws, rng, tol), hj_spectrum_check(n, L, tol), rank_check(n, L),
                   parseval_check(n, L, tol), ladder_check(n, L, tol),
                   homomorphism_check(n, L, draws, rng, tol), u1_charge_check(n, L, tol)]
        for l in range(l_max + 1):
            checks += trace_checks(n, l, trace_draws, rng, tol)
            if n >= 2:
                checks.append(casimir_check(n, l, tol))
                checks.append(highest_weight_suite(n, l, tol))
                if l >= 1:
                    checks.append(proportionality_check(n, l, trace_draws, rng, tol))
    return checks

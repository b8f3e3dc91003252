"""Spectrum of P_l on CP^1 (the round sphere of radius 1/2) and its heat trace.

Eigenvalues are 4(l+j+1)^2 - 3(2l+1)^2 - 1 with degeneracy 2(l+j+1), so

    K(t) = e^(t (3(2l+1)^2 + 1)) sum_{k >= l+1} 2k e^(-4 t k^2).

The small-t expansion is produced exactly by Euler-Maclaurin summation in
the GaussianSeries ring and confirmed numerically by a least-squares fit of
certified sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .series import BERNOULLI, Poly, heat_summand


def eigenvalue(l: int, j: int) -> int:
    if l < 0 or j < 0:
        raise ValueError("l and j must be non-negative")
    return 4 * (l + j + 1) ** 2 - 3 * (2 * l + 1) ** 2 - 1


def degeneracy(l: int, j: int) -> int:
    if l < 0 or j < 0:
        raise ValueError("l and j must be non-negative")
    return 2 * (l + j + 1)


@dataclass(frozen=True)
class Cp1Spectrum:
    l: int

    def eigenvalue(self, j: int) -> int:
        return eigenvalue(self.l, j)

    def degeneracy(self, j: int) -> int:
        return degeneracy(self.l, j)

    def levels(self, count: int) -> list:
        return [(self.eigenvalue(j), self.degeneracy(j)) for j in range(count)]


@dataclass(frozen=True)
class HeatTraceValue:
    value: float
    tail_bound: float
    cutoff: int


def _tail_bound(K: int, t: float, log_pref: float) -> float:
    """Bound on pref * sum_{k > K} 2k e^(-4tk^2), valid for K past the summand's maximum."""
    g = math.exp(log_pref - 4 * t * K * K)
    return g / (4 * t) + 2 * K * g


def heat_trace(l: int, t: float, tol: float = 1e-13) -> HeatTraceValue:
    """Certified partial sum of K(t); the neglected tail is below ``tol``."""
    if not t > 0:
        raise ValueError("t must be positive")
    if not tol > 0:
        raise ValueError("tol must be positive")
    m = l + 1
    log_pref = t * (3 * (2 * l + 1) ** 2 + 1)
    # 2x e^(-4tx^2) decreases for x >= 1/sqrt(8t)
    K = max(m, math.ceil(1 / math.sqrt(8 * t)))
    K = max(K, math.ceil(math.sqrt(max(log_pref + math.log(1 / (4 * t * tol)), 0.0) / (4 * t))))
    while _tail_bound(K, t, log_pref) >= tol:
        K += 1
    k = np.arange(m, K + 1, dtype=float)
    value = math.fsum(2 * k * np.exp(log_pref - 4 * t * k * k))
    return HeatTraceValue(value, _tail_bound(K, t, log_pref), K)


@dataclass(frozen=True)
class AsymptoticExpansion:
    """coeffs[p] multiplies t^p; values are Poly in m (symbolic) or Fraction."""

    coeffs: dict
    order: int

    def __getitem__(self, p):
        return self.coeffs[p]

    def at(self, m: int) -> dict:
        return {p: (c(Fraction(m)) if isinstance(c, Poly) else c) for p, c in self.coeffs.items()}

    def as_tuple(self) -> tuple:
        return tuple(self.coeffs[p] for p in range(-1, self.order + 1))

    def evaluate(self, t: float, m: int | None = None) -> float:
        c = self.at(m) if m is not None else self.coeffs
        return sum(float(v) * t**p for p, v in c.items())


def _max_order() -> int:
    return max(BERNOULLI) // 2 - 1


def euler_maclaurin(m: int | None = None, order: int = 1) -> AsymptoticExpansion:
    """Expansion of e^(4 m^2 t) sum_{k >= m} 2k e^(-4 t k^2) in powers of t.

    Integral term e^(-4m^2 t)/(4t), boundary term f(m)/2, and
    -sum_i B_2i/(2i)! f^(2i-1)(m); term i starts at t^(i-1), so i <= order+1.
    m=None keeps m symbolic.
    """
    if order < 0 or order > _max_order():
        raise ValueError(f"order must lie in 0..{_max_order()} (Bernoulli table ends at B_12)")
    f = heat_summand(order)
    x = None if m is None else m
    zero = Poly() if m is None else Fraction(0)
    coeffs = {p: zero for p in range(-1, order + 1)}
    coeffs[-1] = coeffs[-1] + Fraction(1, 4)
    coeffs[0] = coeffs[0] + (Poly.var() if m is None else Fraction(m))
    d = f
    for i in range(1, order + 2):
        d = d.derivative() if i == 1 else d.derivative().derivative()
        w = -BERNOULLI[2 * i] / math.factorial(2 * i)
        for p, c in d.at(x).items():
            if p <= order:
                coeffs[p] = coeffs[p] + c * w
    return AsymptoticExpansion(coeffs, order)


def cp1_asymptotics(l: int | None = None, order: int = 1) -> AsymptoticExpansion:
    """Heat-trace expansion on CP^1: Euler-Maclaurin times e^(t(8m^2-12m+4)), m = l+1.

    l=None returns polynomials in m.
    """
    em = euler_maclaurin(None, order)
    m = Poly.var()
    a = 8 * m * m - 12 * m + 4
    powers = [Poly.const(1)]
    for k in range(1, order + 2):
        powers.append(powers[-1] * a * Fraction(1, k))
    coeffs = {}
    for p in range(-1, order + 1):
        acc = Poly()
        for q in range(-1, p + 1):
            acc = acc + em[q] * powers[p - q]
        coeffs[p] = acc
    out = AsymptoticExpansion(coeffs, order)
    if l is None:
        return out
    return AsymptoticExpansion(out.at(l + 1), order)


def default_t_grid(l: int, points: int = 12) -> np.ndarray:
    """Geometric grid ending at 0.002/m^3.5, spanning a factor 20.

    The window shrinks with m so that the discarded t^3 term stays below the
    double-precision floor of the fitted c_1.
    """
    t_max = 0.002 / (l + 1) ** 3.5
    return np.geomspace(t_max / 20, t_max, points)


@dataclass(frozen=True)
class FitResult:
    coeffs: tuple
    t_grid: np.ndarray
    values: np.ndarray
    condition: float


def fit_asymptotics(l: int, t_grid=None, tol: float = 1e-13, max_condition: float = 1e12) -> FitResult:
    """Least-squares fit of K(t) against {1/t, 1, t, t^2}; returns (c_-1, c_0, c_1)."""
    ts = default_t_grid(l) if t_grid is None else np.asarray(t_grid, dtype=float)
    if ts.ndim != 1 or ts.size < 6:
        raise ValueError("t grid needs at least 6 points")
    if np.any(ts <= 0) or np.any(ts > 0.1):
        raise ValueError("t grid must lie in (0, 0.1]")
    if tol > 1e-13:
        raise ValueError("heat trace tolerance must be <= 1e-13")
    y = np.array([heat_trace(l, t, tol).value for t in ts])
    A = np.stack([1 / ts, np.ones_like(ts), ts, ts**2], axis=1)
    scale = np.abs(A).max(axis=0)
    As = A / scale
    cond = float(np.linalg.cond(As))
    if not np.isfinite(cond) or cond > max_condition:
        raise ValueError(f"ill-conditioned t grid (condition number {cond:.3g})")
    co, *_ = np.linalg.lstsq(As, y, rcond=None)
    co = co / scale
    return FitResult(tuple(float(c) for c in co[:3]), ts, y, cond)


def remainder_exponent(l: int, order: int = 1, t_values=(1e-3, 2e-3, 4e-3, 8e-3)) -> float:
    """Empirical exponent of |K(t) - truncated expansion| in t (slope of a log-log fit)."""
    exp = cp1_asymptotics(l, order)
    ts = np.asarray(t_values, dtype=float)
    r = np.array([abs(heat_trace(l, t).value - exp.evaluate(t)) for t in ts])
    if np.any(r <= 0):
        raise ValueError("remainder vanished to rounding; choose larger t values")
    return float(np.polyfit(np.log(ts), np.log(r), 1)[0])

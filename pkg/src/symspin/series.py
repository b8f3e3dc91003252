"""Exact-rational polynomials and Gaussian series p(x, t) e^(-4 t x^2).

The Euler-Maclaurin engine differentiates f(x) = 2x e^(-4 t x^2) symbolically.
Elements of the ring are finite sums c * t^k * x^j * e^(-4 t x^2) with rational
c; t is a formal variable truncated at a fixed order.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

# B_2 .. B_12
BERNOULLI = {2: Fraction(1, 6), 4: Fraction(-1, 30), 6: Fraction(1, 42), 8: Fraction(-1, 30),
             10: Fraction(5, 66), 12: Fraction(-691, 2730)}


def _trim(c: tuple) -> tuple:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Poly:
    """Polynomial in one variable with Fraction coefficients (ascending powers)."""

    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(tuple(Fraction(c) for c in self.coeffs)))

    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def var(cls) -> "Poly":
        return cls((0, 1))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def _coerce(self, other) -> "Poly":
        return other if isinstance(other, Poly) else Poly.const(other)

    def __add__(self, other) -> "Poly":
        o = self._coerce(other).coeffs
        a = self.coeffs
        k = max(len(a), len(o))
        return Poly(tuple((a[i] if i < len(a) else 0) + (o[i] if i < len(o) else 0) for i in range(k)))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        o = self._coerce(other).coeffs
        out = [Fraction(0)] * max(len(self.coeffs) + len(o) - 1, 0)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(o):
                out[i + j] += a * b
        return Poly(tuple(out))

    __rmul__ = __mul__

    def __call__(self, x):
        acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other) -> bool:
        return self.coeffs == self._coerce(other).coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            mono = "" if k == 0 else ("m" if k == 1 else f"m^{k}")
            cs = str(abs(c)) if (abs(c) != 1 or k == 0) else ""
            term = f"{cs}{'*' if cs and mono else ''}{mono}"
            parts.append(("-" if c < 0 else "+") + term)
        s = "".join(parts)
        return s[1:] if s.startswith("+") else s


@dataclass(frozen=True)
class GaussianSeries:
    """sum_{k,j} c[k,j] t^k x^j e^(-4 t x^2), truncated at t^order."""

    terms: tuple
    order: int

    @classmethod
    def from_dict(cls, d: dict, order: int) -> "GaussianSeries":
        kept = tuple(sorted((kj, Fraction(c)) for kj, c in d.items() if c != 0 and kj[0] <= order))
        return cls(kept, order)

    @property
    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "GaussianSeries") -> "GaussianSeries":
        d = self.as_dict
        for kj, c in other.terms:
            d[kj] = d.get(kj, 0) + c
        return GaussianSeries.from_dict(d, min(self.order, other.order))

    def scale(self, s) -> "GaussianSeries":
        return GaussianSeries.from_dict({kj: s * c for kj, c in self.terms}, self.order)

    def __mul__(self, other: "GaussianSeries") -> "GaussianSeries":
        """Product of the polynomial parts; the Gaussian factor is shared, not squared."""
        d = {}
        for (k1, j1), c1 in self.terms:
            for (k2, j2), c2 in other.terms:
                kj = (k1 + k2, j1 + j2)
                d[kj] = d.get(kj, 0) + c1 * c2
        return GaussianSeries.from_dict(d, min(self.order, other.order))

    def derivative(self) -> "GaussianSeries":
        """d/dx [p e^(-4 t x^2)] = (p' - 8 t x p) e^(-4 t x^2)."""
        d = {}
        for (k, j), c in self.terms:
            if j > 0:
                d[(k, j - 1)] = d.get((k, j - 1), 0) + j * c
            d[(k + 1, j + 1)] = d.get((k + 1, j + 1), 0) - 8 * c
        return GaussianSeries.from_dict(d, self.order)

    def at(self, x=None) -> dict:
        """Coefficients of t^k (Gaussian factor stripped) at x; x=None keeps x symbolic as Poly."""
        out = {}
        for (k, j), c in self.terms:
            if x is None:
                val = Poly((0,) * j + (c,))
                out[k] = out.get(k, Poly()) + val
            else:
                out[k] = out.get(k, Fraction(0)) + c * Fraction(x) ** j
        return out


def heat_summand(order: int) -> GaussianSeries:
    """f(x) = 2x e^(-4 t x^2)."""
    return GaussianSeries.from_dict({(0, 1): 2}, order)

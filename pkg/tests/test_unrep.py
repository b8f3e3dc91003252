from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symspin.fock import FockBasis, hamiltonian_HJ
from symspin.suites import casimir_check, homomorphism_check, proportionality_check, trace_checks
from symspin.unrep import (UnAlgebraElement, brute_trace, casimir_value, defining_cartan, highest_weight_check,
                           proportionality_c, q_level, r_Q, su_basis, trace_report, u1_projection, weyl_dimension)


def test_element_validation():
    with pytest.raises(ValueError):
        UnAlgebraElement(np.eye(2))
    with pytest.raises(ValueError):
        UnAlgebraElement(np.array([[0.0, 1.0, 0, 0], [-1.0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]))
    A = UnAlgebraElement.random(2, np.random.default_rng(0))
    assert np.allclose(UnAlgebraElement.project(A.A).A, A.A)


def test_from_complex_round_trip():
    X = np.array([[1j, 2 + 1j], [-2 + 1j, -0.5j]])
    A = UnAlgebraElement.from_complex(X)
    assert A.u1_part == pytest.approx(-np.trace(X).imag)


def test_su_basis_orthonormal():
    for n in (2, 3):
        T = su_basis(n)
        assert len(T) == n * n - 1
        G = np.array([[-0.5 * np.trace(a.A @ b.A) for b in T] for a in T])
        assert np.allclose(G, np.eye(len(T)))
        assert all(abs(t.u1_part) < 1e-15 for t in T)


def test_q_level_and_casimir_values():
    assert q_level(1, 0) == Fraction(-1, 2)
    assert q_level(3, 2) == Fraction(-7, 2)
    # l(n+l)(n-1)/n
    assert casimir_value(2, 1) == Fraction(3, 2)
    assert casimir_value(3, 2) == Fraction(20, 3)
    with pytest.raises(ValueError):
        casimir_value(1, 1)


def test_proportionality_constants():
    assert proportionality_c(2, 1) == Fraction(1, 2)
    assert proportionality_c(3, 1, "printed") == Fraction(1, 4)
    assert proportionality_c(3, 2) == Fraction(5, 2)
    with pytest.raises(ValueError):
        proportionality_c(2, 0)
    with pytest.raises(ValueError):
        proportionality_c(2, 1, "other")


@pytest.mark.parametrize("n", [1, 2, 3])
def test_homomorphism(n):
    assert homomorphism_check(n, 6, 100, np.random.default_rng([7, n]), 1e-10).passed


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_homomorphism_property(n, seed):
    rng = np.random.default_rng(seed)
    b = FockBasis(n, 5)
    A, B = UnAlgebraElement.random(n, rng), UnAlgebraElement.random(n, rng)
    C = r_Q(A, b).commutator(r_Q(B, b)) - r_Q(A.bracket(B), b)
    assert np.abs(C.guarded()).max() < 1e-10


def test_u1_charge():
    for n in (1, 2, 3):
        b = FockBasis(n, 5)
        S = r_Q(defining_cartan(n, 1), b)
        for j in range(2, n + 1):
            S = S + r_Q(defining_cartan(n, j), b)
        D = S - 1j * hamiltonian_HJ(b)
        assert np.abs(D.guarded()).max() < 1e-12


@pytest.mark.parametrize("n,l", [(n, l) for n in (2, 3) for l in range(4)])
def test_casimir_block(n, l):
    assert casimir_check(n, l, 1e-10).passed


@pytest.mark.parametrize("n,l", [(n, l) for n in (1, 2, 3) for l in range(4)])
def test_trace_identities(n, l):
    for c in trace_checks(n, l, 3, np.random.default_rng([n, l]), 1e-10):
        assert c.passed, c


@pytest.mark.parametrize("n,l", [(n, l) for n in (2, 3) for l in (1, 2, 3)])
def test_proportionality_against_brute_force(n, l):
    assert proportionality_check(n, l, 3, np.random.default_rng(l), 1e-10).passed


def test_printed_perp_constant_is_half_the_fiber_trace():
    rng = np.random.default_rng(3)
    A, B = UnAlgebraElement.random(2, rng), UnAlgebraElement.random(2, rng)
    A, B = A - u1_projection(A), B - u1_projection(B)
    v = trace_report(A, B, 2, 1, "perp", "verified")
    p = trace_report(A, B, 2, 1, "perp", "printed")
    assert v.residual < 1e-12
    assert p.lhs == pytest.approx(0.5 * v.rhs)


def test_single_trace_example():
    # tr_0 r_Q(K_1) for n = 1 equals i q_0 = -i/2
    assert brute_trace(defining_cartan(1, 1), 0) == pytest.approx(-0.5j)


@pytest.mark.parametrize("n,l", [(2, 0), (2, 3), (3, 1), (3, 2)])
def test_highest_weight(n, l):
    rep = highest_weight_check(n, l)
    assert rep.ok
    assert rep.dim_rep == weyl_dimension((l,) + (0,) * (n - 1))


def test_mismatched_dimensions():
    with pytest.raises(ValueError):
        r_Q(defining_cartan(2, 1), FockBasis(1, 3))
    with pytest.raises(ValueError):
        brute_trace(defining_cartan(1, 1), 3, FockBasis(1, 3))

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symspin.geometry import flat_torus, invariant_integrals, model_from_name, round_sphere, twisted_flat
from symspin.heat import (CP1_INTEGRALS_OVER_PI, HeatCoefficients, HeatData, a2_integrand_coefficients, a_generic,
                          a_kahler2d, a_kahler2d_exact, alpha, assemble_canonical, assemble_canonical_full,
                          gilkey, heat_record)
from symspin.unrep import UnAlgebraElement, q_level

CP1 = round_sphere(0.5, 8)


def test_cp1_exact_closed_forms():
    assert a_kahler2d_exact(0, *CP1_INTEGRALS_OVER_PI) == (Fraction(1, 4), Fraction(5, 6), Fraction(19, 15))
    assert a_kahler2d_exact(1, *CP1_INTEGRALS_OVER_PI) == (Fraction(1, 4), Fraction(29, 6), Fraction(679, 15))
    assert a_kahler2d_exact(2, *CP1_INTEGRALS_OVER_PI)[1] == Fraction(77, 6)
    assert a_kahler2d_exact(2, *CP1_INTEGRALS_OVER_PI)[2] == Fraction(4879, 15)


def test_level0_canonical_data_on_cp1():
    data = assemble_canonical(CP1, 0)
    assert np.allclose(data.E_bar[:, 0, 0], 2.0, atol=1e-12)


@pytest.mark.parametrize("l", range(4))
def test_dual_path_cp1(l):
    g = gilkey(assemble_canonical(CP1, l))
    ref = a_kahler2d(l, invariant_integrals(CP1))
    assert abs(g.a0 - ref[0]) <= 1e-12
    assert abs(g.a2 - ref[1]) <= 1e-12 * max(1, abs(ref[1]))
    assert abs(g.a4 - ref[2]) <= 1e-12 * max(1, abs(ref[2]))
    assert g.imag <= 1e-12


def test_canonical_2d_structure():
    asm = assemble_canonical_full(CP1, 1)
    q = float(q_level(1, 1))
    assert np.allclose(asm.V, 0)
    assert asm.leakage() < 1e-12
    assert np.allclose(asm.data.E_bar[:, 0, 0], 8 * q * q)
    # Omega(e, f) = (i/2) q rho omega(e, f)
    assert np.allclose(asm.data.Omega[:, 0, 1, 0, 0], 0.5j * q * 8)


@pytest.mark.parametrize("l", range(6))
def test_generic_reduces_to_2d(l):
    for model in (CP1, round_sphere(1.3, 6), flat_torus()):
        ints = invariant_integrals(model)
        a0, a2 = a_generic(1, l, ints)
        r = a_kahler2d(l, ints)
        assert abs(a0 - r[0]) <= 1e-12 * max(1, r[0])
        assert abs(a2 - r[1]) <= 1e-12 * max(1, abs(r[1]))


def test_flat_torus_vanishing():
    t = flat_torus((1.0, 2.0))
    for l in (0, 5):
        asm = assemble_canonical_full(t, l)
        assert np.abs(asm.V).max() == 0 and np.abs(asm.E_full).max() == 0
        g = gilkey(asm.data)
        assert (g.a0, g.a2, g.a4) == pytest.approx((2 / (4 * math.pi), 0.0, 0.0))


def test_gilkey_worked_example():
    # rank 1, E = rho q^2 with q^2 = 1/4 on CP1
    w = CP1.weights
    P = len(w)
    rho = np.full(P, 8.0)
    om = np.zeros((P, 2, 2, 1, 1), complex)
    om[:, 0, 1] = 2j
    om[:, 1, 0] = -2j
    data = HeatData(1, 0, w, np.full((P, 1, 1), 2.0), rho, rho**2 / 2, rho**2, om)
    g = gilkey(data)
    assert g.a2 == pytest.approx(5 / 6, rel=1e-13)
    assert g.a4 == pytest.approx(19 / 15, rel=1e-13)
    with pytest.raises(ValueError):
        gilkey(HeatData(1, 0, w, data.E_bar, rho, rho, rho), order=4)


def test_heat_data_validation():
    w = np.ones(2)
    with pytest.raises(ValueError):
        HeatData(2, 1, w, np.zeros((2, 1, 1)), w, w, w)
    bad = np.ones((2, 2, 2, 1, 1))
    with pytest.raises(ValueError):
        HeatData(1, 0, w, np.zeros((2, 1, 1)), w, w, w, bad)
    with pytest.raises(ValueError):
        HeatCoefficients(0.0, 1.0)
    with pytest.raises(ValueError):
        assemble_canonical_full(CP1, 1, L=3)
    with pytest.raises(ValueError):
        a2_integrand_coefficients(1, 1, "other")


def test_a_kahler_rejects_torsion():
    m = model_from_name("twisted_flat")
    with pytest.raises(ValueError):
        a_kahler2d(1, invariant_integrals(m))


def test_alpha():
    assert alpha(1, 1) == Fraction(1)
    assert alpha(2, 3) == Fraction(5, 2)


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 2), st.integers(0, 2), st.integers(0, 2**31 - 1))
def test_twisted_dual_path_property(n, l, seed):
    rng = np.random.default_rng(seed)
    m = twisted_flat([UnAlgebraElement.random(n, rng) for _ in range(2 * n)])
    g = gilkey(assemble_canonical(m, l), order=2)
    _, a2 = a_generic(n, l, invariant_integrals(m))
    assert abs(g.a2 - a2) <= 1e-8 * max(1.0, abs(a2))
    assert g.imag <= 1e-10


def test_printed_torsion_coefficients_disagree_with_assembly():
    m = model_from_name("twisted_flat")
    g = gilkey(assemble_canonical(m, 1), order=2)
    _, printed = a_generic(1, 1, invariant_integrals(m), "printed")
    assert abs(g.a2 - printed) > 1e-3


def test_heat_record_fields():
    rec = heat_record("cp1", CP1, 0)
    assert rec["generic"]["a2"] == pytest.approx(5 / 6)
    assert max(rec["discrepancy"].values()) < 1e-12
    tw = heat_record("twisted_flat", model_from_name("twisted_flat"), 1)
    assert tw["generic"]["a4"] == "not provided by closed form"
    assert "a4" not in tw["discrepancy"]

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symspin.geometry import (PRESETS, build_model, check_rrho, connection_residual, curvature, flat_torus,
                              frame_residual, invariant_integrals, load_presets, model_from_name, round_sphere,
                              rrho_sides, sampled_sphere, torsion, twisted_flat)
from symspin.unrep import UnAlgebraElement

U_TWIST = [np.array([[0.0, 0.7], [-0.7, 0.0]]), np.array([[0.0, -0.4], [0.4, 0.0]])]


def test_frames_on_builtins():
    for model in (flat_torus(), round_sphere(0.5, 8), round_sphere(2.0, 6), twisted_flat(U_TWIST)):
        assert frame_residual(model) <= 1e-12
        assert connection_residual(model) <= 1e-12


def test_weights_positive_and_sum_to_volume():
    s = round_sphere(0.5, 12)
    assert np.all(s.weights > 0)
    assert s.volume == pytest.approx(math.pi, rel=1e-14)
    assert flat_torus((2.0, 3.0)).volume == pytest.approx(6.0)


def test_flat_torus_is_trivial():
    t = flat_torus()
    assert np.abs(torsion(t, 0, 1)).max() == 0
    assert np.abs(curvature(t, 0, 1)).max() == 0
    ints = invariant_integrals(t)
    assert (ints.vol, ints.rho, ints.rho2, ints.S, ints.T2) == (1.0, 0.0, 0.0, 0.0, 0.0)


def test_twisted_flat_torsion_closed_form():
    m = twisted_flat(U_TWIST)
    T = torsion(m, 0, 1)
    # u(e_1)e_2 - u(e_2)e_1 with nabla_mu e_j = u_mu[j, m] e_m
    expected = U_TWIST[0][1] - U_TWIST[1][0]
    assert np.allclose(T, expected)
    assert np.allclose(torsion(m, 1, 0), -T)
    F = curvature(m, 0, 1)
    comm = U_TWIST[0] @ U_TWIST[1] - U_TWIST[1] @ U_TWIST[0]
    assert np.allclose(F, comm)  # commuting 2x2 u(1) values: F = 0
    ints = invariant_integrals(m)
    assert ints.T2 == pytest.approx(2 * float(expected @ expected))
    assert ints.frakT2 == pytest.approx(float(expected @ expected))


def test_sphere_curvature_and_integrals():
    s = round_sphere(0.5, 16)
    R = curvature(s, 0, 1)
    assert np.allclose(R[:, 0, 1], -4.0)
    ints = invariant_integrals(s)
    assert ints.vol == pytest.approx(math.pi, rel=1e-13)
    assert ints.rho == pytest.approx(8 * math.pi, rel=1e-13)
    assert ints.rho2 == pytest.approx(64 * math.pi, rel=1e-13)
    assert ints.S == pytest.approx(-4 * math.pi, rel=1e-13)
    assert max(abs(ints.T2), abs(ints.frakT2), abs(ints.tau2)) < 1e-20
    lhs, _ = rrho_sides(s)
    assert np.allclose(lhs, -8.0)


@pytest.mark.parametrize("r", [0.25, 0.5, 1.0, 3.0])
def test_gauss_bonnet(r):
    ints = invariant_integrals(round_sphere(r, 10))
    assert ints.rho == pytest.approx(8 * math.pi, rel=1e-12)
    assert ints.vol == pytest.approx(4 * math.pi * r * r, rel=1e-12)


def test_rrho_on_builtins():
    for model in (flat_torus(), round_sphere(0.5, 8), twisted_flat(U_TWIST)):
        assert check_rrho(model) <= 1e-8


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_rrho_twisted_property(coeffs):
    u = [UnAlgebraElement(np.array([[0.0, c], [-c, 0.0]])) for c in coeffs]
    assert check_rrho(twisted_flat(u)) <= 1e-8


def test_sampled_sphere_second_order():
    err = []
    for nt in (16, 32, 64):
        m = sampled_sphere(0.5, nt)
        lhs, rhs = rrho_sides(m)
        # both sides use the same discrete fields, so the identity holds to round-off
        assert np.abs(lhs - rhs).max() <= 1e-8
        # fixed latitude band; near-pole rows carry 1/sin(theta) amplification
        band = np.abs(m.points[:, 0] - np.pi / 2) <= np.pi / 4
        err.append(np.abs(lhs + 8.0)[band].max())
    orders = np.log2(np.array(err[:-1]) / np.array(err[1:]))
    assert np.all(orders > 1.8)


def test_tau_linearity():
    m = twisted_flat(U_TWIST)
    tau = m.tensors.tau[0]
    X, Y = np.array([0.3, -1.2]), np.array([2.0, 0.5])
    T = m.tensors.T[0]

    def tau_of(v):
        return float(sum(v[x] * T[k, x, k] for k in range(2) for x in range(2)))

    assert tau_of(1.5 * X - 2 * Y) == pytest.approx(1.5 * tau_of(X) - 2 * tau_of(Y))
    assert tau_of(np.array([1.0, 0.0])) == pytest.approx(tau[0])


def test_invalid_inputs():
    with pytest.raises(ValueError):
        flat_torus((1.0,))
    with pytest.raises(ValueError):
        round_sphere(-1.0)
    with pytest.raises(ValueError):
        twisted_flat([U_TWIST[0]])
    with pytest.raises(ValueError):
        build_model({"kind": "hyperbolic"})
    with pytest.raises(ValueError):
        model_from_name("nope")


def test_presets_and_file(tmp_path):
    assert set(PRESETS) >= {"cp1", "torus", "twisted_flat"}
    p = tmp_path / "presets.json"
    p.write_text(json.dumps({"big_sphere": {"kind": "round_sphere", "radius": 2.0, "resolution": 6}}))
    m = model_from_name("big_sphere", load_presets(p))
    assert m.volume == pytest.approx(16 * math.pi)
    p.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load_presets(p)

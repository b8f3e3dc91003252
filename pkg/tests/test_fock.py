import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symspin.fock import (FiberOperator, FockBasis, FrameVector, build_derivative, build_position,
                          clifford_generators, clifford_mult, complex_structure, hamiltonian_HJ, identity,
                          ladder, level_projector, omega, rank, symplectic_matrix)


def test_rank_values():
    assert [rank(1, l) for l in range(4)] == [1, 1, 1, 1]
    assert [rank(2, l) for l in range(4)] == [1, 2, 3, 4]
    assert [rank(3, l) for l in range(4)] == [1, 3, 6, 10]
    with pytest.raises(ValueError):
        rank(0, 1)


def test_basis_order_and_levels():
    b = FockBasis(2, 3)
    assert b.dim == sum(rank(2, l) for l in range(4))
    assert b.index_map[:6] == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    for l in range(4):
        s = b.level_slice(l)
        assert np.all(b.levels[s] == l)
    with pytest.raises(ValueError):
        b.level_slice(4)
    with pytest.raises(ValueError):
        FockBasis(0, 2)


def test_matrix_elements():
    b = FockBasis(1, 4)
    x = build_position(b, 1).matrix
    d = build_derivative(b, 1).matrix
    for a in range(4):
        assert x[a + 1, a] == pytest.approx(math.sqrt((a + 1) / 2))
        assert d[a + 1, a] == pytest.approx(-math.sqrt((a + 1) / 2))
        assert d[a, a + 1] == pytest.approx(math.sqrt((a + 1) / 2))


def test_complex_structure_columns():
    J = complex_structure(2)
    assert np.allclose(J @ J, -np.eye(4))
    # J e_1 = f_1
    assert np.allclose(J[:, 0], [0, 0, 1, 0])
    W = symplectic_matrix(2)
    assert np.allclose(W, -W.T)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.lists(st.floats(-1, 1), min_size=12, max_size=12))
def test_clifford_relation_property(n, coeffs):
    b = FockBasis(n, 6)
    v = np.array(coeffs[: 2 * n])
    w = np.array(coeffs[6: 6 + 2 * n])
    if np.linalg.norm(v) < 1e-3 or np.linalg.norm(w) < 1e-3:
        return
    V = FrameVector.from_components(v / np.linalg.norm(v))
    W = FrameVector.from_components(w / np.linalg.norm(w))
    C = clifford_mult(b, V).commutator(clifford_mult(b, W)) + 1j * omega(V, W) * identity(b)
    assert C.guard_level == b.L - 2
    assert np.abs(C.guarded()).max() <= 1e-12


def test_truncation_breaks_top_level():
    b = FockBasis(1, 3)
    e, f = clifford_generators(b)
    C = e.commutator(f) + 1j * identity(b)
    assert np.abs(C.matrix[:, b.levels == b.L]).max() > 0.5


def test_hj_spectrum():
    for n in (1, 2, 3):
        b = FockBasis(n, 6)
        H = hamiltonian_HJ(b)
        for l in range(H.guard_level + 1):
            blk = H.block(l)
            assert np.allclose(blk, -(l + n / 2) * np.eye(rank(n, l)), atol=1e-12)
        with pytest.raises(ValueError):
            H.block(b.L)


def test_ladder_identities():
    b = FockBasis(2, 5)
    phi0 = b.vector((0, 0))
    for j in (1, 2):
        Lp, Lm = ladder(b, j, 1), ladder(b, j, -1)
        assert np.abs(Lp.apply(phi0)).max() == 0
        # adjoint sign convention: (L-)^dagger = -L+
        assert np.abs((Lm.adjoint().matrix + Lp.matrix)[:, b.levels <= b.L - 1]).max() < 1e-12
        assert phi0.conj() @ ((Lm @ Lp).matrix @ phi0 + 2 * phi0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        ladder(b, 1, 0)


def test_parseval():
    b = FockBasis(3, 4)
    P = sum(level_projector(b, l).matrix for l in range(5))
    assert np.allclose(P, np.eye(b.dim))


def test_operator_bookkeeping():
    b = FockBasis(1, 5)
    x = build_position(b, 1)
    assert (x.degree, x.guard_level) == (1, 4)
    xx = x @ x
    assert (xx.degree, xx.guard_level) == (2, 3)
    with pytest.raises(ValueError):
        x @ build_position(FockBasis(1, 4), 1)
    with pytest.raises(ValueError):
        FiberOperator(b, np.zeros((2, 2)), 0)


def test_frame_vector_validation():
    with pytest.raises(ValueError):
        FrameVector([1.0, 2.0], [1.0])
    with pytest.raises(ValueError):
        FrameVector([np.nan], [0.0])
    v = FrameVector.unit(2, 3)
    assert np.allclose(v.components, [0, 0, 0, 1])
    assert omega(FrameVector.unit(1, 0), FrameVector.unit(1, 1)) == 1.0

"""Frame-level geometry of almost-hermitian manifolds.

A model is sampled at quadrature points. At each point it stores the unitary
frame e_i = E[mu, i] d_mu (i runs over e_1..e_n, f_1..f_n), the connection
one-form u_mu (a u(n) matrix with nabla_mu e_j = u_mu[j, m] e_m) and the chart
derivatives needed for torsion, curvature and the Levi-Civita connection.

Array conventions (leading axis = sample point p):
    E[p, mu, i]            dE[p, nu, mu, i] = d_nu E[mu, i]
    ddE[p, rho, nu, mu, i]
    u[p, mu, a, b]         du[p, nu, mu, a, b] = d_nu u_mu[a, b]

Built-in models carry analytic derivatives; ``sampled_grid`` models obtain
them by finite differences on their grid.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .fock import complex_structure, symplectic_matrix
from .unrep import UnAlgebraElement, defining_cartan


@dataclass(frozen=True)
class LocalFields:
    E: np.ndarray
    dE: np.ndarray
    ddE: np.ndarray
    u: np.ndarray
    du: np.ndarray

    @property
    def dim(self) -> int:
        return self.E.shape[-1]


@dataclass(frozen=True)
class UnitaryFrame:
    """Frame, metric, symplectic form and J at one point (chart components)."""

    vectors: np.ndarray
    g: np.ndarray
    omega: np.ndarray
    J: np.ndarray

    def residuals(self) -> dict:
        """Deviation from g(e_i,e_j) = delta, omega canonical, J e_j = f_j, g = omega(., J.)."""
        E = self.vectors
        N = E.shape[0]
        n = N // 2
        Jf = complex_structure(n)
        return {
            "g": float(np.abs(E.T @ self.g @ E - np.eye(N)).max()),
            "omega": float(np.abs(E.T @ self.omega @ E - symplectic_matrix(n)).max()),
            "J": float(np.abs(self.J @ E - E @ Jf).max()),
            "compat": float(np.abs(self.g - self.omega @ self.J).max()),
        }


@dataclass(frozen=True)
class GeometryModel:
    """Sampled almost-hermitian geometry with quadrature weights.

    ``grid_shape``/``periodic``/``spacing`` describe the tensor grid behind
    the flattened sample points (used by finite differences and meshes).
    """

    kind: str
    n: int
    points: np.ndarray
    weights: np.ndarray
    fields: LocalFields
    params: dict = field(default_factory=dict)
    grid_shape: tuple = ()
    periodic: tuple = ()
    spacing: tuple = ()

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if self.fields.E.shape[0] != self.points.shape[0]:
            raise ValueError("fields and points are sampled on different grids")

    @property
    def volume(self) -> float:
        return float(np.sum(self.weights))

    @property
    def is_kahler(self) -> bool:
        return self.kind in ("flat_torus", "round_sphere")

    def frame_at(self, p: int) -> UnitaryFrame:
        E = self.fields.E[p]
        Einv = np.linalg.inv(E)
        g = Einv.T @ Einv
        om = Einv.T @ symplectic_matrix(self.n) @ Einv
        J = E @ complex_structure(self.n) @ Einv
        return UnitaryFrame(E, g, om, J)

    @cached_property
    def tensors(self) -> "FrameTensors":
        return frame_tensors(self.fields, self.n)


# ---------------------------------------------------------------------------
# Built-in models


def _uniform_grid(periods, resolution):
    axes = [np.arange(resolution) * (P / resolution) for P in periods]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1), tuple(P / resolution for P in periods)


def _constant_fields(P: int, N: int, u: np.ndarray | None = None) -> LocalFields:
    E = np.broadcast_to(np.eye(N), (P, N, N)).copy()
    uu = np.zeros((P, N, N, N)) if u is None else np.broadcast_to(u, (P, N, N, N)).copy()
    return LocalFields(E, np.zeros((P, N, N, N)), np.zeros((P, N, N, N, N)), uu,
                       np.zeros((P, N, N, N, N)))


def flat_torus(periods=(1.0, 1.0), resolution: int = 4) -> GeometryModel:
    """Flat torus R^{2n} / (L_1 Z x ... x L_{2n} Z) with the coordinate frame."""
    periods = tuple(float(p) for p in periods)
    N = len(periods)
    if N % 2 or N == 0 or min(periods) <= 0:
        raise ValueError("need an even number of positive periods")
    pts, h = _uniform_grid(periods, resolution)
    w = np.full(len(pts), float(np.prod(periods)) / len(pts))
    return GeometryModel("flat_torus", N // 2, pts, w, _constant_fields(len(pts), N),
                         {"periods": list(periods)}, (resolution,) * N, (True,) * N, h)


def twisted_flat(u, periods=None, resolution: int = 2) -> GeometryModel:
    """Flat torus with a constant u(n)-valued connection; its torsion is u(e_i)e_j - u(e_j)e_i.

    ``u`` is a sequence of 2n UnAlgebraElement (or 2n x 2n arrays), one per chart direction.
    """
    mats = [x.A if isinstance(x, UnAlgebraElement) else UnAlgebraElement(np.asarray(x)).A for x in u]
    N = mats[0].shape[0]
    if len(mats) != N:
        raise ValueError("need one u(n) element per chart direction")
    periods = tuple(float(p) for p in (periods or (1.0,) * N))
    pts, h = _uniform_grid(periods, resolution)
    w = np.full(len(pts), float(np.prod(periods)) / len(pts))
    U = np.array(mats)
    return GeometryModel("twisted_flat", N // 2, pts, w, _constant_fields(len(pts), N, U),
                         {"periods": list(periods), "u": U.tolist()}, (resolution,) * N, (True,) * N, h)


def sphere_grid(n_theta: int):
    """Pole-free latitude-longitude grid: theta_i = (i + 1/2) pi / n_theta, n_phi = 2 n_theta."""
    n_phi = 2 * n_theta
    th = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    ph = np.arange(n_phi) * 2 * np.pi / n_phi
    return th, ph


def _sphere_fields(theta: np.ndarray, r: float) -> LocalFields:
    P = theta.size
    s, c = np.sin(theta), np.cos(theta)
    E = np.zeros((P, 2, 2))
    E[:, 0, 0] = 1.0 / r
    E[:, 1, 1] = 1.0 / (r * s)
    dE = np.zeros((P, 2, 2, 2))
    dE[:, 0, 1, 1] = -c / (r * s**2)
    ddE = np.zeros((P, 2, 2, 2, 2))
    ddE[:, 0, 0, 1, 1] = (s**2 + 2 * c**2) / (r * s**3)
    K = defining_cartan(1, 1).A
    u = np.zeros((P, 2, 2, 2))
    u[:, 1] = c[:, None, None] * K
    du = np.zeros((P, 2, 2, 2, 2))
    du[:, 0, 1] = -s[:, None, None] * K
    return LocalFields(E, dE, ddE, u, du)


def round_sphere(radius: float = 0.5, n_theta: int = 16) -> GeometryModel:
    """Round S^2 of radius r with its Levi-Civita (Kaehler) connection.

    Frame e = (1/r) d_theta, f = (1/(r sin theta)) d_phi; u_phi = cos(theta) K.
    Weights are exact cell areas, so constant integrands integrate exactly.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    th, ph = sphere_grid(n_theta)
    T, Ph = np.meshgrid(th, ph, indexing="ij")
    pts = np.stack([T.ravel(), Ph.ravel()], axis=-1)
    edges = np.arange(n_theta + 1) * np.pi / n_theta
    band = radius**2 * (2 * np.pi / ph.size) * (np.cos(edges[:-1]) - np.cos(edges[1:]))
    w = np.repeat(band, ph.size)
    return GeometryModel("round_sphere", 1, pts, w, _sphere_fields(pts[:, 0], radius),
                         {"radius": float(radius), "n_theta": n_theta},
                         (n_theta, ph.size), (False, True), (np.pi / n_theta, 2 * np.pi / ph.size))


# ---------------------------------------------------------------------------
# Sampled grids (finite differences)


def grid_derivative(f: np.ndarray, grid_shape, periodic, spacing) -> np.ndarray:
    """Chart gradient of a field sampled on a flattened tensor grid.

    Returns shape (P, dim, *f.shape[1:]). Periodic axes use central differences
    with wrap; bounded axes use second-order one-sided stencils at the ends.
    """
    P = f.shape[0]
    tail = f.shape[1:]
    F = f.reshape(tuple(grid_shape) + tail)
    out = []
    for ax, (per, h) in enumerate(zip(periodic, spacing)):
        if per:
            d = (np.roll(F, -1, axis=ax) - np.roll(F, 1, axis=ax)) / (2 * h)
        else:
            d = np.gradient(F, h, axis=ax, edge_order=2)
        out.append(d.reshape((P,) + tail))
    return np.stack(out, axis=1)


def sampled_grid(points, weights, E, u, grid_shape, periodic, spacing, n: int | None = None,
                 kind: str = "sampled_grid", params: dict | None = None) -> GeometryModel:
    """Model whose frame/connection are given only at grid points; derivatives by central differences."""
    E = np.asarray(E, dtype=float)
    u = np.asarray(u, dtype=float)
    N = E.shape[-1]
    dE = grid_derivative(E, grid_shape, periodic, spacing)
    ddE = grid_derivative(dE, grid_shape, periodic, spacing)
    du = grid_derivative(u, grid_shape, periodic, spacing)
    return GeometryModel(kind, n or N // 2, np.asarray(points, float), np.asarray(weights, float),
                         LocalFields(E, dE, ddE, u, du), params or {}, tuple(grid_shape),
                         tuple(periodic), tuple(spacing))


def sampled_sphere(radius: float = 0.5, n_theta: int = 16) -> GeometryModel:
    """Round sphere sampled on the offset grid with numerically differentiated fields."""
    ref = round_sphere(radius, n_theta)
    f = ref.fields
    return sampled_grid(ref.points, ref.weights, f.E, f.u, ref.grid_shape, ref.periodic, ref.spacing,
                        1, "sampled_grid", {"source": "round_sphere", "radius": radius, "n_theta": n_theta})


# ---------------------------------------------------------------------------
# Torsion, curvature and invariants


@dataclass(frozen=True)
class FrameTensors:
    """Frame components of torsion, curvature and Levi-Civita data at each point.

    U[p,i,j,m]    nabla_{e_i} e_j = U[i,j,m] e_m
    T[p,i,j,m]    T(e_i,e_j) = T[i,j,m] e_m;  eT[p,q,i,j,m] = e_q(T[i,j,m])
    Rm[p,i,j,k,m] g(R(e_i,e_j)e_k, e_m) for the connection u
    w[p,i,j,k]    nabla^LC_{e_i} e_j = w[i,j,k] e_k
    RLC           same as Rm for Levi-Civita
    """

    U: np.ndarray
    C: np.ndarray
    T: np.ndarray
    eT: np.ndarray
    Rm: np.ndarray
    w: np.ndarray
    RLC: np.ndarray

    @property
    def N(self) -> int:
        return self.T.shape[-1]

    @property
    def rho(self) -> np.ndarray:
        """Scalar curvature, 2 on the unit sphere."""
        return np.einsum("pjiij->p", self.RLC)

    @property
    def ric(self) -> np.ndarray:
        return np.einsum("plijl->pij", self.RLC)

    @property
    def tau(self) -> np.ndarray:
        """tau(e_x) = sum_k g(T(e_k, e_x), e_k)."""
        return np.einsum("pkxk->px", self.T)

    @property
    def frakT(self) -> np.ndarray:
        """sum_j T(e_j, f_j) in frame components."""
        n = self.N // 2
        return sum(self.T[:, j, j + n, :] for j in range(n))

    @property
    def e_frakT(self) -> np.ndarray:
        """eT-analogue for frakT: [p, q, m] = e_q(frakT_m)."""
        n = self.N // 2
        return sum(self.eT[:, :, j, j + n, :] for j in range(n))

    @property
    def div_tau(self) -> np.ndarray:
        """Levi-Civita divergence sum_j (nabla^LC_{e_j} tau)(e_j)."""
        e_tau = np.einsum("pjkjk->p", self.eT)
        return e_tau - np.einsum("pjjk,pk->p", self.w, self.tau)

    @property
    def S(self) -> np.ndarray:
        """sum_{i,j <= n} g(R(e_i, f_i) e_j, f_j)."""
        n = self.N // 2
        return sum(self.Rm[:, i, i + n, j, j + n] for i in range(n) for j in range(n))

    @property
    def R_sum(self) -> np.ndarray:
        """sum_{j,k} g(R(e_j,e_k)e_j,e_k)."""
        return np.einsum("pjkjk->p", self.Rm)

    @property
    def T2(self) -> np.ndarray:
        """sum_{ij} g(T(e_i,e_j), T(e_i,e_j))."""
        return np.einsum("pijm,pijm->p", self.T, self.T)

    @property
    def TTa(self) -> np.ndarray:
        """sum_{ij} g(T(T(e_i,e_j),e_i),e_j)."""
        return np.einsum("pijm,pmij->p", self.T, self.T)

    @property
    def TJT(self) -> np.ndarray:
        """sum_{ij} g(T(e_i,e_j), T(Je_i,Je_j))."""
        J = complex_structure(self.N // 2)
        return np.einsum("pijm,pabm,ai,bj->p", self.T, self.T, J, J)


def frame_tensors(f: LocalFields, n: int) -> FrameTensors:
    E, dE, ddE, u, du = f.E, f.dE, f.ddE, f.u, f.du
    Einv = np.linalg.inv(E)
    U = np.einsum("pmi,pmjk->pijk", E, u)
    dU = np.einsum("prmi,pmjk->prijk", dE, u) + np.einsum("pmi,prmjk->prijk", E, du)
    B = np.einsum("pvi,pvmj->pijm", E, dE)
    B = B - B.transpose(0, 2, 1, 3)
    dB = np.einsum("prvi,pvmj->prijm", dE, dE) + np.einsum("pvi,prvmj->prijm", E, ddE)
    dB = dB - dB.transpose(0, 1, 3, 2, 4)
    dEinv = -np.einsum("pma,prak,pkv->prmv", Einv, dE, Einv)
    C = np.einsum("pmv,pijv->pijm", Einv, B)
    dC = np.einsum("prmv,pijv->prijm", dEinv, B) + np.einsum("pmv,prijv->prijm", Einv, dB)
    T = U - U.transpose(0, 2, 1, 3) - C
    dT = dU - dU.transpose(0, 1, 3, 2, 4) - dC

    def lc(U_, T_):
        # g(nabla_i e_j, e_k) - 1/2 [T_ijk - T_ikj - T_jki]
        return U_ - 0.5 * (T_ - np.swapaxes(T_, -1, -2) - np.moveaxis(T_, -1, -3))

    w = lc(U, T)
    dw = lc(dU, dT)
    ew = np.einsum("prq,prijk->pqijk", E, dw)
    eT = np.einsum("prq,prijk->pqijk", E, dT)
    RLC = (ew - ew.transpose(0, 2, 1, 3, 4)
           + np.einsum("pjkm,pimq->pijkq", w, w) - np.einsum("pikm,pjmq->pijkq", w, w)
           - np.einsum("pijm,pmkq->pijkq", C, w))
    F = -du + du.transpose(0, 2, 1, 3, 4) + np.einsum("pmab,pvbc->pmvac", u, u) \
        - np.einsum("pvab,pmbc->pmvac", u, u)
    Rm = np.einsum("pvi,pmj,pmvkq->pijkq", E, E, F)
    return FrameTensors(U, C, T, eT, Rm, w, RLC)


def torsion(model: GeometryModel, i: int, j: int) -> np.ndarray:
    """Frame components of T(e_i, e_j) at every sample point (0-based frame indices)."""
    return model.tensors.T[:, i, j, :]


def curvature(model: GeometryModel, i: int, j: int) -> np.ndarray:
    """Matrix [k, m] = g(R(e_i,e_j)e_k, e_m) at every sample point."""
    return model.tensors.Rm[:, i, j]


@dataclass(frozen=True)
class InvariantIntegrals:
    """Quadrature integrals of the scalars entering the heat coefficients.

    S = sum g(R(e_i,f_i)e_j,f_j); T2 = |T|^2; TTa = sum g(T(T(e_i,e_j),e_i),e_j);
    TJT = sum g(T(e_i,e_j),T(Je_i,Je_j)); frakT2 = g(frakT,frakT); tau2 = sum tau(e_j)^2.
    """

    vol: float
    rho: float
    rho2: float
    S: float
    frakT2: float
    T2: float
    TTa: float
    tau2: float
    TJT: float = 0.0
    R_sum: float = 0.0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def _integrate(model: GeometryModel, f: np.ndarray) -> float:
    # fsum keeps the reduction order-independent and reproducible
    return math.fsum(np.asarray(model.weights * f, dtype=float))


def torsion_invariants(model: GeometryModel) -> dict:
    t = model.tensors
    return {
        "frakT2": _integrate(model, np.einsum("pm,pm->p", t.frakT, t.frakT)),
        "T2": _integrate(model, t.T2),
        "TTa": _integrate(model, t.TTa),
        "tau2": _integrate(model, np.einsum("px,px->p", t.tau, t.tau)),
        "TJT": _integrate(model, t.TJT),
    }


def invariant_integrals(model: GeometryModel) -> InvariantIntegrals:
    t = model.tensors
    rho = t.rho
    return InvariantIntegrals(vol=model.volume, rho=_integrate(model, rho), rho2=_integrate(model, rho**2),
                              S=_integrate(model, t.S), R_sum=_integrate(model, t.R_sum),
                              **torsion_invariants(model))


def rrho_sides(model: GeometryModel) -> tuple:
    """Pointwise left and right sides of the Riemann-scalar/torsion relation."""
    t = model.tensors
    lhs = t.R_sum
    quad = 2 * np.einsum("pjlm,pmlj->p", t.T, t.T) + t.T2
    rhs = -t.rho + 2 * t.div_tau + np.einsum("px,px->p", t.tau, t.tau) - 0.25 * quad
    return lhs, rhs


def check_rrho(model: GeometryModel) -> float:
    """Maximal pointwise residual of sum g(R(e_j,e_k)e_j,e_k) = -rho + 2 div tau + |tau|^2 - 1/4[...]."""
    lhs, rhs = rrho_sides(model)
    return float(np.abs(lhs - rhs).max())


def frame_residual(model: GeometryModel) -> float:
    return max(max(model.frame_at(p).residuals().values()) for p in range(len(model.points)))


def connection_residual(model: GeometryModel) -> float:
    """Largest violation of antisymmetry / J-commutation by u_mu over all points."""
    J = complex_structure(model.n)
    u = model.fields.u
    anti = np.abs(u + np.swapaxes(u, -1, -2)).max()
    comm = np.abs(u @ J - J @ u).max()
    return float(max(anti, comm))


# ---------------------------------------------------------------------------
# Presets


def build_model(preset: dict) -> GeometryModel:
    """Build a model from a key-value preset, e.g. {"kind": "round_sphere", "radius": 0.5}."""
    kind = preset.get("kind")
    if kind == "flat_torus":
        return flat_torus(preset.get("periods", (1.0, 1.0)), int(preset.get("resolution", 4)))
    if kind == "round_sphere":
        return round_sphere(float(preset.get("radius", 0.5)), int(preset.get("resolution", 16)))
    if kind == "twisted_flat":
        if "u" not in preset:
            raise ValueError("twisted_flat preset needs constant 'u' entries")
        return twisted_flat([np.array(m, float) for m in preset["u"]], preset.get("periods"),
                            int(preset.get("resolution", 2)))
    if kind == "sampled_sphere":
        return sampled_sphere(float(preset.get("radius", 0.5)), int(preset.get("resolution", 16)))
    raise ValueError(f"unknown model kind {kind!r}")


PRESETS = {
    "cp1": {"kind": "round_sphere", "radius": 0.5},
    "sphere": {"kind": "round_sphere", "radius": 0.5},
    "unit_sphere": {"kind": "round_sphere", "radius": 1.0},
    "torus": {"kind": "flat_torus", "periods": [1.0, 1.0]},
    "flat_torus": {"kind": "flat_torus", "periods": [1.0, 1.0]},
    "twisted_flat": {"kind": "twisted_flat",
                     "u": [[[0.0, 0.7], [-0.7, 0.0]], [[0.0, -0.4], [0.4, 0.0]]]},
}


def load_presets(path) -> dict:
    """Read extra presets from a JSON file mapping names to preset dicts."""
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("preset file must hold a JSON object")
    return data


def model_from_name(name: str, extra: dict | None = None) -> GeometryModel:
    table = {**PRESETS, **(extra or {})}
    if name not in table:
        raise ValueError(f"unknown model preset {name!r}")
    return build_model(table[name])

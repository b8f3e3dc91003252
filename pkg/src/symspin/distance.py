"""Discretized symplectic spectral distance on surfaces (n = 1).

A SurfaceMesh is a tensor grid in a chart (torus: periodic square grid;
sphere: pole-free latitude-longitude grid whose theta-rows continue across a
pole by reflection, row -1 at phi equals row 0 at phi + pi).

For a real function a and a level-0 section phi0, [D~, a] phi0 is pointwise
Clifford multiplication by the gradient of a, so its fiber norm is
|da| * |phi0| / sqrt(2). The distance is the sup of a(x) - a(y) subject to this
norm staying below one at every vertex. Two solvers are provided:

* ``lipschitz-graph``: per-edge constraints |a(u) - a(v)| <= length(u, v) on a
  16-neighbour stencil; the optimum is a shortest-path length.
* ``projected-ascent``: ADMM on the per-vertex central-difference gradient
  balls together with the same edge bounds, warm-started from the graph
  solution. Gradient balls alone leave the parity classes of the grid
  uncoupled; the edge bounds hold for every 1-Lipschitz function.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra
from scipy.sparse.linalg import splu

from .fock import FockBasis, clifford_generators, complex_structure, symplectic_matrix
from .geometry import GeometryModel, UnitaryFrame, flat_torus, round_sphere

SOLVERS = ("lipschitz-graph", "projected-ascent")
VARIANTS = ("tilde", "D")


@dataclass(frozen=True)
class SurfaceMesh:
    """Tensor-grid surface mesh with per-vertex frames and connection values.

    ``axes`` are the chart coordinates along both grid directions; vertex
    (i, k) has flat index i * len(axes[1]) + k. ``wrap`` is "torus" or "sphere".
    """

    kind: str
    axes: tuple
    E: np.ndarray
    u: np.ndarray
    wrap: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.wrap not in ("torus", "sphere"):
            raise ValueError("mesh needs a wrap policy: 'torus' or 'sphere'")
        if self.E.shape != (self.n_vertices, 2, 2):
            raise ValueError("one 2x2 frame per vertex expected")
        if self.wrap == "sphere" and self.shape[1] % 2:
            raise ValueError("sphere meshes need an even number of longitudes")

    @property
    def shape(self) -> tuple:
        return (len(self.axes[0]), len(self.axes[1]))

    @property
    def n_vertices(self) -> int:
        return self.shape[0] * self.shape[1]

    @property
    def spacing(self) -> tuple:
        return tuple(float(a[1] - a[0]) for a in self.axes)

    @property
    def h(self) -> float:
        """Largest grid step in arc length."""
        if self.wrap == "torus":
            return max(self.spacing)
        return self.params["radius"] * max(self.spacing)

    @cached_property
    def vertices(self) -> np.ndarray:
        A, B = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([A.ravel(), B.ravel()], axis=-1)

    def index(self, i: int, k: int) -> int:
        return i * self.shape[1] + k

    def nearest_vertex(self, point) -> int:
        """Vertex closest (in geodesic distance) to a chart point."""
        d = self.geodesic_from(np.asarray(point, dtype=float))
        return int(np.argmin(d))

    def _wrapped(self, i: np.ndarray, k: np.ndarray) -> tuple:
        n0, n1 = self.shape
        if self.wrap == "torus":
            return i % n0, k % n1
        i = np.asarray(i).copy()
        k = np.asarray(k).copy()
        low, high = i < 0, i >= n0
        k = np.where(low | high, k + n1 // 2, k)
        i = np.where(low, -1 - i, np.where(high, 2 * n0 - 1 - i, i))
        return i, k % n1

    def shifted(self, di: int, dk: int) -> np.ndarray:
        """Flat index of the neighbour (i + di, k + dk) of every vertex."""
        n0, n1 = self.shape
        I, K = np.meshgrid(np.arange(n0), np.arange(n1), indexing="ij")
        i, k = self._wrapped(I.ravel() + di, K.ravel() + dk)
        return i * n1 + k

    def embed(self, pts: np.ndarray) -> np.ndarray:
        r = self.params["radius"]
        th, ph = pts[..., 0], pts[..., 1]
        return r * np.stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1)

    def geodesic_between(self, p: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Closed-form geodesic distance between chart points (broadcasting)."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        if self.wrap == "torus":
            per = np.asarray(self.params["periods"], dtype=float)
            d = np.abs(p - q) % per
            d = np.minimum(d, per - d)
            return np.sqrt(np.sum(d * d, axis=-1))
        r = self.params["radius"]
        a, b = self.embed(p) / r, self.embed(q) / r
        cross = np.linalg.norm(np.cross(a, b), axis=-1)
        return r * np.arctan2(cross, np.sum(a * b, axis=-1))

    def geodesic_from(self, point: np.ndarray) -> np.ndarray:
        return self.geodesic_between(self.vertices, point[None, :])

    # -- difference operators -------------------------------------------

    def difference(self, axis: int, kind: str) -> sp.csr_matrix:
        """Chart difference along ``axis``: 'central', 'forward' or 'backward'."""
        V = self.n_vertices
        h = self.spacing[axis]
        step = (1, 0) if axis == 0 else (0, 1)
        plus = self.shifted(*step)
        minus = self.shifted(-step[0], -step[1])
        rows = np.arange(V)
        if kind == "central":
            data, cols, s = (np.full(V, 1.0), np.full(V, -1.0)), (plus, minus), 2 * h
        elif kind == "forward":
            data, cols, s = (np.full(V, 1.0), np.full(V, -1.0)), (plus, rows), h
        elif kind == "backward":
            data, cols, s = (np.full(V, 1.0), np.full(V, -1.0)), (rows, minus), h
        else:
            raise ValueError("kind must be 'central', 'forward' or 'backward'")
        M = sp.csr_matrix((np.concatenate(data) / s, (np.concatenate([rows, rows]), np.concatenate(cols))),
                          shape=(V, V))
        M.sum_duplicates()
        return M

    @cached_property
    def edges(self) -> tuple:
        """Undirected 16-neighbour edges (pairs, lengths)."""
        pairs, lengths = edge_list(self)
        if not np.all(lengths > 0):
            raise ValueError("mesh has coincident vertices")
        return pairs, lengths

    def frame(self, v: int) -> UnitaryFrame:
        E = self.E[v]
        Einv = np.linalg.inv(E)
        return UnitaryFrame(E, Einv.T @ Einv, Einv.T @ symplectic_matrix(1) @ Einv,
                            E @ complex_structure(1) @ Einv)

    def frame_gradient(self, a: np.ndarray, kind: str = "central") -> np.ndarray:
        """(e a, f a) at every vertex from chart differences."""
        d = np.stack([self.difference(0, kind) @ a, self.difference(1, kind) @ a], axis=-1)
        return np.einsum("vm,vmj->vj", d, self.E)


def torus_mesh(N: int, periods=(1.0, 1.0)) -> SurfaceMesh:
    m = flat_torus(periods, N)
    axes = tuple(np.arange(N) * (P / N) for P in m.params["periods"])
    return SurfaceMesh("flat_torus", axes, m.fields.E, m.fields.u, "torus", {"periods": list(m.params["periods"])})


def sphere_mesh(n_theta: int, radius: float = 0.5) -> SurfaceMesh:
    m = round_sphere(radius, n_theta)
    th = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    ph = np.arange(2 * n_theta) * np.pi / n_theta
    return SurfaceMesh("round_sphere", (th, ph), m.fields.E, m.fields.u, "sphere", {"radius": float(radius)})


def mesh_from_model(model: GeometryModel, N: int) -> SurfaceMesh:
    if model.n != 1:
        raise ValueError("distance meshes are two-dimensional")
    if model.kind == "flat_torus":
        return torus_mesh(N, model.params["periods"])
    if model.kind == "round_sphere":
        return sphere_mesh(N, model.params["radius"])
    raise ValueError(f"no mesh for model kind {model.kind!r}")


@dataclass(frozen=True)
class ScalarField:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("scalar field must be finite")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class SpinorSection:
    """Per-vertex fiber vectors in a shared FockBasis."""

    basis: FockBasis
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[1] != self.basis.dim:
            raise ValueError("section values must have shape (vertices, basis.dim)")
        if not np.all(np.isfinite(v)):
            raise ValueError("section must have finite norm")
        object.__setattr__(self, "values", v)

    def norms2(self) -> np.ndarray:
        return np.sum(np.abs(self.values) ** 2, axis=1)

    def is_level0(self, tol: float = 1e-12) -> bool:
        return bool(np.abs(self.values[:, self.basis.levels > 0]).max(initial=0.0) <= tol)


def level0_section(mesh: SurfaceMesh, basis: FockBasis | None = None, norm2: float = 2.0) -> SpinorSection:
    """Constant multiple of h_0 with fiber norm^2 equal to ``norm2``."""
    basis = basis or FockBasis(1, 2)
    v = np.zeros((mesh.n_vertices, basis.dim), complex)
    v[:, basis.index((0,))] = math.sqrt(norm2)
    return SpinorSection(basis, v)


def _clifford_factors(basis: FockBasis, variant: str) -> list:
    """Per-direction Clifford factors: e_j. for D~, -(J e_j). for D."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    c = clifford_generators(basis)
    if variant == "tilde":
        return [op.matrix for op in c]
    J = complex_structure(basis.n)
    return [-sum(J[m, j] * c[m].matrix for m in range(len(c))) for j in range(len(c))]


def assemble_dirac(mesh: SurfaceMesh, basis: FockBasis, variant: str = "tilde") -> sp.csr_matrix:
    """Sparse D~ = sum_j e_j. nabla_{e_j} (or D = -sum_j (Je_j). nabla_{e_j}) on sections.

    nabla_{e_j} phi = sum_mu E[mu, j] d_mu phi - r_Q(u(e_j)) phi with central
    chart differences. Ordering is vertex-major: index = v * dim + a.
    """
    if basis.n != 1:
        raise ValueError("surface meshes need a basis with n = 1")
    fac = _clifford_factors(basis, variant)
    c = clifford_generators(basis)
    J = complex_structure(1)
    Jc = [sum(J[m, j] * c[m].matrix for m in range(2)) for j in range(2)]
    D = [mesh.difference(0, "central"), mesh.difference(1, "central")]
    U = np.einsum("vmi,vmjk->vijk", mesh.E, mesh.u)
    out = None
    for j in range(2):
        for mu in range(2):
            term = sp.kron(sp.diags(mesh.E[:, mu, j]) @ D[mu], sp.csr_matrix(fac[j]))
            out = term if out is None else out + term
        for a in range(2):
            for b in range(2):
                coef = U[:, j, a, b]
                if np.any(coef != 0):
                    rq = 0.5j * c[b].matrix @ Jc[a]
                    out = out - sp.kron(sp.diags(coef), sp.csr_matrix(fac[j] @ rq))
    return out.tocsr()


def commutator_norm(mesh: SurfaceMesh, a, vertex: int, phi0: SpinorSection | None = None,
                    variant: str = "tilde") -> float:
    """||[D~, a] phi0|| at a vertex, as Clifford multiplication by the central-difference gradient."""
    a = a.values if isinstance(a, ScalarField) else np.asarray(a, dtype=float)
    phi0 = phi0 or level0_section(mesh)
    if not phi0.is_level0():
        raise ValueError("phi0 must be a level-0 section")
    g = mesh.frame_gradient(a, "central")[vertex]
    fac = _clifford_factors(phi0.basis, variant)
    psi = sum(g[j] * (fac[j] @ phi0.values[vertex]) for j in range(2))
    return float(np.linalg.norm(psi))


def commutator_norms(mesh: SurfaceMesh, a, phi0: SpinorSection | None = None,
                     variant: str = "tilde") -> np.ndarray:
    """commutator_norm at every vertex (vectorized)."""
    a = a.values if isinstance(a, ScalarField) else np.asarray(a, dtype=float)
    phi0 = phi0 or level0_section(mesh)
    if not phi0.is_level0():
        raise ValueError("phi0 must be a level-0 section")
    g = mesh.frame_gradient(a, "central")
    fac = np.array(_clifford_factors(phi0.basis, variant))
    psi = np.einsum("vj,jab,vb->va", g, fac, phi0.values)
    return np.linalg.norm(psi, axis=1)


def constraint_metric(phi0: SpinorSection, variant: str = "tilde") -> np.ndarray:
    """M_v[j,k] = Re <C_j phi0, C_k phi0>, so ||[D,a] phi0||^2 = g^T M g."""
    fac = np.array(_clifford_factors(phi0.basis, variant))
    w = np.einsum("jab,vb->vja", fac, phi0.values)
    return np.einsum("vja,vka->vjk", w.conj(), w).real


# ---------------------------------------------------------------------------
# Solvers


GRAPH_STENCIL = tuple((di, dk) for di in range(-2, 3) for dk in range(-2, 3)
                      if (di, dk) != (0, 0) and math.gcd(abs(di), abs(dk)) == 1)


def edge_list(mesh: SurfaceMesh) -> tuple:
    """Undirected 16-neighbour edges (u, v) and their exact geodesic lengths."""
    idx = np.arange(mesh.n_vertices)
    us, vs = [], []
    for di, dk in GRAPH_STENCIL:
        nb = mesh.shifted(di, dk)
        us.append(idx)
        vs.append(nb)
    u, v = np.concatenate(us), np.concatenate(vs)
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keep = lo != hi
    pairs = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0)
    lengths = mesh.geodesic_between(mesh.vertices[pairs[:, 0]], mesh.vertices[pairs[:, 1]])
    return pairs, lengths


def graph_distances(mesh: SurfaceMesh, source: int, scale: float = 1.0) -> np.ndarray:
    V = mesh.n_vertices
    pairs, L = mesh.edges
    G = sp.csr_matrix((L, (pairs[:, 0], pairs[:, 1])), shape=(V, V))
    d = dijkstra(G, directed=False, indices=source) * scale
    if not np.all(np.isfinite(d)):
        raise ValueError("mesh graph is disconnected")
    return d


def _slope_scale(phi0: SpinorSection, variant: str) -> np.ndarray:
    """Per-vertex sqrt of the largest eigenvalue of M: |[D,a] phi0| <= lam |da|."""
    return np.sqrt(np.linalg.eigvalsh(constraint_metric(phi0, variant))[:, -1])


def constraint_operator(mesh: SurfaceMesh, phi0: SpinorSection, variant: str = "tilde",
                        bound: float = 1.0) -> sp.csr_matrix:
    """Linear map whose image must lie in the unit constraint set.

    Rows 0..2V-1 hold R_v g_v / bound, ordered (component, vertex), where g_v is
    the central-difference frame gradient and R_v^T R_v = M_v, so their
    per-vertex 2-norm is commutator_norm / bound. The remaining rows hold
    (a(u) - a(v)) lam / (bound * length(u, v)) on the 16-neighbour edges and
    must lie in [-1, 1]. These are implied by the gradient bound for smooth a
    and remove the parity null space of central differences.
    """
    M = constraint_metric(phi0, variant)
    R = np.linalg.cholesky(M).transpose(0, 2, 1)
    W = np.einsum("vmk,vjk->vjm", mesh.E, R) / bound
    D = [mesh.difference(0, "central"), mesh.difference(1, "central")]
    ball = [sum(sp.diags(W[:, j, mu]) @ D[mu] for mu in range(2)) for j in range(2)]
    pairs, L = mesh.edges
    lam = _slope_scale(phi0, variant).max()
    m = len(pairs)
    w = lam / (bound * L)
    edges = sp.csr_matrix((np.concatenate([w, -w]), (np.tile(np.arange(m), 2), pairs.T.ravel())),
                          shape=(m, mesh.n_vertices))
    return sp.vstack(ball + [edges]).tocsr()


def project_constraints(w: np.ndarray, V: int) -> np.ndarray:
    """Euclidean projection onto the per-vertex unit balls and the edge boxes."""
    b = w[:2 * V].reshape(2, V)
    b = b / np.maximum(1.0, np.sqrt(np.sum(b * b, axis=0)))
    return np.concatenate([b.ravel(), np.clip(w[2 * V:], -1.0, 1.0)])


def constraint_violation(Ka: np.ndarray, V: int) -> float:
    """Largest constraint value (<= 1 means feasible)."""
    b = Ka[:2 * V].reshape(2, V)
    return float(max(np.sqrt(np.sum(b * b, axis=0)).max(), np.abs(Ka[2 * V:]).max(initial=0.0)))


@dataclass(frozen=True)
class DistanceResult:
    value: float
    solver: str
    variant: str
    iterations: int = 0
    converged: bool = True
    max_constraint: float = 1.0


def projected_ascent(K: sp.csr_matrix, x: int, y: int, a0: np.ndarray, *, rho: float = 0.1,
                     relax: float = 1.6, tol: float = 1e-8, max_iter: int = 10_000) -> tuple:
    """Maximize a(x) with a(y) = 0 subject to K a in the constraint set (ADMM).

    Each iteration solves a fixed sparse normal system, then projects K a onto
    the per-vertex balls and edge boxes. rho is adapted by residual balancing.
    The returned value is the final iterate rescaled to be feasible, hence a
    certified lower bound of the discrete optimum.
    """
    V = K.shape[1]
    keep = np.ones(V, bool)
    keep[y] = False
    Kr = K[:, keep].tocsc()
    KrT = Kr.T.tocsr()
    c = np.zeros(V)
    c[x] = 1.0
    c = c[keep]
    lu = splu((KrT @ Kr).tocsc(), permc_spec="MMD_AT_PLUS_A", options={"SymmetricMode": True},
              diag_pivot_thresh=0.0)
    a = a0[keep].astype(float)
    z = project_constraints(Kr @ a, V)
    u = np.zeros_like(z)
    it, converged = 0, False
    for it in range(1, max_iter + 1):
        a = lu.solve(KrT @ (z - u) + c / rho)
        Ka = Kr @ a
        Kh = relax * Ka + (1.0 - relax) * z
        z_new = project_constraints(Kh + u, V)
        u += Kh - z_new
        r_p = np.abs(Ka - z_new).max()
        r_d = rho * np.abs(KrT @ (z_new - z)).max()
        z = z_new
        if r_p <= tol and r_d <= tol:
            converged = True
            break
        if it % 20 == 0:
            f = 2.0 if r_p > 10 * r_d else (0.5 if r_d > 10 * r_p else 1.0)
            rho *= f
            u /= f
    s = constraint_violation(Kr @ a, V)
    return float(c @ a) / max(1.0, s), it, converged, s


_CACHE: dict = {}


def _cache_key(K: sp.csr_matrix, x: int, y: int, opts: dict) -> tuple:
    h = hash((K.shape, K.indptr.tobytes(), K.indices.tobytes(), np.round(K.data, 14).tobytes()))
    return (h, x, y, tuple(sorted(opts.items())))


def spectral_distance(mesh: SurfaceMesh, x: int, y: int, solver: str = "projected-ascent",
                      variant: str = "tilde", phi0: SpinorSection | None = None, bound: float = 1.0,
                      **opts) -> DistanceResult:
    """sup a(x) - a(y) over vertex functions with ||[D, a] phi0||_v <= bound at every vertex.

    ``lipschitz-graph`` relaxes the per-vertex balls to per-edge bounds and
    returns the shortest-path length. ``projected-ascent`` solves the ball
    problem (plus the edge bounds) starting from the graph solution.
    """
    if solver not in SOLVERS:
        raise ValueError(f"solver must be one of {SOLVERS}")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    V = mesh.n_vertices
    if not (0 <= x < V and 0 <= y < V):
        raise ValueError("x and y must be vertex indices")
    phi0 = phi0 or level0_section(mesh)
    if phi0.values.shape[0] != V:
        raise ValueError("phi0 must have one fiber vector per vertex")
    if not phi0.is_level0():
        raise ValueError("phi0 must be a level-0 section")
    slope = bound / float(_slope_scale(phi0, variant).max())
    d = graph_distances(mesh, y, slope)
    if x == y:
        return DistanceResult(0.0, solver, variant)
    if solver == "lipschitz-graph":
        return DistanceResult(float(d[x]), solver, variant)
    K = constraint_operator(mesh, phi0, variant, bound)
    key = _cache_key(K, x, y, opts)
    if key not in _CACHE:
        a0 = d / max(1.0, constraint_violation(K @ d, V))
        _CACHE[key] = projected_ascent(K, x, y, a0, **opts)
    value, it, conv, s = _CACHE[key]
    return DistanceResult(value, solver, variant, it, conv, s)


def geodesic_oracle(model, x, y) -> float:
    """Closed-form geodesic distance between chart points of a built-in surface."""
    if isinstance(model, SurfaceMesh):
        return float(model.geodesic_between(np.asarray(x, float), np.asarray(y, float)))
    if not isinstance(model, GeometryModel) or model.kind not in ("flat_torus", "round_sphere") or model.n != 1:
        raise ValueError("geodesic oracle supports the built-in torus and sphere only")
    return geodesic_oracle(mesh_from_model(model, 2), x, y)

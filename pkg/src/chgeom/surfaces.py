"""Triangulated surfaces in a model space: Gauss-Kronecker curvature, total
curvature integrals, outer parallel surfaces and the Gauss-map area check.

Vertices are chart points; normals are g-unit tangent vectors at them.
"""

from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import (AmbientNotEuclidean, DegenerateLink, MeshError, NotCartanHadamard,
                     NotConvex)
from .spaces import Euclidean, Hyperbolic, make_space

__all__ = [
    "TriSurface", "GridSurface", "CurvatureReport", "shape_operator", "curvature_report",
    "parallel_surface", "gauss_map_area", "flatness_scan", "icosphere", "sphere_surface",
    "torus_surface", "bumpy_sphere", "klein_ellipsoid", "product_strip", "sphere_patch",
    "read_mesh", "write_mesh", "vertex_normals", "mixed_areas",
]

GK_DEADBAND = 1e-9
LINK_COND = 1e8


# -- metric helpers -----------------------------------------------------------------

def metric_batch(space, X):
    """g at every row of X, shape (m, n, n)."""
    X = np.asarray(X, float)
    n = X.shape[-1]
    E = np.eye(n)
    G = np.empty(X.shape[:-1] + (n, n))
    for i in range(n):
        for j in range(i, n):
            G[..., i, j] = G[..., j, i] = space.inner(X, E[i], E[j])
    return G


def normals_from_covectors(space, X, C):
    """Raise the covectors C with g^{-1} and normalize."""
    G = metric_batch(space, X)
    N = np.linalg.solve(G, C[..., None])[..., 0]
    return N / np.sqrt(space.inner(X, N, N))[..., None]


def tangent_frames(space, X, N):
    """g-orthonormal (e1, e2) orthogonal to the normals N."""
    X = np.asarray(X, float)
    seed = np.eye(3)[np.argmin(np.abs(N), axis=1)]
    frames = []
    for w in (seed, np.cross(N, seed)):
        w = w - space.inner(X, w, N)[:, None] * N
        for e in frames:
            w = w - space.inner(X, w, e)[:, None] * e
        frames.append(w / np.sqrt(space.inner(X, w, w))[:, None])
    return frames[0], frames[1]


def _plane_curvature(space, X, E1, E2):
    if space.curvature_constant is not None:
        return np.full(len(X), float(space.curvature_constant))
    out = np.empty(len(X))
    for i, (x, a, b) in enumerate(zip(X, E1, E2)):
        out[i] = np.einsum("ijkl,i,j,k,l->", space.riemann(x), a, b, b, a)
    return out


# -- mesh type ---------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TriSurface:
    """Oriented triangle mesh with per-vertex outward normals.

    ``closed=False`` is allowed for patches; boundary vertices then have no
    full link and are skipped by the curvature integrals.
    """

    space: object
    vertices: np.ndarray
    triangles: np.ndarray
    normals: np.ndarray
    genus: int | None = None
    closed: bool = True
    name: str = ""
    param: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        V = np.ascontiguousarray(self.vertices, dtype=float)
        F = np.ascontiguousarray(self.triangles, dtype=np.int64)
        N = np.ascontiguousarray(self.normals, dtype=float)
        if V.ndim != 2 or V.shape[1] != 3 or N.shape != V.shape:
            raise MeshError("vertices and normals must be (n, 3)")
        if F.ndim != 2 or F.shape[1] != 3 or F.min() < 0 or F.max() >= len(V):
            raise MeshError("triangles must be (f, 3) vertex indices")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "triangles", F)
        object.__setattr__(self, "normals", N)
        if self.closed:
            self._check_closed()

    def _check_closed(self):
        H = self.half_edges()
        key = H[:, 0] * len(self.vertices) + H[:, 1]
        rev = H[:, 1] * len(self.vertices) + H[:, 0]
        uniq, counts = np.unique(key, return_counts=True)
        if np.any(counts > 1):
            raise MeshError("inconsistent orientation: a directed edge repeats")
        if not np.all(np.isin(rev, uniq)):
            raise MeshError("surface is not closed: some edge has one triangle")
        chi = self.euler_characteristic
        if self.genus is not None and chi != 2 - 2 * self.genus:
            raise MeshError(f"Euler characteristic {chi} does not match genus {self.genus}")

    def half_edges(self):
        F = self.triangles
        return np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]])

    def edges(self):
        H = np.sort(self.half_edges(), axis=1)
        return np.unique(H, axis=0)

    @property
    def euler_characteristic(self):
        return len(self.vertices) - len(self.edges()) + len(self.triangles)

    @property
    def computed_genus(self):
        return (2 - self.euler_characteristic) // 2

    def boundary_vertices(self):
        H = self.half_edges()
        n = len(self.vertices)
        key = H[:, 0] * n + H[:, 1]
        rev = H[:, 1] * n + H[:, 0]
        lone = ~np.isin(rev, key)
        mask = np.zeros(n, bool)
        mask[H[lone].ravel()] = True
        return mask

    def normal_defects(self):
        """(max ||nu|_g - 1|, max |g(nu, unit edge)|) over vertices/edges."""
        X, N = self.vertices, self.normals
        unit = np.max(np.abs(np.sqrt(self.space.inner(X, N, N)) - 1.0))
        H = self.half_edges()
        e = self.space.log(X[H[:, 0]], X[H[:, 1]])
        x = X[H[:, 0]]
        c = self.space.inner(x, e, N[H[:, 0]]) / np.sqrt(self.space.inner(x, e, e))
        return float(unit), float(np.max(np.abs(c)))

    def with_vertices(self, vertices, normals, name=None):
        return TriSurface(self.space, vertices, self.triangles, normals, self.genus,
                          self.closed, name or self.name, self.param)


def vertex_normals(space, vertices, triangles):
    """Area-weighted chart normals, raised by g and normalized."""
    V = np.asarray(vertices, float)
    F = np.asarray(triangles)
    c = np.cross(V[F[:, 1]] - V[F[:, 0]], V[F[:, 2]] - V[F[:, 0]])
    C = np.zeros_like(V)
    for k in range(3):
        np.add.at(C, F[:, k], c)
    return normals_from_covectors(space, V, C)


# -- area weights and shape operator -------------------------------------------------

def mixed_areas(space, surface):
    """Mixed Voronoi vertex areas from geodesic edge lengths."""
    X, F = surface.vertices, surface.triangles
    L = np.stack([space.distance(X[F[:, (k + 1) % 3]], X[F[:, (k + 2) % 3]])
                  for k in range(3)], axis=1)  # L[:, k] is opposite vertex k
    L2 = L * L
    cosA = np.stack([(L2[:, (k + 1) % 3] + L2[:, (k + 2) % 3] - L2[:, k])
                     / (2 * L[:, (k + 1) % 3] * L[:, (k + 2) % 3]) for k in range(3)], axis=1)
    cosA = np.clip(cosA, -1.0, 1.0)
    s = L.sum(axis=1) / 2
    area = np.sqrt(np.maximum(s * (s - L[:, 0]) * (s - L[:, 1]) * (s - L[:, 2]), 0.0))
    cot = cosA / np.sqrt(np.maximum(1 - cosA**2, 1e-300))
    W = np.zeros((len(F), 3))
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        # vertex k touches edges opposite i and j
        W[:, k] = (L2[:, j] * cot[:, j] + L2[:, i] * cot[:, i]) / 8.0
    obtuse = cosA < 0
    any_obt = obtuse.any(axis=1)
    W[any_obt] = np.where(obtuse[any_obt], area[any_obt, None] / 2, area[any_obt, None] / 4)
    A = np.zeros(len(X))
    for k in range(3):
        np.add.at(A, F[:, k], W[:, k])
    return A


@dataclass(frozen=True)
class VertexShape:
    """Shape operators in per-vertex tangent frames."""

    S: np.ndarray          # (m, 2, 2) symmetrized
    gk: np.ndarray         # det S
    asymmetry: np.ndarray  # |S - S^T| / |S|
    valid: np.ndarray      # full link and well conditioned
    e1: np.ndarray
    e2: np.ndarray


def _shape_all(space, surface, strict=False):
    X, N = surface.vertices, surface.normals
    n = len(X)
    H = surface.half_edges()
    H = np.concatenate([H, H[:, ::-1]])
    H = np.unique(H, axis=0)  # each neighbor pair once per direction
    i, j = H[:, 0], H[:, 1]
    dx = X[j] - X[i]
    xm = np.ascontiguousarray(0.5 * (X[i] + X[j]))
    nm = np.ascontiguousarray(0.5 * (N[i] + N[j]))
    # covariant difference of nu along the chord, Christoffel at the midpoint
    dn = N[j] - N[i] + K.christoffel_batch(space.model_id, xm, np.ascontiguousarray(dx), nm)
    e1, e2 = tangent_frames(space, X, N)
    xi = X[i]
    a = np.stack([space.inner(xi, dx, e1[i]), space.inner(xi, dx, e2[i])], axis=1)
    b = np.stack([space.inner(xi, dn, e1[i]), space.inner(xi, dn, e2[i])], axis=1)
    AtA = np.zeros((n, 2, 2))
    AtB = np.zeros((n, 2, 2))
    np.add.at(AtA, i, a[:, :, None] * a[:, None, :])
    np.add.at(AtB, i, a[:, :, None] * b[:, None, :])
    valence = np.bincount(i, minlength=n)
    ok = valence >= 3
    if not surface.closed:
        ok &= ~surface.boundary_vertices()
    ev = np.linalg.eigvalsh(AtA)
    cond = ev[:, 1] / np.maximum(ev[:, 0], 1e-300)
    ok &= cond < LINK_COND
    if strict and not ok.all():
        raise DegenerateLink(f"{int((~ok).sum())} vertices lack a usable link")
    S = np.zeros((n, 2, 2))
    S[ok] = np.swapaxes(np.linalg.solve(AtA[ok], AtB[ok]), 1, 2)
    Ssym = 0.5 * (S + np.swapaxes(S, 1, 2))
    nrm = np.linalg.norm(S, axis=(1, 2))
    asym = np.linalg.norm(S - np.swapaxes(S, 1, 2), axis=(1, 2)) / 2 / np.maximum(nrm, 1e-300)
    gk = np.linalg.det(Ssym)
    return VertexShape(Ssym, gk, asym, ok, e1, e2)


def shape_operator(space, surface, vertex):
    """(2x2 symmetric shape operator in a g-orthonormal tangent frame, GK)
    at one vertex, from a least-squares fit of covariant normal differences
    over the 1-ring."""
    sub = _one_ring(surface, vertex)
    sh = _shape_all(space, sub[0], strict=False)
    k = sub[1]
    if not sh.valid[k]:
        raise DegenerateLink(f"vertex {vertex}: valence < 3, boundary or degenerate link")
    return sh.S[k], float(sh.gk[k])


def _one_ring(surface, v):
    F = surface.triangles
    tri = F[np.any(F == v, axis=1)]
    if len(tri) == 0:
        raise DegenerateLink(f"vertex {v} is isolated")
    idx, inv = np.unique(tri, return_inverse=True)
    sub = TriSurface(surface.space, surface.vertices[idx], inv.reshape(-1, 3),
                     surface.normals[idx], closed=False)
    k = int(np.searchsorted(idx, v))
    if sub.boundary_vertices()[k]:
        raise DegenerateLink(f"vertex {v} is on the boundary")
    return sub, k


# -- curvature report ------------------------------------------------------------------

@dataclass
class CurvatureReport:
    total_abs: float
    total_signed: float
    total_positive: float
    gauss_bonnet: float
    ambient: float
    area: float
    euler_characteristic: int
    max_asymmetry: float
    n_vertices: int

    @property
    def gauss_bonnet_defect(self):
        return self.gauss_bonnet - 2 * np.pi * self.euler_characteristic

    def chain_ok(self, slack=0.0):
        return (self.total_abs >= abs(self.total_signed) - slack
                and self.total_positive >= self.total_signed - slack
                and self.total_positive <= self.total_abs + slack)

    def as_row(self):
        return {"total_abs": self.total_abs, "total_signed": self.total_signed,
                "total_positive": self.total_positive, "gauss_bonnet": self.gauss_bonnet,
                "ambient": self.ambient, "area": self.area,
                "gb_defect": self.gauss_bonnet_defect, "max_asymmetry": self.max_asymmetry}


@dataclass(frozen=True)
class VertexCurvature:
    weights: np.ndarray
    gk: np.ndarray
    ambient: np.ndarray
    valid: np.ndarray
    asymmetry: np.ndarray


def vertex_curvature(space, surface):
    sh = _shape_all(space, surface, strict=surface.closed)
    w = mixed_areas(space, surface)
    kamb = _plane_curvature(space, surface.vertices, sh.e1, sh.e2)
    return VertexCurvature(w, sh.gk, kamb, sh.valid, sh.asymmetry)


def curvature_report(space, surface, vc=None):
    """Total absolute, signed and positive curvature and the Gauss equation
    integrals, with mixed Voronoi weights."""
    vc = vertex_curvature(space, surface) if vc is None else vc
    ok = vc.valid
    w, gk = vc.weights[ok], vc.gk[ok]
    pos = gk > GK_DEADBAND
    signed = float(np.sum(w * gk))
    amb = float(np.sum(w * vc.ambient[ok]))
    return CurvatureReport(
        total_abs=float(np.sum(w * np.abs(gk))),
        total_signed=signed,
        total_positive=float(np.sum(w[pos] * gk[pos])),
        gauss_bonnet=signed + amb,
        ambient=amb,
        area=float(np.sum(w)),
        euler_characteristic=int(surface.euler_characteristic),
        max_asymmetry=float(np.max(vc.asymmetry[ok])) if ok.any() else 0.0,
        n_vertices=int(ok.sum()),
    )


def flatness_scan(space, surface):
    """max |K(T_p surface)| over vertices."""
    e1, e2 = tangent_frames(space, surface.vertices, surface.normals)
    return float(np.max(np.abs(_plane_curvature(space, surface.vertices, e1, e2))))


# -- parallel surfaces and the Gauss map ---------------------------------------------------

def parallel_surface(space, surface, t, certify=True):
    """Outer parallel surface at distance t: every vertex flows along its
    outward normal geodesic; the new normal is the geodesic velocity."""
    if not space.is_cartan_hadamard:
        raise NotCartanHadamard(f"{space!r} is not Cartan-Hadamard")
    if t <= 0:
        raise ValueError("t must be positive")
    if certify:
        from .hull import certify_convex
        ok, viol = certify_convex(space, surface)
        if not ok:
            raise NotConvex(f"surface is not convex (violation {viol:.3e})")
    P, V = space.geodesic_state(surface.vertices, surface.normals, t)
    V = V / np.sqrt(space.inner(P, V, V))[:, None]
    return surface.with_vertices(P, V, name=f"{surface.name}^t={t:g}")


def _spherical_area(a, b, c):
    num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = 1 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) \
        + np.einsum("ij,ij->i", c, a)
    return 2 * np.arctan2(num, den)


def fibonacci_directions(k, twist=0.123):
    i = np.arange(k) + 0.5
    z = 1 - 2 * i / k
    phi = i * np.pi * (3 - np.sqrt(5)) + twist
    r = np.sqrt(1 - z * z)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)


def gauss_map_area(surface, n_dirs=400):
    """(area of the Gauss image counted with multiplicity, minimum number of
    preimages over sampled lines of directions).

    Each line {w, -w} of RP^2 is counted once: a surface meeting it with
    multiplicity k contributes k.  The total therefore compares with the
    total absolute curvature; the area of RP^2 is 2 pi.
    """
    if not isinstance(surface.space, Euclidean):
        raise AmbientNotEuclidean("the Gauss map needs a Euclidean ambient")
    N = surface.normals / np.linalg.norm(surface.normals, axis=1, keepdims=True)
    F = surface.triangles
    a, b, c = N[F[:, 0]], N[F[:, 1]], N[F[:, 2]]
    area = float(np.sum(_spherical_area(a, b, c)))
    W = fibonacci_directions(n_dirs)
    # a direction lies in the (small) spherical triangle iff all three
    # orientation signs agree
    s1 = np.sign(np.cross(a, b) @ W.T)
    s2 = np.sign(np.cross(b, c) @ W.T)
    s3 = np.sign(np.cross(c, a) @ W.T)
    near = (a @ W.T) > 0
    hits_pos = (s1 == s2) & (s2 == s3) & (s1 != 0) & near
    hits_neg = (s1 == s2) & (s2 == s3) & (s1 != 0) & ~near & ((a @ W.T) < 0)
    mult = hits_pos.sum(axis=0) + hits_neg.sum(axis=0)
    return area, int(mult.min())


# -- fixtures --------------------------------------------------------------------------

def icosphere(level=5):
    """Unit-sphere vertices and outward triangles; 20 * 4**level faces."""
    t = (1 + np.sqrt(5)) / 2
    V = np.array([[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
                  [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
                  [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], float)
    F = np.array([[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
                  [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
                  [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
                  [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]])
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    for _ in range(level):
        E = np.sort(np.concatenate([F[:, [0, 1]], F[:, [1, 2]], F[:, [2, 0]]]), axis=1)
        E, inv = np.unique(E, axis=0, return_inverse=True)
        mid = V[E[:, 0]] + V[E[:, 1]]
        mid /= np.linalg.norm(mid, axis=1, keepdims=True)
        m = len(V) + inv.reshape(3, -1).T  # midpoint of edges (01, 12, 20)
        V = np.vstack([V, mid])
        a, b, c = F.T
        ab, bc, ca = m.T
        F = np.concatenate([np.stack([a, ab, ca], 1), np.stack([b, bc, ab], 1),
                            np.stack([c, ca, bc], 1), np.stack([ab, bc, ca], 1)])
    return V, F


def _space3(space):
    return make_space(space, 3) if isinstance(space, str) else space


def _star_surface(space, U, F, rho, grad_rho, name, genus=0, param=None):
    """Surface {radius rho(u) along direction u}: Euclidean radius in E^3,
    geodesic radius about the chart origin in H^3."""
    r = rho(U)[:, None]
    G = grad_rho(U)
    G = G - np.einsum("ij,ij->i", G, U)[:, None] * U  # tangential part
    if isinstance(space, Euclidean):
        X = r * U
        C = U - G / r
    elif isinstance(space, Hyperbolic):
        X = np.sinh(r) * U
        # F(y) = asinh|y| - rho(y/|y|)
        C = U / np.cosh(r) - G / np.sinh(r)
    else:
        raise ValueError("star-shaped fixtures live in E^3 or H^3")
    N = normals_from_covectors(space, X, C)
    return TriSurface(space, X, F, N, genus, True, name, param)


def sphere_surface(space, radius=1.0, level=5):
    """Round sphere (E^3) or geodesic sphere about the origin (H^3)."""
    space = _space3(space)
    U, F = icosphere(level)
    return _star_surface(space, U, F, lambda u: np.full(len(u), radius),
                         lambda u: np.zeros_like(u), f"sphere(r={radius:g})",
                         param={"radius": radius})


def _bump(u):
    x, y, z = u.T
    return (x**4 + y**4 + z**4 - 0.6) / 0.4


def _bump_grad(u):
    return 4 * u**3 / 0.4


def bumpy_sphere(space, amp=0.2, radius=1.0, level=5):
    """Radial perturbation radius * (1 + amp * h) of a sphere, h a cubic-
    symmetric harmonic-like polynomial with range [-1, 1]."""
    space = _space3(space)
    U, F = icosphere(level)
    return _star_surface(space, U, F, lambda u: radius * (1 + amp * _bump(u)),
                         lambda u: radius * amp * _bump_grad(u),
                         f"bumpy(amp={amp:g})", param={"radius": radius, "amp": amp})


def klein_ellipsoid(space, axes, rotation=None, center=None, level=4):
    """Ellipsoid c + R diag(axes) u.  In H^3 it is drawn in the Klein chart,
    where it bounds a convex body, and mapped to the hyperboloid chart."""
    space = _space3(space)
    U, F = icosphere(level)
    R = np.eye(3) if rotation is None else np.asarray(rotation, float)
    c = np.zeros(3) if center is None else np.asarray(center, float)
    D = np.asarray(axes, float)
    Kp = c + (U * D) @ R.T
    # gradient of |D^{-1} R^T (k - c)|^2
    Ck = (U / D) @ R.T
    if isinstance(space, Euclidean):
        X, C = Kp, Ck
    elif isinstance(space, Hyperbolic):
        if np.max(np.linalg.norm(Kp, axis=1)) >= 1:
            raise ValueError("ellipsoid leaves the Klein ball")
        X = space.from_klein(Kp)
        w = np.sqrt(1 + np.einsum("ij,ij->i", X, X))[:, None]
        # dk/dy = I / w - y y^T / w^3 (symmetric)
        C = Ck / w - X * (np.einsum("ij,ij->i", X, Ck)[:, None] / w**3)
    else:
        raise ValueError("ellipsoids live in E^3 or H^3")
    N = normals_from_covectors(space, X, C)
    return TriSurface(space, X, F, N, 0, True, "ellipsoid",
                      {"axes": D.tolist(), "center": c.tolist()})


def torus_surface(R=2.0, r=1.0, nu=100, nv=100):
    """Torus of revolution in E^3, nu x nv grid, genus 1."""
    u = np.arange(nu) * 2 * np.pi / nu
    v = np.arange(nv) * 2 * np.pi / nv
    U, Vv = np.meshgrid(u, v, indexing="ij")
    X = np.stack([(R + r * np.cos(Vv)) * np.cos(U), (R + r * np.cos(Vv)) * np.sin(U),
                  r * np.sin(Vv)], axis=-1).reshape(-1, 3)
    N = np.stack([np.cos(Vv) * np.cos(U), np.cos(Vv) * np.sin(U), np.sin(Vv)],
                 axis=-1).reshape(-1, 3)
    idx = np.arange(nu * nv).reshape(nu, nv)
    a = idx
    b = np.roll(idx, -1, axis=0)
    c = np.roll(np.roll(idx, -1, axis=0), -1, axis=1)
    d = np.roll(idx, -1, axis=1)
    F = np.concatenate([np.stack([a, b, c], -1).reshape(-1, 3),
                        np.stack([a, c, d], -1).reshape(-1, 3)])
    return TriSurface(Euclidean(3), X, F, N, 1, True, f"torus(R={R:g},r={r:g})",
                      {"R": R, "r": r})


# -- grid patches ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GridSurface:
    """Surface patch sampled on a (u, v) grid: points[i, j] = X(u_i, v_j)."""

    space: object
    u: np.ndarray
    v: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    du: np.ndarray  # dX/du
    dv: np.ndarray  # dX/dv
    name: str = ""

    @property
    def shape(self):
        return self.points.shape[:2]

    def to_trisurface(self):
        nu, nv = self.shape
        idx = np.arange(nu * nv).reshape(nu, nv)
        a, b = idx[:-1, :-1], idx[1:, :-1]
        c, d = idx[1:, 1:], idx[:-1, 1:]
        F = np.concatenate([np.stack([a, b, c], -1).reshape(-1, 3),
                            np.stack([a, c, d], -1).reshape(-1, 3)])
        X = self.points.reshape(-1, 3)
        N = self.normals.reshape(-1, 3)
        # orient triangles by the normal
        cr = np.cross(X[F[:, 1]] - X[F[:, 0]], X[F[:, 2]] - X[F[:, 0]])
        flip = np.einsum("ij,ij->i", cr, N[F[:, 0]]) < 0
        F[flip] = F[flip][:, ::-1]
        return TriSurface(self.space, X, F, N, None, False, self.name)


def product_strip(base="geodesic", length=2.0, height=1.0, nu=100, nv=100, kappa=None):
    """(curve in H^2) x [0, height] in H^2 x R.

    base="geodesic": unit-speed geodesic through the origin along y1.
    base="circle": arc of curvature kappa (default coth 1) on the circle of
    radius acoth(kappa) about the origin.
    """
    from .spaces import ProductH2R
    space = ProductH2R()
    s = np.linspace(0.0, length, nu)
    z = np.linspace(0.0, height, nv)
    if base == "geodesic":
        P = np.stack([np.sinh(s - length / 2), np.zeros_like(s)], 1)
        T = np.stack([np.cosh(s - length / 2), np.zeros_like(s)], 1)
        Nh = np.stack([np.zeros_like(s), np.ones_like(s)], 1)
    elif base == "circle":
        k = 1 / np.tanh(1.0) if kappa is None else kappa
        rad = np.arctanh(1 / k)
        sr = np.sinh(rad)
        phi = s / sr
        P = sr * np.stack([np.cos(phi), np.sin(phi)], 1)
        T = np.stack([-np.sin(phi), np.cos(phi)], 1)
        # outward normal: radial, g-unit
        Nh = np.stack([np.cos(phi), np.sin(phi)], 1) * np.cosh(rad)
    else:
        raise ValueError(f"unknown base {base!r}")
    nu_, nv_ = len(s), len(z)
    pts = np.zeros((nu_, nv_, 3))
    pts[..., :2] = P[:, None, :]
    pts[..., 2] = z[None, :]
    nrm = np.zeros_like(pts)
    nrm[..., :2] = Nh[:, None, :]
    du = np.zeros_like(pts)
    du[..., :2] = T[:, None, :]
    dv = np.zeros_like(pts)
    dv[..., 2] = 1.0
    return GridSurface(space, s, z, pts, nrm, du, dv, f"strip({base})")


def sphere_patch(radius=1.0, nu=50, nv=50, extent=0.5):
    """Patch of the geodesic sphere of radius r about the origin of H^3,
    polar angle in [pi/2 - extent, pi/2 + extent], azimuth in [0, 2 extent]."""
    space = Hyperbolic(3)
    th = np.linspace(np.pi / 2 - extent, np.pi / 2 + extent, nu)
    ph = np.linspace(0.0, 2 * extent, nv)
    TH, PH = np.meshgrid(th, ph, indexing="ij")
    Udir = np.stack([np.sin(TH) * np.cos(PH), np.sin(TH) * np.sin(PH), np.cos(TH)], -1)
    sr = np.sinh(radius)
    pts = sr * Udir
    du = sr * np.stack([np.cos(TH) * np.cos(PH), np.cos(TH) * np.sin(PH), -np.sin(TH)], -1)
    dv = sr * np.stack([-np.sin(TH) * np.sin(PH), np.sin(TH) * np.cos(PH), 0 * TH], -1)
    nrm = Udir * np.cosh(radius)
    return GridSurface(space, th, ph, pts, nrm, du, dv, f"sphere_patch(r={radius:g})")


# -- ASCII mesh format ---------------------------------------------------------------------
#
#   chgeom-mesh <space tag> <n> <vertex count> <triangle count> <genus|->
#   x_1 .. x_n  nu_1 .. nu_n        (one line per vertex)
#   i j k                           (one line per triangle, 0-based)

def write_mesh(surface, path=None, tag=None):
    tag = tag or surface.space.chart
    g = "-" if surface.genus is None else str(surface.genus)
    lines = [f"chgeom-mesh {tag} 3 {len(surface.vertices)} {len(surface.triangles)} {g}"]
    for x, n in zip(surface.vertices, surface.normals):
        lines.append(" ".join(repr(float(a)) for a in (*x, *n)))
    for f in surface.triangles:
        lines.append(f"{f[0]} {f[1]} {f[2]}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def read_mesh(source, closed=True):
    """Parse the ASCII mesh format from a path or a string."""
    text = source
    if "\n" not in source:
        with open(source) as fh:
            text = fh.read()
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    head = rows[0]
    if head[0] != "chgeom-mesh" or len(head) != 6:
        raise MeshError("missing chgeom-mesh header")
    tag, n, nv, nf = head[1], int(head[2]), int(head[3]), int(head[4])
    genus = None if head[5] == "-" else int(head[5])
    if len(rows) != 1 + nv + nf:
        raise MeshError(f"expected {nv} vertex and {nf} triangle lines")
    A = np.array(rows[1:1 + nv], float)
    F = np.array(rows[1 + nv:], np.int64)
    space = make_space("hyperboloid" if tag == "klein" else tag, n)
    return TriSurface(space, A[:, :n], F, A[:, n:], genus, closed)

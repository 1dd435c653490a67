"""Convex hulls in E^3 and H^3, boundary curvature of hulls, tangent-cone
apertures and the total-curvature chain for closed surfaces.

Hyperbolic hulls are computed in the Klein chart, where totally geodesic
planes are affine planes; metric quantities are evaluated in the
hyperboloid chart.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.spatial import ConvexHull as _QHull
from scipy.spatial import QhullError, cKDTree

from .errors import DegenerateHull, DegenerateInput, InteriorPoint, UnsupportedSpace
from .spaces import Euclidean, Hyperbolic, Klein
from .surfaces import GK_DEADBAND, curvature_report, metric_batch, vertex_curvature

__all__ = ["ConvexHull", "convex_hull", "certify_convex", "hull_boundary_curvature",
           "kleiner_chain", "tangent_cone_aperture", "orient3d", "ChainRecord"]

BOUNDARY_TOL = 1e-7  # relative to hull diameter
FOUR_PI = 4 * np.pi

_EPS = np.finfo(float).eps
_O3D_BOUND = (7 + 56 * _EPS) * _EPS


def orient3d(a, b, c, d):
    """Sign of det[b - a, c - a, d - a]: +1, 0 or -1.

    Floating-point evaluation with a static error filter; ambiguous cases
    are settled in exact rational arithmetic.
    """
    a, b, c, d = (np.asarray(p, float) for p in (a, b, c, d))
    u, v, w = b - a, c - a, d - a
    det = (u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
           + u[2] * (v[0] * w[1] - v[1] * w[0]))
    perm = (abs(u[0]) * (abs(v[1] * w[2]) + abs(v[2] * w[1]))
            + abs(u[1]) * (abs(v[0] * w[2]) + abs(v[2] * w[0]))
            + abs(u[2]) * (abs(v[0] * w[1]) + abs(v[1] * w[0])))
    if abs(det) > _O3D_BOUND * perm:
        return int(np.sign(det))
    A = [[Fraction(float(p[k])) - Fraction(float(a[k])) for k in range(3)] for p in (b, c, d)]
    (u0, u1, u2), (v0, v1, v2), (w0, w1, w2) = A
    ex = u0 * (v1 * w2 - v2 * w1) - u1 * (v0 * w2 - v2 * w0) + u2 * (v0 * w1 - v1 * w0)
    return (ex > 0) - (ex < 0)


@dataclass(frozen=True, eq=False)
class ConvexHull:
    """Hull of ``points`` (chart coordinates of ``space``).

    ``coords`` are the linearizing coordinates (Euclidean or Klein);
    ``facets`` are outward-oriented triangles into ``points``;
    ``equations`` rows (n, c) give the outward unit normal n and offset c of
    each facet plane n . k + c = 0 in ``coords``.
    """

    space: object
    points: np.ndarray
    coords: np.ndarray
    vertices: np.ndarray
    facets: np.ndarray
    equations: np.ndarray
    model: str

    @property
    def diameter(self):
        C = self.coords[self.vertices]
        return float(np.max(np.linalg.norm(C - C.mean(axis=0), axis=1)) * 2)

    def signed_depth(self, k):
        """max over facets of n . k + c: <= 0 inside, 0 on the boundary."""
        k = np.atleast_2d(k)
        N, c = self.equations[:, :3].T, self.equations[:, 3]
        step = max(1, 2**24 // max(len(c), 1))  # bound the block to ~128 MB
        return np.concatenate([np.max(k[i:i + step] @ N + c, axis=1)
                               for i in range(0, len(k), step)]) if len(k) else np.empty(0)

    def contains(self, pts, slack=1e-10):
        return self.signed_depth(to_linear(self.space, pts)) <= slack


def to_linear(space, pts):
    pts = np.asarray(pts, float)
    if isinstance(space, Euclidean):
        return pts
    if isinstance(space, Hyperbolic):
        return space.to_klein(pts)
    if isinstance(space, Klein):
        return pts
    raise UnsupportedSpace(f"no geodesically linear chart for {space!r}")


def convex_hull(space, points):
    """Convex hull in E^3 or H^3 (Klein-chart combinatorics)."""
    if space.dim != 3:
        raise UnsupportedSpace("hulls are implemented for n = 3")
    P = np.asarray(points, float)
    C = to_linear(space, P)
    if len(C) < 4:
        raise DegenerateInput("need at least 4 points")
    sv = np.linalg.svd(C - C.mean(axis=0), compute_uv=False)
    if sv[-1] <= 1e-12 * max(sv[0], 1e-300):
        raise DegenerateInput("points are coplanar or collinear in the linear chart")
    try:
        q = _QHull(C, qhull_options="Qt")
    except QhullError as exc:
        raise DegenerateInput(str(exc)) from exc
    F = q.simplices.copy()
    eq = q.equations.copy()
    # qhull's facet orientation is arbitrary: flip to outward
    cr = np.cross(C[F[:, 1]] - C[F[:, 0]], C[F[:, 2]] - C[F[:, 0]])
    flip = np.einsum("ij,ij->i", cr, eq[:, :3]) < 0
    F[flip] = F[flip][:, ::-1]
    return ConvexHull(space, P, C, np.asarray(q.vertices), F, eq, space.chart)


def _check_orientation(hull):
    """Exact check that the vertex centroid is strictly inside every facet."""
    g = hull.coords[hull.vertices].mean(axis=0)
    C = hull.coords
    return all(orient3d(C[a], C[b], C[c], g) < 0 for a, b, c in hull.facets)


def certify_convex(space, surface, tol=1e-9):
    """(is the vertex set in convex position, largest depth of a vertex
    below the hull boundary in linear-chart units)."""
    hull = convex_hull(space, surface.vertices)
    depth = _vertex_depths(hull)
    viol = float(max(np.max(depth), 0.0))
    return viol <= tol * max(hull.diameter, 1e-300), viol


def _vertex_depths(hull):
    """Depth of every input point below the hull boundary (0 for hull vertices)."""
    depth = np.zeros(len(hull.coords))
    rest = np.setdiff1d(np.arange(len(hull.coords)), hull.vertices)
    if len(rest):
        depth[rest] = np.maximum(-hull.signed_depth(hull.coords[rest]), 0.0)
    return depth


def _near_boundary(hull, tol):
    """Points within ``tol`` of the hull boundary (linear-chart units).

    A point that close to the boundary is within ``tol`` of some facet, so
    within that facet's circumradius plus ``tol`` of its centroid.  Small
    facets are found through a KD-tree on centroids; the few large ones
    (spanning concavities of the input) are tested against every point.
    """
    C = hull.coords
    near = np.zeros(len(C), bool)
    near[hull.vertices] = True
    rest = np.setdiff1d(np.arange(len(C)), hull.vertices)
    if not len(rest):
        return near
    F = C[hull.facets]
    cen = F.mean(axis=1)
    rad = np.max(np.linalg.norm(F - cen[:, None], axis=2), axis=1)
    big = rad > 4 * np.median(rad)
    N, c = hull.equations[:, :3], hull.equations[:, 3]
    K = C[rest]
    hit = np.zeros(len(rest), bool)
    if big.any():
        hit |= np.max(K @ N[big].T + c[big], axis=1) >= -tol
    small = np.flatnonzero(~big)
    cand = cKDTree(cen[small]).query_ball_point(K, rad[small].max() + tol)
    lens = np.fromiter(map(len, cand), int, len(cand))
    if lens.sum():
        pi = np.repeat(np.arange(len(rest)), lens)
        fi = small[np.concatenate([np.asarray(x, int) for x in cand if x])]
        val = np.einsum("ij,ij->i", K[pi], N[fi]) + c[fi]
        hit |= np.bincount(pi, weights=(val >= -tol), minlength=len(rest)) > 0
    near[rest] = hit
    return near


def _frames(space, X):
    """Cholesky factors L with g = L L^T, so L^T v are orthonormal coords."""
    return np.linalg.cholesky(metric_batch(space, X))


def _facet_tangent_normals(space, hull):
    """Outward facet normals as tangent vectors in the chart of ``space``.

    Euclidean: n itself.  Hyperbolic (hyperboloid chart): the plane
    n . k + c = 0 is the Minkowski-orthogonal complement of (-c, n), whose
    spatial part n is the chart vector at every point of the plane.
    """
    return hull.equations[:, :3]


def _polygon_area(Vs):
    """Area of the convex spherical polygon spanned by unit vectors Vs."""
    if len(Vs) < 3:
        return 0.0
    m = Vs.mean(axis=0)
    m /= np.linalg.norm(m)
    a = np.cross(m, Vs[0])
    if np.linalg.norm(a) < 1e-14:
        a = np.cross(m, Vs[1])
    a /= np.linalg.norm(a)
    b = np.cross(m, a)
    ang = np.arctan2(Vs @ b, Vs @ a)
    V = Vs[np.argsort(ang)]
    V = np.vstack([V, V[:1]])
    # fan from the mean direction (inside the convex polygon)
    x, y = V[:-1], V[1:]
    num = np.abs(np.einsum("ij,ij->i", np.broadcast_to(m, x.shape), np.cross(x, y)))
    den = 1 + x @ m + y @ m + np.einsum("ij,ij->i", x, y)
    return float(np.sum(2 * np.arctan2(num, den)))


def _polygon_areas(W, mask):
    """Batched ``_polygon_area``: W (m, k, 3) unit vectors, mask (m, k) valid."""
    Wm = np.where(mask[..., None], W, 0.0)
    m = Wm.sum(axis=1)
    m /= np.linalg.norm(m, axis=1, keepdims=True)
    ref = W[:, 0]
    a = np.cross(m, ref)
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b = np.cross(m, a)
    ang = np.arctan2(np.einsum("mkj,mj->mk", W, b), np.einsum("mkj,mj->mk", W, a))
    ang = np.where(mask, ang, np.inf)
    order = np.argsort(ang, axis=1)
    V = np.take_along_axis(W, order[..., None], axis=1)
    cnt = mask.sum(axis=1)
    # successor of sorted slot i is i + 1, wrapping at the valid count
    nxt = np.arange(W.shape[1])[None, :] + 1
    nxt = np.where(nxt >= cnt[:, None], 0, nxt)
    Y = np.take_along_axis(V, nxt[..., None], axis=1)
    num = np.abs(np.einsum("mj,mkj->mk", m, np.cross(V, Y)))
    den = 1 + np.einsum("mkj,mj->mk", V, m) + np.einsum("mkj,mj->mk", Y, m) \
        + np.einsum("mkj,mkj->mk", V, Y)
    tri = 2 * np.arctan2(num, den)
    valid = np.arange(W.shape[1])[None, :] < cnt[:, None]
    return np.where(valid & (cnt[:, None] >= 3), tri, 0.0).sum(axis=1)


def vertex_normal_cones(space, hull):
    """Normal-cone solid angle at every hull vertex, measured with the
    metric at the vertex."""
    Nf = _facet_tangent_normals(space, hull)
    X = hull.points[hull.vertices]
    Lc = _frames(space, X)
    # incident facets of each hull vertex, padded to the largest valence
    slot = np.full(len(hull.points), -1)
    slot[hull.vertices] = np.arange(len(hull.vertices))
    vs = slot[hull.facets.ravel()]
    fs = np.repeat(np.arange(len(hull.facets)), 3)
    order = np.argsort(vs, kind="stable")
    vs, fs = vs[order], fs[order]
    cnt = np.bincount(vs, minlength=len(hull.vertices))
    start = np.concatenate([[0], np.cumsum(cnt)[:-1]])
    pos = np.arange(len(vs)) - start[vs]
    inc = np.zeros((len(hull.vertices), cnt.max()), int)
    mask = np.zeros(inc.shape, bool)
    inc[vs, pos] = fs
    mask[vs, pos] = True
    W = np.einsum("mki,mij->mkj", Nf[inc], Lc)  # L^T n for each facet (row form)
    W /= np.linalg.norm(W, axis=2, keepdims=True)
    return _polygon_areas(W, mask)


def hull_boundary_curvature(space, hull):
    """Total curvature of the hull boundary: sum of vertex normal cones."""
    if len(hull.facets) < 4:
        raise DegenerateHull("hull has fewer than 4 facets")
    return float(np.sum(vertex_normal_cones(space, hull)))


def tangent_cone_aperture(space, hull, point, rel_tol=BOUNDARY_TOL):
    """pi minus the largest angle between supporting normals at a boundary
    point; pi for a flat tangent cone."""
    k = to_linear(space, np.asarray(point, float)[None])[0]
    vals = hull.equations[:, :3] @ k + hull.equations[:, 3]
    tol = rel_tol * hull.diameter
    if np.max(vals) > tol:
        raise ValueError("point lies outside the hull")
    on = np.abs(vals) <= tol
    if not on.any():
        raise InteriorPoint("point is not on the hull boundary")
    Lc = _frames(space, np.asarray(point, float)[None])[0]
    W = _facet_tangent_normals(space, hull)[on] @ Lc
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    G = np.clip(W @ W.T, -1.0, 1.0)
    return float(np.pi - np.max(np.arccos(G)))


@dataclass
class ChainRecord:
    total_abs: float
    total_positive: float
    on_hull: float
    hull_curvature: float
    slack: float
    passed: bool

    def as_row(self):
        return {"total_abs": self.total_abs, "total_positive": self.total_positive,
                "on_hull": self.on_hull, "hull_curvature": self.hull_curvature,
                "four_pi": FOUR_PI, "passed": self.passed}


def kleiner_chain(space, surface, slack=0.005 * FOUR_PI):
    """Total absolute >= total positive >= curvature of the hull boundary
    >= 4 pi, with the positive curvature of the surface part on the hull
    reported alongside."""
    vc = vertex_curvature(space, surface)
    rep = curvature_report(space, surface, vc)
    hull = convex_hull(space, surface.vertices)
    G0 = hull_boundary_curvature(space, hull)
    on = _near_boundary(hull, BOUNDARY_TOL * hull.diameter) & vc.valid & (vc.gk > GK_DEADBAND)
    on_hull = float(np.sum(vc.weights[on] * vc.gk[on]))
    ok = (rep.total_abs >= rep.total_positive - slack
          and rep.total_positive >= G0 - slack
          and G0 >= FOUR_PI - slack)
    return ChainRecord(rep.total_abs, rep.total_positive, on_hull, G0, slack, bool(ok))

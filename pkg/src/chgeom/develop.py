"""Developing a surface with flat tangent planes into E^3.

A parallel orthonormal frame (e_1, e_2, e_3) along the surface gives the
coframe theta_i = <., e_i>; integrating it along paths from a base point
gives f = (f_1, f_2, f_3), an isometric immersion into E^3.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .curves import total_curvature
from .errors import GridMismatch, NotFlatOnTangentPlanes, PathDependence
from .sampled import SampledCurve
from .spaces import Euclidean
from .surfaces import GridSurface, _plane_curvature
from .transport import transport_raw

__all__ = ["PatchFrame", "surface_frame", "develop_map", "verify_isometry",
           "verify_tau_preservation", "verify_normal_correspondence", "IsometryReport",
           "patch_flatness", "cell_circulation", "develop_closed_convex",
           "rotate_frame_column", "random_grid_paths"]

FLAT_TOL = 1e-6
PATH_TOL = 1e-5
ISO_TOL = 1e-4


@dataclass(frozen=True, eq=False)
class PatchFrame:
    """frames[i, j, a] is the chart vector e_a at grid point (i, j)."""

    frames: np.ndarray
    path_defect: float


@dataclass(frozen=True, eq=False)
class DevelopedPatch:
    """Image grid in E^3 plus the exactness check of the two path orders."""

    points: np.ndarray
    exactness: float


def _orthonormal(space, X, A):
    """Gram-Schmidt of the vector rows A at every point of X."""
    out = []
    for w in A:
        for e in out:
            w = w - space.inner(X, w, e)[..., None] * e
        out.append(w / np.sqrt(space.inner(X, w, w))[..., None])
    return out


def patch_flatness(space, patch):
    """max |K(T_p)| over the grid, from the coordinate tangent planes."""
    X = patch.points.reshape(-1, 3)
    e1, e2 = _orthonormal(space, X, [patch.du.reshape(-1, 3), patch.dv.reshape(-1, 3)])
    return float(np.max(np.abs(_plane_curvature(space, X, e1, e2))))


def _frame_mismatch_batch(space, X, A, B):
    """Operator norm of the change-of-frame matrix minus Id, per point."""
    G = K.gram_batch(space.model_id, np.ascontiguousarray(X), np.ascontiguousarray(A),
                     np.ascontiguousarray(B))
    return np.linalg.norm(G - np.eye(A.shape[1]), ord=2, axis=(1, 2))


def _transport_line(space, t, pts, ders, F0):
    nodes, _ = transport_raw(space, t, pts, ders, F0)
    return nodes


def _sweep(space, patch, F0, rows_first):
    nu, nv = patch.shape
    P, du, dv = patch.points, patch.du, patch.dv
    out = np.empty((nu, nv, 3, 3))
    if rows_first:
        out[:, 0] = _transport_line(space, patch.u, P[:, 0], du[:, 0], F0)
        for i in range(nu):
            out[i, :] = _transport_line(space, patch.v, P[i, :], dv[i, :], out[i, 0])
    else:
        out[0, :] = _transport_line(space, patch.v, P[0, :], dv[0, :], F0)
        for j in range(nv):
            out[:, j] = _transport_line(space, patch.u, P[:, j], du[:, j], out[0, j])
    return out


def base_frame(space, patch):
    x = patch.points[0, 0]
    e1, e2, e3 = _orthonormal(space, x, [patch.du[0, 0], patch.dv[0, 0], patch.normals[0, 0]])
    return np.array([e1, e2, e3])


def surface_frame(space, patch, flat_tol=FLAT_TOL, path_tol=PATH_TOL, F0=None):
    """Parallel orthonormal frame on the patch, transported along the first
    grid row and then along every column.  The path defect compares it with
    the column-then-row transport at every grid point."""
    flat = patch_flatness(space, patch)
    if flat > flat_tol:
        raise NotFlatOnTangentPlanes(f"|K(T_p)| reaches {flat:.3e} > {flat_tol:g}")
    F0 = base_frame(space, patch) if F0 is None else np.asarray(F0, float)
    A = _sweep(space, patch, F0, rows_first=True)
    B = _sweep(space, patch, F0, rows_first=False)
    X = patch.points.reshape(-1, 3)
    defect = float(np.max(_frame_mismatch_batch(space, X, A.reshape(-1, 3, 3),
                                                B.reshape(-1, 3, 3))))
    if defect > path_tol:
        raise PathDependence(f"row/column transport differ by {defect:.3e}")
    return PatchFrame(A, defect)


def coframe(space, patch, frame):
    """theta_a(dX/du) and theta_a(dX/dv) on the grid, shape (nu, nv, 3)."""
    X = patch.points.reshape(-1, 3)
    Fr = frame.frames.reshape(-1, 3, 3)
    tu = K.gram_batch(space.model_id, X, np.ascontiguousarray(patch.du.reshape(-1, 1, 3)), Fr)
    tv = K.gram_batch(space.model_id, X, np.ascontiguousarray(patch.dv.reshape(-1, 1, 3)), Fr)
    shp = patch.shape + (3,)
    return tu[:, 0].reshape(shp), tv[:, 0].reshape(shp)


def _cumtrapz(y, x, axis):
    y = np.moveaxis(y, axis, 0)
    dx = np.diff(x)[(slice(None),) + (None,) * (y.ndim - 1)]
    c = np.concatenate([np.zeros_like(y[:1]), np.cumsum(0.5 * dx * (y[1:] + y[:-1]), axis=0)])
    return np.moveaxis(c, 0, axis)


def develop_map(space, patch, frame, origin=None):
    """f(p) = integral of the coframe from the base corner: along the first
    row, then up the column (composite trapezoid).  The column-first order
    is computed as the exactness check."""
    tu, tv = coframe(space, patch, frame)
    o = np.zeros(3) if origin is None else np.asarray(origin, float)
    row0 = _cumtrapz(tu[:, 0], patch.u, 0)
    f = o + row0[:, None, :] + _cumtrapz(tv, patch.v, 1)
    col0 = _cumtrapz(tv[0, :], patch.v, 0)
    g = o + col0[None, :, :] + _cumtrapz(tu, patch.u, 0)
    diam = np.max(np.ptp(f.reshape(-1, 3), axis=0))
    return DevelopedPatch(f, float(np.max(np.abs(f - g)) / max(diam, 1e-300)))


def cell_circulation(space, patch, frame):
    """max over grid cells of |circulation of theta_i| / cell area."""
    tu, tv = coframe(space, patch, frame)
    du_ = np.diff(patch.u)[:, None, None]
    dv_ = np.diff(patch.v)[None, :, None]
    bottom = 0.5 * (tu[:-1, :-1] + tu[1:, :-1]) * du_
    top = 0.5 * (tu[:-1, 1:] + tu[1:, 1:]) * du_
    left = 0.5 * (tv[:-1, :-1] + tv[:-1, 1:]) * dv_
    right = 0.5 * (tv[1:, :-1] + tv[1:, 1:]) * dv_
    circ = bottom + right - top - left
    # cell area from the metric
    X = patch.points[:-1, :-1].reshape(-1, 3)
    a = patch.du[:-1, :-1].reshape(-1, 3)
    b = patch.dv[:-1, :-1].reshape(-1, 3)
    gaa, gbb, gab = space.inner(X, a, a), space.inner(X, b, b), space.inner(X, a, b)
    area = (np.sqrt(np.maximum(gaa * gbb - gab**2, 0)).reshape(du_.shape[0], dv_.shape[1])
            * du_[..., 0] * dv_[..., 0])
    return float(np.max(np.abs(circ) / area[..., None]))


# -- verification ------------------------------------------------------------------------

def _grad(F, x, axis):
    return np.gradient(F, x, axis=axis, edge_order=2)


@dataclass
class IsometryReport:
    first_form: float
    path_lengths: float
    tol: float = ISO_TOL

    @property
    def passed(self):
        return self.first_form <= self.tol and self.path_lengths <= self.tol

    def as_row(self):
        return {"first_form": self.first_form, "path_lengths": self.path_lengths,
                "passed": self.passed}


def _check_grid(patch, image):
    img = image.points if hasattr(image, "points") else np.asarray(image)
    if img.shape != patch.points.shape:
        raise GridMismatch(f"image grid {img.shape} vs patch grid {patch.points.shape}")
    return img


def random_grid_paths(shape, n_paths, rng, max_steps=None):
    """Random monotone staircase paths of grid nodes."""
    nu, nv = shape
    out = []
    for _ in range(n_paths):
        i0, j0 = int(rng.integers(0, nu - 1)), int(rng.integers(0, nv - 1))
        i1, j1 = int(rng.integers(i0 + 1, nu)), int(rng.integers(j0 + 1, nv))
        steps = np.array([0] * (i1 - i0) + [1] * (j1 - j0))
        rng.shuffle(steps)
        ii = i0 + np.concatenate([[0], np.cumsum(steps == 0)])
        jj = j0 + np.concatenate([[0], np.cumsum(steps == 1)])
        out.append((ii, jj))
    return out


def verify_isometry(space, patch, image, n_paths=50, seed=0, tol=ISO_TOL):
    """Relative mismatch of (i) the first fundamental form from finite
    differences of the image and (ii) lengths of random grid paths."""
    img = _check_grid(patch, image)
    fu, fv = _grad(img, patch.u, 0), _grad(img, patch.v, 1)
    X = patch.points
    E = space.inner(X, patch.du, patch.du)
    Fm = space.inner(X, patch.du, patch.dv)
    G = space.inner(X, patch.dv, patch.dv)
    scale = np.sqrt(E * G)
    ff = max(np.max(np.abs(np.einsum("...i,...i", fu, fu) - E) / scale),
             np.max(np.abs(np.einsum("...i,...i", fu, fv) - Fm) / scale),
             np.max(np.abs(np.einsum("...i,...i", fv, fv) - G) / scale))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for ii, jj in random_grid_paths(patch.shape, n_paths, rng):
        P = X[ii, jj]
        Q = img[ii, jj]
        ls = np.sum(space.distance(P[:-1], P[1:]))
        li = np.sum(np.linalg.norm(np.diff(Q, axis=0), axis=1))
        worst = max(worst, abs(li - ls) / ls)
    return IsometryReport(float(ff), float(worst), tol)


def _line_curve(space, patch, ii, jj):
    """Grid path with straight (u, v) parameter steps as a unit-speed
    sampled curve; velocity = du u' + dv v'."""
    ii, jj = np.asarray(ii), np.asarray(jj)
    lam = np.arange(len(ii), dtype=float)
    up = np.gradient(patch.u[ii], lam)
    vp = np.gradient(patch.v[jj], lam)
    X = patch.points[ii, jj]
    V = patch.du[ii, jj] * up[:, None] + patch.dv[ii, jj] * vp[:, None]
    sp = np.sqrt(space.inner(X, V, V))
    t = np.concatenate([[0.0], np.cumsum(0.5 * (sp[1:] + sp[:-1]))])
    return SampledCurve(t, X, V / sp[:, None])


def verify_tau_preservation(space, patch, image, path):
    """(tau of the grid path in the source, tau of its image in E^3)."""
    img = _check_grid(patch, image)
    ii, jj = path
    src = _line_curve(space, patch, ii, jj)
    Q = img[ii, jj]
    lam = np.arange(len(Q), dtype=float)
    D = np.gradient(Q, lam, axis=0, edge_order=2)
    sp = np.linalg.norm(D, axis=1)
    t = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(Q, axis=0), axis=1))])
    # rescale to the source parameter so both curves carry the same grid
    t = t * (src.length / t[-1])
    dst = SampledCurve(t, Q, D / sp[:, None])
    return total_curvature(space, src), total_curvature(Euclidean(3), dst)


def verify_normal_correspondence(space, patch, frame, image):
    """With nu' = sum <nu, e_i> eps_i: max of ||nu'| - 1| and of
    |<df(X), nu'>| over the unit coordinate tangents X."""
    img = _check_grid(patch, image)
    X = patch.points.reshape(-1, 3)
    Fr = np.ascontiguousarray(frame.frames.reshape(-1, 3, 3))
    nup = K.gram_batch(space.model_id, X, np.ascontiguousarray(patch.normals.reshape(-1, 1, 3)),
                       Fr)[:, 0].reshape(patch.shape + (3,))
    unit = np.max(np.abs(np.linalg.norm(nup, axis=-1) - 1))
    worst = 0.0
    for T in (_grad(img, patch.u, 0), _grad(img, patch.v, 1)):
        T = T / np.linalg.norm(T, axis=-1, keepdims=True)
        worst = max(worst, float(np.max(np.abs(np.einsum("...i,...i", T, nup)))))
    return float(max(unit, worst))


def rotate_frame_column(frame, j, angle):
    """Negative control: rotate e_1 towards e_3 by ``angle`` on grid column j."""
    F = frame.frames.copy()
    c, s = np.cos(angle), np.sin(angle)
    e1, e3 = F[:, j, 0].copy(), F[:, j, 2].copy()
    F[:, j, 0] = c * e1 + s * e3
    F[:, j, 2] = -s * e1 + c * e3
    return PatchFrame(F, frame.path_defect)


# -- closed convex surfaces over a cube-sphere atlas ---------------------------------------

_FACES = [(np.array(c, float), np.array(a, float), np.array(b, float)) for c, a, b in [
    ((0, 0, 1), (1, 0, 0), (0, 1, 0)), ((0, 0, -1), (0, 1, 0), (1, 0, 0)),
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)), ((-1, 0, 0), (0, 0, 1), (0, 1, 0)),
    ((0, 1, 0), (0, 0, 1), (1, 0, 0)), ((0, -1, 0), (1, 0, 0), (0, 0, 1))]]


def _star_chart(radius_fn, grad_fn, c, a, b, n):
    """Grid patch of the star-shaped surface {radius_fn(w) w} over one cube
    face (gnomonic coordinates in [-1, 1]^2)."""
    s = np.linspace(-1.0, 1.0, n)
    A, B = np.meshgrid(s, s, indexing="ij")
    Y = c + A[..., None] * a + B[..., None] * b
    ny = np.linalg.norm(Y, axis=-1, keepdims=True)
    W = Y / ny

    def dW(d):
        return (d - W * np.einsum("...i,i->...", W, d)[..., None]) / ny

    r = radius_fn(W)[..., None]
    gr = grad_fn(W)
    P = r * W
    Pu = r * dW(a) + np.einsum("...i,...i->...", gr, dW(a))[..., None] * W
    Pv = r * dW(b) + np.einsum("...i,...i->...", gr, dW(b))[..., None] * W
    N = np.cross(Pu, Pv)
    N /= np.linalg.norm(N, axis=-1, keepdims=True)
    return GridSurface(Euclidean(3), s, s, P, N, Pu, Pv, "cube-chart")


def develop_closed_convex(radius_fn=None, grad_fn=None, n=41):
    """Develop a closed star-shaped surface in E^3 chart by chart.

    Every chart starts from the transport of one global frame, so frames
    and images must agree on shared chart edges.  Returns (images,
    max frame mismatch, max image mismatch over shared nodes).
    """
    space = Euclidean(3)
    radius_fn = radius_fn or (lambda w: np.ones(w.shape[:-1]))
    grad_fn = grad_fn or (lambda w: np.zeros_like(w))
    charts = [_star_chart(radius_fn, grad_fn, c, a, b, n) for c, a, b in _FACES]
    # the ambient is flat, so the global parallel frame is constant
    E0 = np.eye(3)
    images, frames = [], []
    for ch in charts:
        fr = surface_frame(space, ch, F0=E0)
        # integrate from the global origin: f(p) = p - p_0 for a constant frame
        dev = develop_map(space, ch, fr, origin=ch.points[0, 0] @ E0.T)
        images.append(dev.points)
        frames.append(fr.frames)
    table = {}
    fmis, imis = 0.0, 0.0
    for k, ch in enumerate(charts):
        W = ch.points / np.linalg.norm(ch.points, axis=-1, keepdims=True)
        for i, j in zip(*np.nonzero(np.ones(ch.shape, bool))):
            if 0 < i < n - 1 and 0 < j < n - 1:
                continue
            key = tuple(np.round(W[i, j], 9))
            if key in table:
                f2, im2 = table[key]
                fmis = max(fmis, float(np.linalg.norm(frames[k][i, j] @ f2.T - np.eye(3), 2)))
                imis = max(imis, float(np.linalg.norm(images[k][i, j] - im2)))
            else:
                table[key] = (frames[k][i, j], images[k][i, j])
    return images, fmis, imis

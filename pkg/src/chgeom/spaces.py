"""Chart-based Riemannian model spaces.

Every model works in an n-dimensional chart.  Hyperbolic space uses the
spatial part ``y`` of the hyperboloid point ``(sqrt(1 + |y|^2), y)`` as its
primary chart, so chart tangent vectors are exactly the spatial parts of
Minkowski tangent vectors.  Closed forms go through those lifts.

The closed-form exponential maps only use bilinear products (never ``abs``
or ``conj``), so they accept complex arrays; :func:`exp_jacobian` relies on
that for complex-step differentiation.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels as K
from .errors import DegeneratePlane, IntegrationFailure

ODE_RTOL = 1e-10
ODE_ATOL = 1e-10
ODE_MAX_STEPS = 10**6


def _bdot(a, b):
    return np.sum(a * b, axis=-1)


def _sinhc(r):
    small = np.abs(r) < 1e-6
    rs = np.where(small, 1.0, r)
    return np.where(small, 1.0 + r * r / 6.0, np.sinh(rs) / rs)


def _sinc(r):
    small = np.abs(r) < 1e-6
    rs = np.where(small, 1.0, r)
    return np.where(small, 1.0 - r * r / 6.0, np.sin(rs) / rs)


def minkowski(X, Y):
    return -X[..., 0] * Y[..., 0] + _bdot(X[..., 1:], Y[..., 1:])


@dataclass(frozen=True)
class PointVec:
    """A chart point with an optional tangent vector at it."""

    x: np.ndarray
    v: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class ModelSpace:
    """Base class.  Subclasses supply the closed forms."""

    dim: int
    chart: str = field(init=False, default="")
    model_id: int = field(init=False, default=-1)
    is_cartan_hadamard: bool = field(init=False, default=True)
    curvature_constant: float | None = field(init=False, default=None)

    def __post_init__(self):
        pass

    # -- metric -----------------------------------------------------------
    def inner(self, x, u, v):
        raise NotImplementedError

    def norm(self, x, v):
        return np.sqrt(self.inner(x, v, v))

    def metric(self, x):
        x = np.asarray(x, float)
        E = np.eye(self.dim)
        return np.array([[self.inner(x, E[i], E[j]) for j in range(self.dim)]
                         for i in range(self.dim)])

    def christoffel(self, x):
        """Gamma[k, i, j]."""
        x = np.ascontiguousarray(x, dtype=float)
        n = self.dim
        E = np.eye(n)
        G = np.empty((n, n, n))
        tmp = np.empty(n)
        for i in range(n):
            for j in range(n):
                K.christoffel_uv(self.model_id, x, E[i], E[j], tmp)
                G[:, i, j] = tmp
        return G

    def christoffel_uv(self, x, u, v):
        out = np.empty(self.dim)
        K.christoffel_uv(self.model_id, np.ascontiguousarray(x, dtype=float),
                         np.ascontiguousarray(u, dtype=float),
                         np.ascontiguousarray(v, dtype=float), out)
        return out

    def riemann(self, x):
        """R[i, j, k, l] = <R(e_i, e_j) e_k, e_l> with
        R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z."""
        g = self.metric(x)
        c = self.curvature_constant
        return c * (np.einsum("jk,il->ijkl", g, g) - np.einsum("ik,jl->ijkl", g, g))

    def contains(self, x):
        return True

    # -- closed-form geodesics -------------------------------------------------
    def exp(self, x, v):
        raise NotImplementedError

    def log(self, x, y):
        raise NotImplementedError

    def distance(self, x, y):
        raise NotImplementedError

    def geodesic_state(self, x, u, s):
        """Point and velocity at arclength s along the geodesic with unit
        initial velocity u.  s may be an array."""
        raise NotImplementedError

    def random_point(self, rng, scale=1.0):
        return rng.normal(size=self.dim) * scale

    def orthonormal_basis(self, x, vectors=None):
        """g-orthonormal basis (rows) at x by Gram-Schmidt, optionally
        starting from the given vectors."""
        x = np.asarray(x, float)
        vecs = list(vectors) if vectors is not None else []
        vecs += list(np.eye(self.dim))
        out = []
        for v in vecs:
            w = np.array(v, float)
            for e in out:
                w = w - self.inner(x, w, e) * e
            nw = self.norm(x, w)
            if nw > 1e-8:
                out.append(w / nw)
            if len(out) == self.dim:
                break
        return np.array(out)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class Euclidean(ModelSpace):
    def __post_init__(self):
        object.__setattr__(self, "chart", "euclidean")
        object.__setattr__(self, "model_id", K.EUCLID)
        object.__setattr__(self, "curvature_constant", 0.0)

    def inner(self, x, u, v):
        return _bdot(np.asarray(u), np.asarray(v))

    def metric(self, x):
        return np.eye(self.dim)

    def christoffel(self, x):
        return np.zeros((self.dim,) * 3)

    def exp(self, x, v):
        return np.asarray(x) + np.asarray(v)

    def log(self, x, y):
        return np.asarray(y, float) - np.asarray(x, float)

    def distance(self, x, y):
        d = np.asarray(y, float) - np.asarray(x, float)
        return np.sqrt(_bdot(d, d))

    def geodesic_state(self, x, u, s):
        s = np.asarray(s, float)[..., None]
        return x + s * u, np.broadcast_to(u, s.shape[:-1] + (self.dim,)).copy()


class Hyperbolic(ModelSpace):
    """H^n, chart = spatial part of the hyperboloid."""

    def __post_init__(self):
        object.__setattr__(self, "chart", "hyperboloid")
        object.__setattr__(self, "model_id", K.HYPERBOLOID)
        object.__setattr__(self, "curvature_constant", -1.0)

    @staticmethod
    def lift(y):
        y = np.asarray(y)
        w = np.sqrt(1.0 + _bdot(y, y))
        return np.concatenate([w[..., None], y], axis=-1)

    @staticmethod
    def lift_tangent(y, v):
        y = np.asarray(y)
        v = np.asarray(v)
        w = np.sqrt(1.0 + _bdot(y, y))
        return np.concatenate([(_bdot(y, v) / w)[..., None], v], axis=-1)

    def inner(self, x, u, v):
        x, u, v = np.asarray(x), np.asarray(u), np.asarray(v)
        return _bdot(u, v) - _bdot(x, u) * _bdot(x, v) / (1.0 + _bdot(x, x))

    def metric(self, x):
        x = np.asarray(x, float)
        return np.eye(self.dim) - np.outer(x, x) / (1.0 + x @ x)

    def exp(self, x, v):
        X, V = self.lift(x), self.lift_tangent(x, v)
        r = np.sqrt(minkowski(V, V))[..., None]
        return (np.cosh(r) * X + _sinhc(r) * V)[..., 1:]

    def log(self, x, y):
        X, Y = self.lift(x), self.lift(y)
        c = -minkowski(X, Y)[..., None]
        d = self.distance(x, y)[..., None]
        U = Y - c * X
        sh = np.sinh(d)
        fac = np.where(d < 1e-12, 1.0, d / np.where(d < 1e-12, 1.0, sh))
        return (fac * U)[..., 1:]

    def distance(self, x, y):
        D = self.lift(y) - self.lift(x)
        q = np.maximum(minkowski(D, D), 0.0)
        return 2.0 * np.arcsinh(np.sqrt(q) / 2.0)

    def geodesic_state(self, x, u, s):
        X, U = self.lift(x), self.lift_tangent(x, u)
        s = np.asarray(s, float)[..., None]
        P = np.cosh(s) * X + np.sinh(s) * U
        V = np.sinh(s) * X + np.cosh(s) * U
        return P[..., 1:], V[..., 1:]

    def to_klein(self, y):
        y = np.asarray(y)
        return y / np.sqrt(1.0 + _bdot(y, y))[..., None]

    def from_klein(self, k):
        k = np.asarray(k)
        s = 1.0 - _bdot(k, k)
        if np.any(np.real(s) <= 0):
            raise ValueError("Klein point outside the unit ball")
        return k / np.sqrt(s)[..., None]


class Klein(ModelSpace):
    """H^n in Klein (projective) coordinates, |k| < 1."""

    def __post_init__(self):
        object.__setattr__(self, "chart", "klein")
        object.__setattr__(self, "model_id", K.KLEIN)
        object.__setattr__(self, "curvature_constant", -1.0)

    def _h(self):
        return Hyperbolic(self.dim)

    def contains(self, x):
        x = np.asarray(x)
        return bool(np.all(_bdot(x, x) < 1.0))

    def inner(self, x, u, v):
        x, u, v = np.asarray(x), np.asarray(u), np.asarray(v)
        s = 1.0 - _bdot(x, x)
        return _bdot(u, v) / s + _bdot(x, u) * _bdot(x, v) / (s * s)

    def metric(self, x):
        x = np.asarray(x, float)
        s = 1.0 - x @ x
        return np.eye(self.dim) / s + np.outer(x, x) / s**2

    def to_chart_tangent(self, k, v):
        """Klein tangent -> hyperboloid-chart tangent."""
        k, v = np.asarray(k), np.asarray(v)
        s = 1.0 - _bdot(k, k)
        return v / np.sqrt(s)[..., None] + k * (_bdot(k, v) / s**1.5)[..., None]

    def from_chart_tangent(self, y, w):
        y, w = np.asarray(y), np.asarray(w)
        q = np.sqrt(1.0 + _bdot(y, y))[..., None]
        return w / q - y * (_bdot(y, w)[..., None] / q**3)

    def exp(self, x, v):
        h = self._h()
        y = h.from_klein(x)
        return h.to_klein(h.exp(y, self.to_chart_tangent(x, v)))

    def log(self, x, y):
        h = self._h()
        a, b = h.from_klein(x), h.from_klein(y)
        return self.from_chart_tangent(a, h.log(a, b))

    def distance(self, x, y):
        h = self._h()
        return h.distance(h.from_klein(x), h.from_klein(y))

    def geodesic_state(self, x, u, s):
        h = self._h()
        y = h.from_klein(x)
        P, V = h.geodesic_state(y, self.to_chart_tangent(x, u), s)
        return h.to_klein(P), self.from_chart_tangent(P, V)

    def random_point(self, rng, scale=1.0):
        y = rng.normal(size=self.dim) * scale
        return Hyperbolic(self.dim).to_klein(y)


class ProductH2R(ModelSpace):
    """H^2 x R, coordinates (y1, y2, z) with hyperboloid chart on (y1, y2)."""

    def __init__(self, dim=3):
        if dim != 3:
            raise ValueError("H2 x R is three-dimensional")
        object.__setattr__(self, "dim", 3)
        self.__post_init__()

    def __post_init__(self):
        object.__setattr__(self, "chart", "product_h2_r")
        object.__setattr__(self, "model_id", K.PRODUCT)
        object.__setattr__(self, "curvature_constant", None)

    _h2 = Hyperbolic(2)

    def inner(self, x, u, v):
        x, u, v = np.asarray(x), np.asarray(u), np.asarray(v)
        return self._h2.inner(x[..., :2], u[..., :2], v[..., :2]) + u[..., 2] * v[..., 2]

    def metric(self, x):
        g = np.zeros((3, 3))
        g[:2, :2] = self._h2.metric(np.asarray(x, float)[:2])
        g[2, 2] = 1.0
        return g

    def riemann(self, x):
        R = np.zeros((3,) * 4)
        R[:2, :2, :2, :2] = self._h2.riemann(np.asarray(x, float)[:2])
        return R

    def exp(self, x, v):
        x, v = np.asarray(x), np.asarray(v)
        a = self._h2.exp(x[..., :2], v[..., :2])
        return np.concatenate([a, (x[..., 2] + v[..., 2])[..., None]], axis=-1)

    def log(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        a = self._h2.log(x[..., :2], y[..., :2])
        return np.concatenate([a, (y[..., 2] - x[..., 2])[..., None]], axis=-1)

    def distance(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        dh = self._h2.distance(x[..., :2], y[..., :2])
        return np.sqrt(dh**2 + (y[..., 2] - x[..., 2]) ** 2)

    def geodesic_state(self, x, u, s):
        x, u = np.asarray(x, float), np.asarray(u, float)
        s = np.asarray(s, float)
        a = np.sqrt(max(self._h2.inner(x[:2], u[:2], u[:2]), 0.0))
        if a > 0:
            P, V = self._h2.geodesic_state(x[:2], u[:2] / a, a * s)
            V = V * a
        else:
            P = np.broadcast_to(x[:2], s.shape + (2,)).copy()
            V = np.zeros(s.shape + (2,))
        z = x[2] + u[2] * s
        return (np.concatenate([P, z[..., None]], axis=-1),
                np.concatenate([V, np.full(s.shape + (1,), u[2])], axis=-1))


class SphereFixture(ModelSpace):
    """Round unit sphere in stereographic coordinates from the north pole.
    Positive curvature: a negative control only."""

    def __post_init__(self):
        object.__setattr__(self, "chart", "sphere_fixture")
        object.__setattr__(self, "model_id", K.SPHERE)
        object.__setattr__(self, "is_cartan_hadamard", False)
        object.__setattr__(self, "curvature_constant", 1.0)

    @staticmethod
    def lift(x):
        x = np.asarray(x)
        s = _bdot(x, x)[..., None]
        return np.concatenate([2 * x, s - 1.0], axis=-1) / (s + 1.0)

    @staticmethod
    def lift_tangent(x, v):
        x, v = np.asarray(x), np.asarray(v)
        s = _bdot(x, x)[..., None]
        xv = _bdot(x, v)[..., None]
        head = (2 * v * (1 + s) - 4 * x * xv) / (1 + s) ** 2
        tail = 4 * xv / (1 + s) ** 2
        return np.concatenate([head, tail], axis=-1)

    @staticmethod
    def unlift(X):
        return X[..., :-1] / (1.0 - X[..., -1:])

    @staticmethod
    def unlift_tangent(X, V):
        d = 1.0 - X[..., -1:]
        return V[..., :-1] / d + X[..., :-1] * V[..., -1:] / d**2

    def inner(self, x, u, v):
        x, u, v = np.asarray(x), np.asarray(u), np.asarray(v)
        c = 2.0 / (1.0 + _bdot(x, x))
        return c * c * _bdot(u, v)

    def exp(self, x, v):
        X, V = self.lift(x), self.lift_tangent(x, v)
        r = np.sqrt(_bdot(V, V))[..., None]
        return self.unlift(np.cos(r) * X + _sinc(r) * V)

    def distance(self, x, y):
        D = self.lift(y) - self.lift(x)
        return 2.0 * np.arcsin(np.clip(np.sqrt(_bdot(D, D)) / 2.0, 0.0, 1.0))

    def log(self, x, y):
        X, Y = self.lift(x), self.lift(y)
        c = _bdot(X, Y)[..., None]
        d = self.distance(x, y)[..., None]
        U = Y - c * X
        fac = np.where(d < 1e-12, 1.0, d / np.where(d < 1e-12, 1.0, np.sin(d)))
        return self.unlift_tangent(X, fac * U)

    def geodesic_state(self, x, u, s):
        X, U = self.lift(x), self.lift_tangent(x, u)
        s = np.asarray(s, float)[..., None]
        P = np.cos(s) * X + np.sin(s) * U
        V = -np.sin(s) * X + np.cos(s) * U
        return self.unlift(P), self.unlift_tangent(P, V)


def make_space(tag, dim=3):
    """Build a model space from its chart tag."""
    tag = tag.lower()
    if tag == "euclidean":
        return Euclidean(dim)
    if tag in ("hyperboloid", "hyperbolic"):
        return Hyperbolic(dim)
    if tag == "klein":
        return Klein(dim)
    if tag == "product_h2_r":
        return ProductH2R()
    if tag in ("sphere_fixture", "sphere"):
        return SphereFixture(dim)
    raise ValueError(f"unknown model space {tag!r}")


# -- operations ---------------------------------------------------------------

def sectional_curvature(space, p, u, v):
    """Sectional curvature of span(u, v) at p."""
    p = np.asarray(p, float)
    guu, gvv, guv = space.inner(p, u, u), space.inner(p, v, v), space.inner(p, u, v)
    area2 = guu * gvv - guv * guv
    if area2 < 1e-12:
        raise DegeneratePlane(f"plane is degenerate (|u^v|^2 = {area2:.3e})")
    R = space.riemann(p)
    return np.einsum("ijkl,i,j,k,l->", R, u, v, v, u) / area2


def exp_map(space, p, v):
    return space.exp(np.asarray(p, float), np.asarray(v, float))


def log_map(space, p, q):
    return space.log(np.asarray(p, float), np.asarray(q, float))


def distance(space, p, q):
    return space.distance(np.asarray(p, float), np.asarray(q, float))


def geodesic(space, p, q, m):
    """Unit-speed geodesic from p to q sampled at m points."""
    from .curves import SampledCurve

    p, q = np.asarray(p, float), np.asarray(q, float)
    v = space.log(p, q)
    L = float(space.norm(p, v))
    if L == 0.0:
        raise ValueError("coincident endpoints")
    t = np.linspace(0.0, L, m)
    P, V = space.geodesic_state(p, v / L, t)
    P[-1] = q
    return SampledCurve(t, P, V)


def integrate_geodesic(space, p, v, t_end=1.0, t_eval=None):
    """Solve x'' + Gamma(x', x') = 0 with an adaptive Dormand-Prince
    integrator.  Returns (t, x, xdot)."""
    p, v = np.asarray(p, float), np.asarray(v, float)
    n = space.dim

    def rhs(_, s):
        x, xd = s[:n], s[n:]
        return np.concatenate([xd, -space.christoffel_uv(x, xd, xd)])

    sol = solve_ivp(rhs, (0.0, t_end), np.concatenate([p, v]), method="DOP853",
                    rtol=ODE_RTOL, atol=ODE_ATOL, t_eval=t_eval)
    if not sol.success:
        raise IntegrationFailure(sol.message)
    # DOP853 uses 12 evaluations per step
    if sol.nfev > 12 * ODE_MAX_STEPS:
        raise IntegrationFailure("step budget exhausted")
    return sol.t, sol.y[:n].T, sol.y[n:].T


def christoffel_fd(space, x, h=1e-4):
    """Christoffel symbols from central differences of the metric."""
    x = np.asarray(x, float)
    n = space.dim
    dg = np.empty((n, n, n))  # dg[l, i, j] = d_l g_ij
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        dg[l] = (space.metric(x + e) - space.metric(x - e)) / (2 * h)
    ginv = np.linalg.inv(space.metric(x))
    low = 0.5 * (np.einsum("ilj->lij", dg) + np.einsum("jli->lij", dg) - dg)
    return np.einsum("kl,lij->kij", ginv, low)


def riemann_fd(space, x, h=1e-4):
    """Riemann tensor R[i,j,k,l] from central differences of the closed-form
    Christoffel symbols (independent of the closed-form curvature)."""
    x = np.asarray(x, float)
    n = space.dim
    G = space.christoffel(x)
    dG = np.empty((n, n, n, n))  # dG[i, l, j, k] = d_i Gamma^l_jk
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        dG[i] = (space.christoffel(x + e) - space.christoffel(x - e)) / (2 * h)
    # R^l_{ijk} = d_i G^l_jk - d_j G^l_ik + G^l_im G^m_jk - G^l_jm G^m_ik
    Rup = (np.einsum("iljk->ijkl", dG) - np.einsum("jlik->ijkl", dG)
           + np.einsum("lim,mjk->ijkl", G, G) - np.einsum("ljm,mik->ijkl", G, G))
    return np.einsum("ijkm,ml->ijkl", Rup, space.metric(x))


def exp_jacobian(space, p, v):
    """d(exp_p)_v as an n x n matrix, by complex-step differentiation."""
    p, v = np.asarray(p, float), np.asarray(v, float)
    n = space.dim
    h = 1e-30
    J = np.empty((n, n))
    for j in range(n):
        dv = np.zeros(n, complex)
        dv[j] = 1j * h
        J[:, j] = np.imag(space.exp(p.astype(complex), v + dv)) / h
    return J


def normal_coordinate_metric(space, o, x, basis=None):
    """Metric of normal coordinates centred at o, evaluated at x (given in a
    g_o-orthonormal basis).  Returns (g_normal, basis, R_normal) where
    R_normal is the curvature tensor at o in the same basis."""
    o = np.asarray(o, float)
    E = space.orthonormal_basis(o) if basis is None else np.asarray(basis)
    v = E.T @ np.asarray(x, float)
    J = exp_jacobian(space, o, v) @ E.T
    q = space.exp(o, v)
    g = J.T @ space.metric(q) @ J
    R = np.einsum("ijkl,ai,bj,ck,dl->abcd", space.riemann(o), E, E, E, E)
    return g, E, R

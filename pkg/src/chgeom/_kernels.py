"""Hot loops: metric contractions, Christoffel contractions and Hermite-curve
parallel transport.  Compiled with numba unless CHGEOM_PURE_NUMPY is set.

Models are dispatched on an integer id so one compiled kernel serves all
charts.
"""

import numpy as np

from ._accel import jit

EUCLID = 0
HYPERBOLOID = 1
KLEIN = 2
PRODUCT = 3
SPHERE = 4


@jit
def _dot(u, v, n):
    s = 0.0
    for i in range(n):
        s += u[i] * v[i]
    return s


@jit
def metric_inner(mid, x, u, v):
    n = x.shape[0]
    if mid == EUCLID:
        return _dot(u, v, n)
    if mid == HYPERBOLOID:
        return _dot(u, v, n) - _dot(x, u, n) * _dot(x, v, n) / (1.0 + _dot(x, x, n))
    if mid == KLEIN:
        s = 1.0 - _dot(x, x, n)
        return _dot(u, v, n) / s + _dot(x, u, n) * _dot(x, v, n) / (s * s)
    if mid == PRODUCT:
        h = _dot(u, v, 2) - _dot(x, u, 2) * _dot(x, v, 2) / (1.0 + _dot(x, x, 2))
        return h + u[2] * v[2]
    # SPHERE, stereographic
    c = 2.0 / (1.0 + _dot(x, x, n))
    return c * c * _dot(u, v, n)


@jit
def christoffel_uv(mid, x, u, v, out):
    """out[k] = Gamma^k_ij u^i v^j at chart point x."""
    n = x.shape[0]
    if mid == EUCLID:
        for k in range(n):
            out[k] = 0.0
    elif mid == HYPERBOLOID:
        g = _dot(u, v, n) - _dot(x, u, n) * _dot(x, v, n) / (1.0 + _dot(x, x, n))
        for k in range(n):
            out[k] = -x[k] * g
    elif mid == KLEIN:
        s = 1.0 - _dot(x, x, n)
        xu = _dot(x, u, n)
        xv = _dot(x, v, n)
        for k in range(n):
            out[k] = (xu * v[k] + xv * u[k]) / s
    elif mid == PRODUCT:
        g = _dot(u, v, 2) - _dot(x, u, 2) * _dot(x, v, 2) / (1.0 + _dot(x, x, 2))
        out[0] = -x[0] * g
        out[1] = -x[1] * g
        out[2] = 0.0
    else:
        # conformal factor exp(2 phi), phi = log 2 - log(1 + |x|^2)
        s = 1.0 + _dot(x, x, n)
        uv = _dot(u, v, n)
        ud = -2.0 * _dot(x, u, n) / s
        vd = -2.0 * _dot(x, v, n) / s
        for k in range(n):
            out[k] = u[k] * vd + v[k] * ud - uv * (-2.0 * x[k] / s)


@jit
def _hermite(p0, p1, d0, d1, dt, tau, pos, vel):
    t2 = tau * tau
    t3 = t2 * tau
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + tau
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    g00 = 6 * t2 - 6 * tau
    g10 = 3 * t2 - 4 * tau + 1
    g01 = -6 * t2 + 6 * tau
    g11 = 3 * t2 - 2 * tau
    for i in range(p0.shape[0]):
        pos[i] = h00 * p0[i] + h10 * dt * d0[i] + h01 * p1[i] + h11 * dt * d1[i]
        vel[i] = (g00 * p0[i] + g10 * dt * d0[i] + g01 * p1[i] + g11 * dt * d1[i]) / dt


@jit
def _rhs(mid, x, xd, V, out, tmp):
    for a in range(V.shape[0]):
        christoffel_uv(mid, x, xd, V[a], tmp)
        for k in range(V.shape[1]):
            out[a, k] = -tmp[k]


@jit
def transport_nodes(mid, ts, pts, ders, V0, nsub):
    """Parallel transport of the rows of V0 along the cubic Hermite curve
    through (ts, pts, ders).

    Returns the transported vectors at every node, shape (m, k, n), and the
    per-interval trapezoid integrals of g(x', V_a) over the RK4 substep
    nodes, shape (m - 1, k).  Zero-length intervals (corners) are skipped.
    """
    m = ts.shape[0]
    k, n = V0.shape
    out = np.empty((m, k, n))
    cof = np.zeros((m - 1, k))
    V = V0.copy()
    out[0] = V
    x = np.empty(n)
    xd = np.empty(n)
    tmp = np.empty(n)
    k1 = np.empty((k, n))
    k2 = np.empty((k, n))
    k3 = np.empty((k, n))
    k4 = np.empty((k, n))
    W = np.empty((k, n))
    for j in range(m - 1):
        dt = ts[j + 1] - ts[j]
        if dt <= 0.0:
            out[j + 1] = V
            continue
        p0 = pts[j]
        p1 = pts[j + 1]
        d0 = ders[j]
        d1 = ders[j + 1]
        h = 1.0 / nsub
        _hermite(p0, p1, d0, d1, dt, 0.0, x, xd)
        f_prev = np.empty(k)
        for a in range(k):
            f_prev[a] = metric_inner(mid, x, xd, V[a])
        for s in range(nsub):
            tau = s * h
            _hermite(p0, p1, d0, d1, dt, tau, x, xd)
            _rhs(mid, x, xd, V, k1, tmp)
            _hermite(p0, p1, d0, d1, dt, tau + 0.5 * h, x, xd)
            for a in range(k):
                for i in range(n):
                    W[a, i] = V[a, i] + 0.5 * h * dt * k1[a, i]
            _rhs(mid, x, xd, W, k2, tmp)
            for a in range(k):
                for i in range(n):
                    W[a, i] = V[a, i] + 0.5 * h * dt * k2[a, i]
            _rhs(mid, x, xd, W, k3, tmp)
            _hermite(p0, p1, d0, d1, dt, tau + h, x, xd)
            for a in range(k):
                for i in range(n):
                    W[a, i] = V[a, i] + h * dt * k3[a, i]
            _rhs(mid, x, xd, W, k4, tmp)
            for a in range(k):
                for i in range(n):
                    V[a, i] += h * dt * (k1[a, i] + 2 * k2[a, i] + 2 * k3[a, i] + k4[a, i]) / 6.0
            for a in range(k):
                f_new = metric_inner(mid, x, xd, V[a])
                cof[j, a] += 0.5 * h * dt * (f_prev[a] + f_new)
                f_prev[a] = f_new
        out[j + 1] = V
    return out, cof


@jit
def gram_batch(mid, pts, A, B):
    """G[j, a, b] = g_{pts[j]}(A[j, a], B[j, b])."""
    m = pts.shape[0]
    ka = A.shape[1]
    kb = B.shape[1]
    G = np.empty((m, ka, kb))
    for j in range(m):
        for a in range(ka):
            for b in range(kb):
                G[j, a, b] = metric_inner(mid, pts[j], A[j, a], B[j, b])
    return G


@jit
def christoffel_batch(mid, pts, U, V):
    m, n = pts.shape
    out = np.empty((m, n))
    tmp = np.empty(n)
    for j in range(m):
        christoffel_uv(mid, pts[j], U[j], V[j], tmp)
        for i in range(n):
            out[j, i] = tmp[i]
    return out

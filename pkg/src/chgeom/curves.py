"""Curve calculus: total curvature, geodesic curvature and chord-length
expansions, plus the standard curve fixtures."""

import numpy as np
from scipy.integrate import solve_ivp

from . import _kernels as K
from .errors import BoundaryParameter, NegativeFitCoefficient, RadiusTooLarge
from .sampled import SampledCurve
from .spaces import Euclidean, Hyperbolic, geodesic
from .transport import propagate_frame

__all__ = [
    "SampledCurve", "total_curvature", "indicatrix", "cumulative_curvature",
    "geodesic_curvature", "curvature_profile", "two_point_defect",
    "chord_curvature_fit", "uniform_chord_bound_check", "default_h_grid",
    "euclidean_circle", "hyperbolic_circle", "geodesic_triangle", "triangle_angles",
    "frenet_curve",
]


def _sphere_angle(a, b):
    d = np.linalg.norm(b - a, axis=-1)
    return 2.0 * np.arcsin(np.clip(d / 2.0, 0.0, 1.0))


def indicatrix(space, curve):
    """Unit tangents transported back to the start point, expressed in a
    g-orthonormal basis there.  Shape (m, n)."""
    frame = propagate_frame(space, curve)
    # coordinates of v_j in the parallel orthonormal frame at sample j
    C = K.gram_batch(space.model_id, curve.points, curve.velocities[:, None, :],
                     frame.frames)[:, 0, :]
    return C / np.linalg.norm(C, axis=1, keepdims=True)


def cumulative_curvature(space, curve):
    """tau(gamma|[t_0, t_j]) for every sample j."""
    C = indicatrix(space, curve)
    return np.concatenate([[0.0], np.cumsum(_sphere_angle(C[:-1], C[1:]))])


def total_curvature(space, curve, sub=None):
    """Length of the transported-tangent indicatrix over ``sub``."""
    if sub is not None:
        a, b = sub
        if a < curve.t[0] - 1e-12 or b > curve.t[-1] + 1e-12 or a > b:
            raise ValueError(f"interval {sub} not inside the parameter range")
        curve = curve.restrict(max(a, curve.t[0]), min(b, curve.t[-1]))
    return float(cumulative_curvature(space, curve)[-1])


def _grid_step(curve, t):
    j = min(max(int(np.searchsorted(curve.t, t)) - 1, 0), curve.m - 2)
    return curve.t[j + 1] - curve.t[j]


def geodesic_curvature(space, curve, t):
    """|nabla_{gamma'} gamma'| at t from a five-point covariant stencil."""
    h = _grid_step(curve, t)
    if t - 2 * h < curve.t[0] - 1e-12 or t + 2 * h > curve.t[-1] + 1e-12:
        raise BoundaryParameter(f"t={t} is within the stencil of an endpoint")
    x, v = curve.evaluate(t)
    vs = [curve.evaluate(t + k * h)[1] for k in (-2, -1, 1, 2)]
    acc = (vs[0] - 8 * vs[1] + 8 * vs[2] - vs[3]) / (12 * h)
    cov = acc + space.christoffel_uv(x, v, v)
    return float(np.sqrt(space.inner(x, cov, cov)))


def curvature_profile(space, curve):
    """kappa at interior samples j = 2..m-3 of a uniform grid."""
    h = np.diff(curve.t).mean()
    V = curve.velocities
    acc = (V[:-4] - 8 * V[1:-3] + 8 * V[3:-1] - V[4:]) / (12 * h)
    X, Vm = curve.points[2:-2], np.ascontiguousarray(V[2:-2])
    cov = acc + K.christoffel_batch(space.model_id, X, Vm, Vm)
    return curve.t[2:-2], np.sqrt(space.inner(X, cov, cov))


def two_point_defect(space, o, a, b, radius=0.5):
    """(measured, predicted) for |exp_o(a) exp_o(b)|^2 - |a - b|^2 against
    -(1/3) R(a, b, b, a)."""
    o, a, b = (np.asarray(z, float) for z in (o, a, b))
    rho = float(space.norm(o, a) + space.norm(o, b))
    if rho > radius:
        raise RadiusTooLarge(f"|a| + |b| = {rho:.3g} exceeds {radius}")
    d = space.distance(space.exp(o, a), space.exp(o, b))
    measured = float(d * d - space.inner(o, a - b, a - b))
    R = space.riemann(o)
    predicted = float(-np.einsum("ijkl,i,j,k,l->", R, a, b, b, a) / 3.0)
    return measured, predicted


def default_h_grid(length, lo=1e-3, hi=5e-2, num=12):
    return np.geomspace(lo, hi, num) * length


def _chords(space, curve, t, hs):
    P = curve.points_at(np.concatenate([t - hs, t + hs]))
    k = len(hs)
    return space.distance(P[:k], P[k:])


def chord_curvature_fit(space, curve, t, h_grid=None, return_coeff=False):
    """kappa estimate from 2h - chord(h) = (kappa^2 / 3) h^3 + O(h^5).

    The residual is scaled by 1/h^3 and fitted as c + d h^2, which removes
    the leading bias of the o(h^3) remainder.
    """
    hs = default_h_grid(curve.length) if h_grid is None else np.asarray(h_grid, float)
    if t - hs.max() < curve.t[0] - 1e-12 or t + hs.max() > curve.t[-1] + 1e-12:
        raise BoundaryParameter(f"t={t} +- {hs.max():.3g} leaves the curve")
    y = (2 * hs - _chords(space, curve, t, hs)) / hs**3
    A = np.column_stack([np.ones_like(hs), hs**2])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    c = coef[0]
    resid = y - A @ coef
    dof = max(len(hs) - 2, 1)
    stderr = np.sqrt(np.sum(resid**2) / dof * np.linalg.inv(A.T @ A)[0, 0])
    # absolute floor: float rounding of chord(h) relative to h^3 at the smallest h
    floor = 1e-12 * hs.max() / hs.min() ** 3
    if c < -(3 * stderr + floor):
        raise NegativeFitCoefficient(f"cubic coefficient {c:.3e} (stderr {stderr:.1e})")
    kappa = float(np.sqrt(3 * max(c, 0.0)))
    return (kappa, float(c)) if return_coeff else kappa


def uniform_chord_bound_check(space, curve, n_t=64, h_grid=None):
    """Smallest C with chord(t, h) >= 2h - C h^3 over a (t, h) grid.

    Returns (C, h0, violations) where violations counts grid pairs whose
    chord exceeds the arclength 2h (a metric-consistency failure).
    """
    L = curve.length
    hs = np.geomspace(2e-2, 1e-1, 8) * L if h_grid is None else np.asarray(h_grid, float)
    h0 = float(hs.max())
    ts = np.linspace(curve.t[0] + h0, curve.t[-1] - h0, n_t)
    C, violations = 0.0, 0
    for t in ts:
        ch = _chords(space, curve, t, hs)
        C = max(C, float(np.max((2 * hs - ch) / hs**3)))
        violations += int(np.sum(ch > 2 * hs * (1 + 1e-12) + 1e-14))
    return C, h0, violations


# -- fixtures -------------------------------------------------------------------

def euclidean_circle(radius=1.0, m=2001, turns=1.0, dim=2):
    L = 2 * np.pi * radius * turns
    t = np.linspace(0.0, L, m)
    phi = t / radius
    P = np.zeros((m, dim))
    V = np.zeros((m, dim))
    P[:, 0], P[:, 1] = radius * np.cos(phi), radius * np.sin(phi)
    V[:, 0], V[:, 1] = -np.sin(phi), np.cos(phi)
    return SampledCurve(t, P, V)


def hyperbolic_circle(radius=1.0, m=2001, arc_length=None, dim=2):
    """Circle of geodesic radius r about the chart origin of H^dim, unit
    speed; curvature coth(r)."""
    sr = np.sinh(radius)
    L = 2 * np.pi * sr if arc_length is None else arc_length
    t = np.linspace(0.0, L, m)
    phi = t / sr
    P = np.zeros((m, dim))
    V = np.zeros((m, dim))
    P[:, 0], P[:, 1] = sr * np.cos(phi), sr * np.sin(phi)
    V[:, 0], V[:, 1] = -np.sin(phi), np.cos(phi)
    return SampledCurve(t, P, V)


def geodesic_triangle(space, A, B, C, m_side=400):
    """Closed loop A -> B -> C -> A of geodesic sides (corners repeated)."""
    return (geodesic(space, A, B, m_side).concat(geodesic(space, B, C, m_side))
            .concat(geodesic(space, C, A, m_side)))


def triangle_angles(space, A, B, C):
    def ang(p, q, r):
        u, v = space.log(p, q), space.log(p, r)
        c = space.inner(p, u, v) / (space.norm(p, u) * space.norm(p, v))
        return float(np.arccos(np.clip(c, -1, 1)))
    return ang(A, B, C), ang(B, C, A), ang(C, A, B)


def frenet_curve(space, kappa, torsion=None, length=1.0, m=1001, frame=None, x0=None):
    """Integrate the Frenet equations in E^n or H^n (n = 2, 3).

    kappa, torsion: callables of arclength.  In H^n the state lives on the
    hyperboloid: X' = T, T' = X + kappa N, N' = -kappa T + tau B, B' = -tau N.
    """
    n = space.dim
    hyp = isinstance(space, Hyperbolic)
    if not (hyp or isinstance(space, Euclidean)) or n not in (2, 3):
        raise ValueError("frenet_curve supports E^2, E^3, H^2, H^3")
    torsion = torsion or (lambda s: 0.0)
    N = n + 1 if hyp else n
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, float)
    if frame is None:
        frame = np.eye(n)
    if hyp:
        X0 = Hyperbolic.lift(x0)
        F0 = [Hyperbolic.lift_tangent(x0, e) for e in frame]
    else:
        X0, F0 = x0, [np.asarray(e, float) for e in frame]

    def rhs(s, y):
        X, T, Nv = y[:N], y[N:2 * N], y[2 * N:3 * N]
        k = kappa(s)
        dX = T
        dT = k * Nv + (X if hyp else 0.0)
        if n == 3:
            B = y[3 * N:]
            tt = torsion(s)
            return np.concatenate([dX, dT, -k * T + tt * B, -tt * Nv])
        return np.concatenate([dX, dT, -k * T])

    y0 = np.concatenate([X0] + F0[:n])
    t = np.linspace(0.0, length, m)
    sol = solve_ivp(rhs, (0, length), y0, method="DOP853", t_eval=t, rtol=1e-12, atol=1e-13)
    X, T = sol.y[:N].T, sol.y[N:2 * N].T
    if hyp:
        X, T = X[:, 1:], T[:, 1:]
    return SampledCurve(t, X, T)

"""Parallel transport along sampled curves, loop holonomy and parallel
orthonormal frames."""

import logging
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .errors import NonUnitSpeedCurve, OpenLoop

log = logging.getLogger(__name__)

DRIFT_TOL = 1e-9
SPEED_TOL = 1e-6
DEFAULT_NSUB = 4


@dataclass(frozen=True, eq=False)
class FrameField:
    """frames[j, i] is the chart vector e_i at sample j."""

    points: np.ndarray
    frames: np.ndarray
    correction: float = 0.0

    def gram_defect(self, space):
        G = K.gram_batch(space.model_id, self.points, self.frames, self.frames)
        return float(np.max(np.abs(G - np.eye(self.frames.shape[1]))))


def check_unit_speed(space, curve, tol=SPEED_TOL):
    sp = curve.speeds(space)
    if np.max(np.abs(sp - sp.mean())) > tol:
        raise NonUnitSpeedCurve(f"speed varies by {np.ptp(sp):.3e}")


def transport_raw(space, t, points, ders, vectors, nsub=DEFAULT_NSUB):
    """Kernel call for an arbitrary Hermite-parametrized path.  Returns
    (vectors at every node, per-interval coframe integrals)."""
    V0 = np.ascontiguousarray(np.atleast_2d(vectors), dtype=float)
    return K.transport_nodes(space.model_id, np.ascontiguousarray(t, dtype=float),
                             np.ascontiguousarray(points, dtype=float),
                             np.ascontiguousarray(ders, dtype=float), V0, int(nsub))


def _restore_gram(space, x, V, G0):
    """Re-orthonormalize V against the Gram matrix G0 if it drifted.
    Returns (V, applied correction)."""
    G = K.gram_batch(space.model_id, x[None], V[None], V[None])[0]
    drift = float(np.max(np.abs(G - G0)))
    if drift <= DRIFT_TOL:
        return V, 0.0
    # symmetric (Lowdin) correction: V <- (G0^{1/2} G^{-1/2}) V
    w, Q = np.linalg.eigh(G)
    w0, Q0 = np.linalg.eigh(G0)
    Ginv_half = Q @ np.diag(w ** -0.5) @ Q.T
    G0_half = Q0 @ np.diag(np.sqrt(np.maximum(w0, 0))) @ Q0.T
    Vc = G0_half @ Ginv_half @ V
    corr = float(np.max(np.abs(Vc - V)))
    log.info("transport drift %.3e corrected by %.3e", drift, corr)
    return Vc, corr


def transport_vectors(space, curve, vectors, nsub=DEFAULT_NSUB, check_speed=True):
    """Transport several vectors; returns (node values (m, k, n), correction)."""
    if check_speed:
        check_unit_speed(space, curve)
    V0 = np.atleast_2d(np.asarray(vectors, float))
    nodes, _ = transport_raw(space, curve.t, curve.points, curve.velocities, V0, nsub)
    G0 = K.gram_batch(space.model_id, curve.points[:1], V0[None], V0[None])[0]
    end, corr = _restore_gram(space, curve.points[-1], nodes[-1], G0)
    nodes[-1] = end
    return nodes, corr


def parallel_transport(space, curve, v0, nsub=DEFAULT_NSUB):
    """Transport v0 from the start of ``curve`` to its end."""
    nodes, _ = transport_vectors(space, curve, v0, nsub)
    return nodes[-1, 0]


def propagate_frame(space, curve, initial_frame=None, nsub=DEFAULT_NSUB):
    """Parallel orthonormal frame along the curve."""
    if initial_frame is None:
        initial_frame = space.orthonormal_basis(curve.points[0])
    nodes, corr = transport_vectors(space, curve, initial_frame, nsub)
    return FrameField(curve.points, nodes, corr)


def loop_matrix(space, loop, nsub=DEFAULT_NSUB, basis=None):
    """Holonomy of the loop as a matrix in a g-orthonormal basis at the
    basepoint: P[a, b] = g(E_a, T(E_b))."""
    if not loop.is_closed():
        gap = float(np.max(np.abs(loop.points[-1] - loop.points[0])))
        raise OpenLoop(f"loop endpoints differ by {gap:.3e}")
    E = space.orthonormal_basis(loop.points[0]) if basis is None else basis
    nodes, _ = transport_vectors(space, loop, E, nsub)
    TE = nodes[-1]
    x0 = loop.points[0]
    return np.array([[space.inner(x0, E[a], TE[b]) for b in range(len(E))]
                     for a in range(len(E))])


def holonomy_defect(space, loop, nsub=DEFAULT_NSUB):
    """Operator norm |P_loop - Id| on the tangent space at the basepoint."""
    P = loop_matrix(space, loop, nsub)
    return float(np.linalg.norm(P - np.eye(P.shape[0]), 2))


def rotation_angle(space, loop, nsub=DEFAULT_NSUB):
    """Largest rotation angle of the loop holonomy."""
    P = loop_matrix(space, loop, nsub)
    ev = np.linalg.eigvals(P)
    return float(np.max(np.abs(np.angle(ev))))


def frame_mismatch(space, x, F1, F2):
    """Operator norm of the map taking orthonormal frame F1 to F2 minus Id."""
    M = np.array([[space.inner(x, F1[a], F2[b]) for b in range(len(F2))]
                  for a in range(len(F1))])
    return float(np.linalg.norm(M - np.eye(len(F1)), 2))


def covariant_residual(space, curve, frame):
    """max |nabla_{gamma'} e_i| at interior samples, from five-point
    differences of the stored frame (uniform grids only)."""
    t = curve.t
    h = np.diff(t)
    if np.ptp(h) > 1e-9 * h.mean():
        raise ValueError("covariant_residual needs a uniform grid")
    h = h.mean()
    F = frame.frames
    D = (-F[4:] + 8 * F[3:-1] - 8 * F[1:-3] + F[:-4]) / (12 * h)
    X = curve.points[2:-2]
    Vel = curve.velocities[2:-2]
    worst = 0.0
    for i in range(F.shape[1]):
        Fi = np.ascontiguousarray(F[2:-2, i])
        G = K.christoffel_batch(space.model_id, X, np.ascontiguousarray(Vel), Fi)
        R = D[:, i] + G
        worst = max(worst, float(np.max(np.sqrt(space.inner(X, R, R)))))
    return worst

"""Chord-convex planar majorants and the Schur comparison check.

Construction: inscribe the geodesic polygon at the sample grid, unfold it
into the plane by gluing Euclidean comparison triangles around the start
vertex, straightening every seam where two comparison triangles meet at a
reflex angle, then convexify whatever remains by pocket flips.  A flip
reflects the chain between two hull-adjacent vertices across their line;
it keeps every edge length and never shortens a chord between the flipped
chain and the rest.  Every postcondition is then checked directly.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .curves import cumulative_curvature
from .errors import LengthMismatch, MajorizationUnverified, NotCartanHadamard
from .sampled import SampledCurve

log = logging.getLogger(__name__)

TOL_REL = 1e-6
PROPER_TOL = 1e-8
TURN_TOL = 1e-4
# distance rounding leaves O(sqrt(eps)) angle noise in comparison triangles
CONVEX_TOL = 1e-6
MAX_FLIPS = 10**5
MAX_ROUNDS = 3


@dataclass(frozen=True, eq=False)
class TurningCurve:
    """Planar curve given by speed and turning angle.

    ``kind="linear"``: theta is given at the knots and interpolated linearly
    (piecewise circular arcs), speed is a scalar.
    ``kind="step"``: theta[j] is the heading on [t_j, t_{j+1}] (a polygon),
    speed may vary per edge.
    """

    t: np.ndarray
    theta: np.ndarray
    speed: np.ndarray | float = 1.0
    basepoint: np.ndarray = field(default_factory=lambda: np.zeros(2))
    kind: str = "linear"

    def __post_init__(self):
        object.__setattr__(self, "t", np.asarray(self.t, float))
        object.__setattr__(self, "theta", np.asarray(self.theta, float))
        n_theta = len(self.t) - (self.kind == "step")
        if self.theta.shape != (n_theta,):
            raise ValueError("theta has the wrong length for this kind")

    @property
    def length(self):
        return float(self.t[-1] - self.t[0])

    def _speeds(self):
        return np.broadcast_to(np.asarray(self.speed, float), (len(self.t) - 1,))

    def arclength(self):
        return float(np.sum(self._speeds() * np.diff(self.t)))

    def knot_points(self):
        dt = np.diff(self.t)
        v = self._speeds()
        if self.kind == "step":
            steps = (v * dt)[:, None] * np.column_stack([np.cos(self.theta), np.sin(self.theta)])
        else:
            a, b = self.theta[:-1], self.theta[1:]
            dth = b - a
            small = np.abs(dth) < 1e-9
            ds = np.where(small, 1.0, dth)
            sx = np.where(small, np.cos(0.5 * (a + b)), (np.sin(b) - np.sin(a)) / ds)
            sy = np.where(small, np.sin(0.5 * (a + b)), (np.cos(a) - np.cos(b)) / ds)
            steps = (v * dt)[:, None] * np.column_stack([sx, sy])
        return self.basepoint + np.vstack([np.zeros(2), np.cumsum(steps, axis=0)])

    def heading_range(self, i, j):
        """Turning of the curve over knot interval [t_i, t_j]."""
        if self.kind == "step":
            return float(self.theta[j - 1] - self.theta[i]) if j - 1 > i else 0.0
        return float(self.theta[j] - self.theta[i])

    def turning_at(self, s):
        """theta(s), linear kind; for step, the heading just after s."""
        if self.kind == "step":
            j = min(int(np.searchsorted(self.t, s, side="right")) - 1, len(self.theta) - 1)
            return float(self.theta[max(j, 0)])
        return float(np.interp(s, self.t, self.theta))

    def points_at(self, s):
        """Points at arbitrary parameters (linear kind integrates exactly)."""
        s = np.atleast_1d(np.asarray(s, float))
        P = self.knot_points()
        out = np.empty((len(s), 2))
        v = self._speeds()
        for q, x in enumerate(s):
            j = min(max(int(np.searchsorted(self.t, x, side="right")) - 1, 0), len(self.t) - 2)
            h = x - self.t[j]
            if self.kind == "step":
                out[q] = P[j] + v[j] * h * np.array([np.cos(self.theta[j]), np.sin(self.theta[j])])
            else:
                a = self.theta[j]
                b = a + (self.theta[j + 1] - a) * h / (self.t[j + 1] - self.t[j])
                if abs(b - a) < 1e-9:
                    d = h * np.array([np.cos(0.5 * (a + b)), np.sin(0.5 * (a + b))])
                else:
                    d = h / (b - a) * np.array([np.sin(b) - np.sin(a), np.cos(a) - np.cos(b)])
                out[q] = P[j] + v[j] * d
        return out

    def to_table(self):
        bx, by = (float(b) for b in self.basepoint)
        lines = [f"# kind={self.kind} basepoint={bx!r},{by!r}",
                 "# t theta v"]
        v = self._speeds()
        th = self.theta if self.kind == "linear" else np.append(self.theta, np.nan)
        vv = np.append(v, np.nan)
        for t, a, s in zip(self.t, th, vv):
            lines.append(" ".join(repr(float(x)) for x in (t, a, s)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_table(cls, text):
        header = text.splitlines()[0]
        kind = header.split("kind=")[1].split()[0]
        bx, by = header.split("basepoint=")[1].split(",")
        rows = np.array([list(map(float, ln.split())) for ln in text.splitlines()
                         if ln.strip() and not ln.startswith("#")])
        t, th, v = rows[:, 0], rows[:, 1], rows[:-1, 2]
        if kind == "step":
            th = th[:-1]
        speed = float(v[0]) if np.ptp(v) == 0 else v
        return cls(t, th, speed, np.array([float(bx), float(by)]), kind)


def circle_arc(kappa, length, m=1025, theta0=0.0):
    """Planar circular arc of curvature kappa as a TurningCurve."""
    t = np.linspace(0.0, length, m)
    return TurningCurve(t, theta0 + kappa * t, 1.0)


# -- planar helpers ---------------------------------------------------------------

def _hull_ccw(P, tol):
    """Indices of strict convex-hull vertices, counterclockwise."""
    idx = np.lexsort((P[:, 1], P[:, 0]))

    def cross(o, a, b):
        return (P[a, 0] - P[o, 0]) * (P[b, 1] - P[o, 1]) - (P[a, 1] - P[o, 1]) * (P[b, 0] - P[o, 0])

    lower, upper = [], []
    for i in idx:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], i) <= tol:
            lower.pop()
        lower.append(i)
    for i in idx[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], i) <= tol:
            upper.pop()
        upper.append(i)
    return lower[:-1] + upper[:-1]


def fan_layout(D0, d, keep_dtype=False):
    """Planar polygon P_0..P_m with |P_0 P_j| = D0[j] and |P_j P_{j+1}| = d[j],
    glued counterclockwise from comparison triangles at P_0."""
    m = len(d)
    P = np.zeros((m + 1, 2), dtype=np.result_type(D0, d))
    ang = P.dtype.type(0)
    P[1] = [D0[1], 0.0]
    for j in range(1, m):
        a, b, c = D0[j], d[j], D0[j + 1]
        if c <= 0.0:
            P[j + 1] = 0.0
            continue
        if a > 0.0:
            cosphi = np.clip((a * a + c * c - b * b) / (2 * a * c), -1.0, 1.0)
            ang += np.arccos(cosphi)
        P[j + 1] = c * np.cos(ang), c * np.sin(ang)
    return P if keep_dtype else P.astype(float)


def _seam_angle(Da, Dk, Db, La, Lb):
    """Angle at vertex k of the comparison triangles (O, a, k) and (O, k, b)."""
    ca = (Dk * Dk + La * La - Da * Da) / (2 * Dk * La)
    cb = (Dk * Dk + Lb * Lb - Db * Db) / (2 * Dk * Lb)
    return np.arccos(np.clip(ca, -1.0, 1.0)) + np.arccos(np.clip(cb, -1.0, 1.0))


def alexandrov_fan(D0, d):
    """Fan layout with reflex seams straightened.

    Where the two comparison triangles meeting at a seam vertex have angle
    sum above pi, they are replaced by one triangle whose third side is the
    broken path through that vertex (Alexandrov's lemma); the vertex then
    sits on a straight edge.  Returns the planar polygon P_0..P_m.
    """
    m = len(d)
    s = np.concatenate([[0.0], np.cumsum(d)]).astype(D0.dtype)
    pi = np.pi

    def reflex(a, k, b):
        La, Lb = s[k] - s[a], s[b] - s[k]
        if D0[k] <= 0 or La <= 0 or Lb <= 0:
            return False
        if s[b] - s[a] > D0[a] + D0[b]:
            return False
        return _seam_angle(D0[a], D0[k], D0[b], La, Lb) > pi

    stack = [1]
    for j in range(2, m + 1):
        while len(stack) >= 2 and reflex(stack[-2], stack[-1], j):
            stack.pop()
        stack.append(j)
    keep = np.array(stack)
    # fan over the kept vertices, then place the others along straight edges
    P = np.zeros((m + 1, 2), dtype=D0.dtype)
    Dk = D0[keep]
    Pk = fan_layout(np.concatenate([[0.0], Dk]).astype(D0.dtype), np.concatenate([[D0[1]], np.diff(s[keep])]),
                    keep_dtype=True)[1:]
    for i, (a, b) in enumerate(zip(keep[:-1], keep[1:])):
        w = (s[a:b + 1] - s[a]) / (s[b] - s[a]) if s[b] > s[a] else np.zeros(b - a + 1)
        P[a:b + 1] = Pk[i] + w[:, None] * (Pk[i + 1] - Pk[i])
    P[keep] = Pk
    return P.astype(float), int(m - len(keep))


def convexify(P, closed_by_chord=True, max_flips=MAX_FLIPS, tol=None):
    """Pocket-flip the closed polygon P (last vertex joined to the first)
    until it is convex.  Returns (P, flips).

    P must be simple; a self-intersecting polygon can run out of pockets
    while still non-convex, which raises MajorizationUnverified.
    """
    P = np.array(P, float)
    m = len(P)
    scale = np.max(np.ptp(P, axis=0)) + 1e-300
    tol = 1e-24 * scale * scale if tol is None else tol
    flips = 0
    while True:
        hull = _hull_ccw(P, tol)
        order = sorted(hull)
        pos = {v: k for k, v in enumerate(hull)}
        did = False
        for k in range(len(order)):
            a, b = order[k], order[(k + 1) % len(order)]
            chain = list(range(a + 1, b)) if b > a else list(range(a + 1, m)) + list(range(0, b))
            if not chain:
                continue
            if not (abs(pos[a] - pos[b]) == 1 or abs(pos[a] - pos[b]) == len(hull) - 1):
                continue
            u = P[b] - P[a]
            nu = np.hypot(*u)
            if nu == 0:
                continue
            nrm = np.array([-u[1], u[0]]) / nu
            off = (P[chain] - P[a]) @ nrm
            if np.max(np.abs(off)) <= np.sqrt(tol):
                continue
            P[chain] -= 2 * off[:, None] * nrm
            flips += 1
            did = True
            if flips >= max_flips:
                raise MajorizationUnverified(f"flip budget {max_flips} exhausted")
        if not did:
            if not _is_convex(P):
                raise MajorizationUnverified("no pocket left but polygon not convex (self-intersecting?)")
            return P, flips


def _exterior_turns(P):
    E = np.diff(np.vstack([P, P[:1]]), axis=0)
    keep = np.hypot(E[:, 0], E[:, 1]) > 0
    E = E[keep]
    h = np.arctan2(E[:, 1], E[:, 0])
    turn = np.diff(np.append(h, h[0]))
    turn = np.pi - (np.pi - turn) % (2 * np.pi)
    # a fold (degenerate flat polygon) turns by +pi, never -pi
    return np.where(turn < -np.pi + 1e-6, turn + 2 * np.pi, turn)


# -- majorization -------------------------------------------------------------------

@dataclass
class MajorizationReport:
    chord_deficit: float
    proper_error: float
    min_turn: float
    total_turn: float
    turn_excess: float
    flips: int
    rounds: int
    length_polygon: float
    length_curve: float

    @property
    def ok(self):
        return (self.chord_deficit <= TOL_REL and self.min_turn >= -CONVEX_TOL
                and abs(self.total_turn - 2 * np.pi) < 1e-6 and self.turn_excess <= TURN_TOL)


def _distance_matrix(space, X):
    return space.distance(X[:, None, :], X[None, :, :])


def _chord_deficit(space, X, Q):
    DM = _distance_matrix(space, X)
    DP = np.hypot(Q[:, None, 0] - Q[None, :, 0], Q[:, None, 1] - Q[None, :, 1])
    return float(np.max((DM - DP) / np.maximum(DM, 1e-300))), DM


def _is_convex(P):
    ext = _exterior_turns(P)
    return ext.min() >= -CONVEX_TOL and abs(ext.sum() - 2 * np.pi) < 1e-6


def _hub_candidates(D0, extra=6):
    """Fan roots to try: the start vertex, the vertex farthest from it, then
    evenly spaced vertices."""
    n = len(D0)
    far = int(np.argmax(D0))
    rest = np.linspace(0, n, extra + 2, dtype=int)[1:-1]
    seen = []
    for h in [0, far, *rest]:
        if 0 <= h < n and h not in seen:
            seen.append(int(h))
    return seen


def _majorize_once(space, curve):
    # extended precision: comparison angles of thin triangles lose half
    # their digits to distance rounding
    X = curve.points.astype(np.longdouble)
    D0 = space.distance(X[0][None, :], X)
    d = space.distance(X[:-1], X[1:])
    m = len(d)
    closed = D0[-1] <= PROPER_TOL * curve.length
    # cyclic polygon: the closing chord is an ordinary edge
    Xc = X[:-1] if closed else X
    n = len(Xc)
    ring = np.append(d[:n - 1], d[-1] if closed else D0[-1])
    DM = _distance_matrix(space, curve.points[:n])

    def good(P):
        DP = np.hypot(P[:, None, 0] - P[None, :, 0], P[:, None, 1] - P[None, :, 1])
        return _is_convex(P) and np.max((DM - DP) / np.maximum(DM, 1e-300)) <= TOL_REL

    fans = []
    for hub in _hub_candidates(D0[:n]):
        order = np.roll(np.arange(n), -hub)
        Dh = space.distance(Xc[hub][None, :], Xc[order])
        P, _ = alexandrov_fan(Dh, np.roll(ring, -hub)[:-1])
        P = P[np.argsort(order)]
        if good(P):
            Q, flips = P, 0
            break
        fans.append(P)
    else:
        # no root gave a convex fan: pocket-flip each until one converges
        for P in fans:
            try:
                Q, flips = convexify(P)
            except MajorizationUnverified:
                Q, flips = P, 0
                continue
            if good(Q):
                break
    if closed:
        Q = np.vstack([Q, Q[:1]])
    # orientation: counterclockwise, start at origin, first edge along +x
    area = 0.5 * np.sum(Q[:-1, 0] * Q[1:, 1] - Q[1:, 0] * Q[:-1, 1]) \
        + 0.5 * (Q[-1, 0] * Q[0, 1] - Q[0, 0] * Q[-1, 1])
    if area < 0:
        Q[:, 1] = -Q[:, 1]
    Q = Q - Q[0]
    e0 = Q[1] if np.hypot(*Q[1]) > 0 else Q[2]
    c, s = e0 / np.hypot(*e0)
    Q = Q @ np.array([[c, -s], [s, c]])
    E = np.diff(Q, axis=0)
    lens = np.hypot(E[:, 0], E[:, 1])
    heading = np.arctan2(E[:, 1], E[:, 0])
    turn = np.diff(heading)
    turn = np.pi - (np.pi - turn) % (2 * np.pi)
    theta = np.concatenate([[heading[0]], heading[0] + np.cumsum(turn)])
    dt = np.diff(curve.t)
    with np.errstate(invalid="ignore", divide="ignore"):
        speed = np.where(dt > 0, lens / np.where(dt > 0, dt, 1.0), 1.0)
    tc = TurningCurve(curve.t, theta, speed, np.zeros(2), kind="step")
    return tc, Q, flips, closed, m


def verify_majorant(space, curve, tc, DM=None, closed=None):
    """Check the four majorant postconditions on the sample grid."""
    Q = tc.knot_points()
    deficit, DM = _chord_deficit(space, curve.points, Q)
    ell = curve.length
    chord_g = DM[0, -1]
    proper = abs(np.hypot(*(Q[-1] - Q[0])) - chord_g)
    ext = _exterior_turns(Q if chord_g > PROPER_TOL * ell else Q[:-1])
    excess = max(_step_turn_excess(tc.theta, cumulative_curvature(space, curve)), 0.0)
    return MajorizationReport(deficit, float(proper), float(ext.min()), float(ext.sum()),
                              excess, 0, 0, float(tc.arclength()),
                              float(np.sum(np.diag(DM, 1))))


def majorize(space, curve, max_rounds=MAX_ROUNDS, return_report=False):
    """Chord-convex proper planar majorant of ``curve`` on its sample grid."""
    if not space.is_cartan_hadamard:
        raise NotCartanHadamard(f"{space!r} is not Cartan-Hadamard")
    cur = curve
    report = None
    for rnd in range(max_rounds + 1):
        tc, Q, flips, closed, _ = _majorize_once(space, cur)
        report = verify_majorant(space, cur, tc)
        report.flips, report.rounds = flips, rnd
        proper_ok = report.proper_error <= PROPER_TOL * cur.length
        if report.ok and proper_ok:
            if cur is not curve:
                # restrict to the caller's grid
                keep = np.isin(cur.t, curve.t)
                Qk = Q[keep]
                tc = _turning_from_polygon(curve.t, Qk)
            return (tc, report) if return_report else tc
        log.info("majorant round %d failed: %s", rnd, report)
        cur = cur.refined(2)
    raise MajorizationUnverified(f"postconditions failed after {max_rounds} refinements: {report}")


def _turning_from_polygon(t, Q):
    E = np.diff(Q, axis=0)
    h = np.arctan2(E[:, 1], E[:, 0])
    turn = np.pi - (np.pi - np.diff(h)) % (2 * np.pi)
    theta = np.concatenate([[h[0]], h[0] + np.cumsum(turn)])
    dt = np.diff(t)
    return TurningCurve(t, theta, np.hypot(E[:, 0], E[:, 1]) / dt, np.zeros(2), "step")


def _step_turn_excess(H, tau):
    """max over knots a < b of (H[b-1] - H[a]) - (tau[b] - tau[a]) where
    H[j] is the polygon heading on [t_j, t_{j+1}]."""
    if len(H) < 2:
        return 0.0
    A = H[1:] - tau[2:]
    B = np.minimum.accumulate(H[:-1] - tau[:-2])
    return float(np.max(A - B))


def curvature_nonincrease_check(space, curve, majorant):
    """max over knot intervals of (turning of majorant) - tau(curve)."""
    tau = cumulative_curvature(space, curve)
    if majorant.kind == "step":
        return _step_turn_excess(majorant.theta, tau)
    diff = majorant.theta - tau
    run = np.minimum.accumulate(diff)
    return float(np.max(diff[1:] - run[:-1]))


# -- Schur comparison ---------------------------------------------------------------

@dataclass
class SchurVerdict:
    hypothesis_margin: float
    conclusion_margin: float
    chord_gamma1: float
    chord_gamma2: float
    hypothesis_holds: bool
    passed: bool

    def as_row(self):
        return {"hypothesis_margin": self.hypothesis_margin,
                "conclusion_margin": self.conclusion_margin,
                "chord_gamma1": self.chord_gamma1, "chord_gamma2": self.chord_gamma2,
                "hypothesis_holds": self.hypothesis_holds, "passed": self.passed}


def dyadic_intervals(length, depth=10):
    out = []
    for k in range(depth + 1):
        n = 2**k
        edges = np.linspace(0.0, length, n + 1)
        out.extend(zip(edges[:-1], edges[1:]))
    return out


def schur_verify(gamma1, space, gamma2, depth=10, hyp_tol=1e-6, rel_slack=1e-8):
    """Check the Schur comparison between a chord-convex planar gamma1 and a
    curve gamma2 in ``space`` of the same length."""
    L1, L2 = gamma1.length, gamma2.length
    if abs(L1 - L2) > 1e-8 * max(1.0, L1):
        raise LengthMismatch(f"lengths differ: {L1} vs {L2}")
    tau2 = cumulative_curvature(space, gamma2)
    t2 = gamma2.t - gamma2.t[0]
    margin = -np.inf
    for a, b in dyadic_intervals(L1, depth):
        # tau of gamma2 over [a, b] from the piecewise-linear cumulative profile
        tb = np.interp(b, t2, tau2) - np.interp(a, t2, tau2)
        ta = gamma1.turning_at(gamma1.t[0] + b) - gamma1.turning_at(gamma1.t[0] + a)
        margin = max(margin, tb - ta)
    P1 = gamma1.knot_points()
    c1 = float(np.hypot(*(P1[-1] - P1[0])))
    c2 = float(space.distance(gamma2.points[0], gamma2.points[-1]))
    concl = c2 - c1
    hyp = margin <= hyp_tol * (1.0 + tau2[-1])
    passed = (concl >= -rel_slack * max(c1, 1e-300)) if hyp else True
    return SchurVerdict(float(margin), float(concl), c1, c2, bool(hyp), bool(passed))

"""Sampled unit-speed curves with cubic Hermite interpolation."""

from dataclasses import dataclass

import numpy as np


def hermite_eval(t0, t1, p0, p1, d0, d1, t):
    dt = t1 - t0
    tau = (t - t0) / dt
    t2, t3 = tau * tau, tau**3
    pos = ((2 * t3 - 3 * t2 + 1) * p0 + (t3 - 2 * t2 + tau) * dt * d0
           + (-2 * t3 + 3 * t2) * p1 + (t3 - t2) * dt * d1)
    vel = ((6 * t2 - 6 * tau) * p0 + (3 * t2 - 4 * tau + 1) * dt * d0
           + (-6 * t2 + 6 * tau) * p1 + (3 * t2 - 2 * tau) * dt * d1) / dt
    return pos, vel


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """Parameter grid, chart points and chart velocities.

    Repeated parameter values are allowed and mark corners: two samples at
    the same t and point with different velocities.
    """

    t: np.ndarray
    points: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        t = np.ascontiguousarray(self.t, dtype=float)
        P = np.ascontiguousarray(self.points, dtype=float)
        V = np.ascontiguousarray(self.velocities, dtype=float)
        if P.ndim != 2 or P.shape != V.shape or P.shape[0] != t.shape[0]:
            raise ValueError("t, points, velocities have inconsistent shapes")
        if np.any(np.diff(t) < 0):
            raise ValueError("parameter grid must be nondecreasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "velocities", V)

    @property
    def m(self):
        return self.t.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def length(self):
        return float(self.t[-1] - self.t[0])

    def is_closed(self, tol=1e-10):
        return bool(np.max(np.abs(self.points[-1] - self.points[0])) <= tol)

    def speeds(self, space):
        return np.sqrt(space.inner(self.points, self.velocities, self.velocities))

    def _interval(self, s):
        j = int(np.searchsorted(self.t, s, side="right")) - 1
        j = min(max(j, 0), self.m - 2)
        while j > 0 and self.t[j + 1] == self.t[j]:
            j -= 1
        return j

    def evaluate(self, s):
        """Hermite-interpolated point and velocity at parameter s."""
        s = float(s)
        if s < self.t[0] - 1e-12 or s > self.t[-1] + 1e-12:
            raise ValueError(f"parameter {s} outside [{self.t[0]}, {self.t[-1]}]")
        j = self._interval(s)
        if self.t[j + 1] == self.t[j]:
            return self.points[j].copy(), self.velocities[j].copy()
        return hermite_eval(self.t[j], self.t[j + 1], self.points[j], self.points[j + 1],
                            self.velocities[j], self.velocities[j + 1], s)

    def point(self, s):
        return self.evaluate(s)[0]

    def points_at(self, s):
        return np.array([self.evaluate(x)[0] for x in np.atleast_1d(s)])

    def restrict(self, a, b, tol=1e-12):
        """Sub-curve on [a, b]; interpolated end samples are inserted."""
        if a > b:
            raise ValueError("empty interval")
        inside = (self.t > a + tol) & (self.t < b - tol)
        pa, va = self.evaluate(a)
        pb, vb = self.evaluate(b)
        t = np.concatenate([[a], self.t[inside], [b]])
        P = np.vstack([pa, self.points[inside], pb])
        V = np.vstack([va, self.velocities[inside], vb])
        return SampledCurve(t, P, V)

    def reversed(self):
        return SampledCurve(self.t[-1] + self.t[0] - self.t[::-1],
                            self.points[::-1], -self.velocities[::-1])

    def concat(self, other):
        """Append ``other`` (which must start where self ends)."""
        shift = self.t[-1] - other.t[0]
        return SampledCurve(np.concatenate([self.t, other.t + shift]),
                            np.vstack([self.points, other.points]),
                            np.vstack([self.velocities, other.velocities]))

    def refined(self, factor=2):
        """Insert Hermite midpoints, ``factor`` subdivisions per interval."""
        ts, ps, vs = [self.t[0]], [self.points[0]], [self.velocities[0]]
        for j in range(self.m - 1):
            t0, t1 = self.t[j], self.t[j + 1]
            if t1 > t0:
                for k in range(1, factor):
                    s = t0 + (t1 - t0) * k / factor
                    p, v = hermite_eval(t0, t1, self.points[j], self.points[j + 1],
                                        self.velocities[j], self.velocities[j + 1], s)
                    ts.append(s)
                    ps.append(p)
                    vs.append(v)
            ts.append(t1)
            ps.append(self.points[j + 1])
            vs.append(self.velocities[j + 1])
        return SampledCurve(np.array(ts), np.array(ps), np.array(vs))

    # -- plain-text table: one sample per line "t x_1..x_n v_1..v_n" ------------
    def to_table(self):
        lines = [f"# t x[{self.dim}] v[{self.dim}]"]
        for t, p, v in zip(self.t, self.points, self.velocities):
            lines.append(" ".join(repr(float(a)) for a in (t, *p, *v)))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_table(cls, text):
        rows = [list(map(float, ln.split())) for ln in text.splitlines()
                if ln.strip() and not ln.lstrip().startswith("#")]
        A = np.array(rows)
        n = (A.shape[1] - 1) // 2
        if A.shape[1] != 2 * n + 1:
            raise ValueError("table rows must have 2n + 1 columns")
        return cls(A[:, 0], A[:, 1:1 + n], A[:, 1 + n:])

"""Experiment runner.

    chgeom <experiment> [--config FILE] [--seed N] [--out DIR] [--jobs N]
                        [--set key=value ...]
    chgeom --list

Config files are plain text with two sections::

    [run]
    seed = 7
    jobs = 2
    [params]
    n_instances = 100
    m = 257

Unknown sections or keys are rejected; ``chgeom --list`` shows every
experiment with its parameters and defaults.

Every run writes ``results.csv``, ``defects.csv`` and ``plotdata/*.dat`` to
``<out>/<experiment>/``.  The output root may also be set with the
``CHGEOM_OUT`` environment variable; nothing else is read from the
environment.
"""

import argparse
import configparser
import csv
import io
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GeometryError

FOUR_PI = 4 * np.pi


# -- experiment registry ---------------------------------------------------------------

@dataclass
class Experiment:
    name: str
    func: object
    params: dict
    anchors: tuple
    ops: tuple


REGISTRY = {}


def experiment(name, anchors, ops, **params):
    def deco(f):
        REGISTRY[name] = Experiment(name, f, params, tuple(anchors), tuple(ops))
        return f
    return deco


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 20240607
    out: str = "chgeom-out"
    jobs: int = 1
    params: dict = field(default_factory=dict)

    def stream(self, idx):
        """Independent counter-based generator for instance ``idx``."""
        ss = np.random.SeedSequence(self.seed, spawn_key=(idx,))
        return np.random.Generator(np.random.Philox(ss))


@dataclass
class Outcome:
    rows: list
    defects: list = field(default_factory=list)
    plots: dict = field(default_factory=dict)
    passed: bool = True


RUN_KEYS = {"experiment": str, "seed": int, "out": str, "jobs": int}


def _coerce(value, default, key):
    try:
        if isinstance(default, bool):
            if value.lower() in ("1", "true", "yes"):
                return True
            if value.lower() in ("0", "false", "no"):
                return False
            raise ValueError(value)
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
        if isinstance(default, tuple):
            return tuple(float(x) for x in value.split(","))
        return str(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc


def load_config(name, path=None, overrides=(), seed=None, out=None, jobs=None):
    """Build an ExperimentConfig, rejecting unknown keys."""
    if name not in REGISTRY and name != "all":
        raise ConfigError(f"unknown experiment {name!r}")
    defaults = {} if name == "all" else dict(REGISTRY[name].params)
    cfg = ExperimentConfig(name, params=dict(defaults))
    raw_run, raw_params = {}, {}
    if path is not None:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        if not cp.read(path):
            raise ConfigError(f"cannot read config {path}")
        for sec in cp.sections():
            if sec not in ("run", "params"):
                raise ConfigError(f"unknown section [{sec}]")
        raw_run = dict(cp["run"]) if cp.has_section("run") else {}
        raw_params = dict(cp["params"]) if cp.has_section("params") else {}
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        raw_params[k.strip()] = v.strip()
    for k, v in raw_run.items():
        if k not in RUN_KEYS:
            raise ConfigError(f"unknown run key {k!r}")
        if k == "experiment":
            if v != name:
                raise ConfigError(f"config is for {v!r}, not {name!r}")
            continue
        setattr(cfg, k, _coerce(v, RUN_KEYS[k](), k))
    for k, v in raw_params.items():
        if k not in defaults:
            raise ConfigError(f"unknown parameter {k!r} for {name}")
        cfg.params[k] = _coerce(v, defaults[k], k)
    if seed is not None:
        cfg.seed = int(seed)
    if jobs is not None:
        cfg.jobs = int(jobs)
    cfg.out = out or os.environ.get("CHGEOM_OUT") or cfg.out
    for k, v in cfg.params.items():
        if (k.startswith("n_") or k in ("level", "m", "nu", "nv")) and v <= 0:
            raise ConfigError(f"{k} must be positive")
    if cfg.jobs < 1:
        raise ConfigError("jobs must be positive")
    return cfg


def _map(cfg, fn, n):
    """Run fn(params, seed, idx) for idx < n; rows sorted by index."""
    args = [(cfg.params, cfg.seed, i) for i in range(n)]
    if cfg.jobs > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            out = list(ex.map(_call, [fn] * n, args, chunksize=max(1, n // (4 * cfg.jobs))))
    else:
        out = [_call(fn, a) for a in args]
    return sorted(out, key=lambda r: r["index"])


def _call(fn, args):
    params, seed, idx = args
    rng = ExperimentConfig("", seed=seed).stream(idx)
    try:
        row = fn(params, rng, idx)
    except GeometryError as exc:
        row = {"passed": False, "error": f"{type(exc).__name__}: {exc}"}
    row = {"index": idx, **row}
    return row


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


# -- experiments -----------------------------------------------------------------------------

@experiment("spaces-selftest",
            ["Riemann convention R(a,b,b,a)", "Cartan-Hadamard models"],
            ["spaces.sectional_curvature", "spaces.exp_map", "spaces.log_map",
             "spaces.distance", "spaces.geodesic", "spaces.integrate_geodesic"],
            n_points=5)
def run_spaces_selftest(cfg):
    from . import spaces as S
    rows, ok_all = [], True
    for k, tag in enumerate(["euclidean", "hyperboloid", "klein", "product_h2_r",
                             "sphere_fixture"]):
        sp = S.make_space(tag, 3)
        rng = cfg.stream(k)
        chr_err = rie_err = rt_err = ode_err = 0.0
        sec_max = -np.inf
        for _ in range(cfg.params["n_points"]):
            x = sp.random_point(rng, 0.4)
            chr_err = max(chr_err, float(np.max(np.abs(sp.christoffel(x) - S.christoffel_fd(sp, x)))))
            rie_err = max(rie_err, float(np.max(np.abs(sp.riemann(x) - S.riemann_fd(sp, x)))))
            y = sp.random_point(rng, 0.4)
            rt_err = max(rt_err, float(np.max(np.abs(S.exp_map(sp, x, S.log_map(sp, x, y)) - y))))
            g = S.geodesic(sp, x, y, 17)
            rt_err = max(rt_err, abs(g.length - S.distance(sp, x, y)))
            u, v = rng.normal(size=3), rng.normal(size=3)
            sec_max = max(sec_max, float(S.sectional_curvature(sp, x, u, v)))
            w = S.log_map(sp, x, y)
            _, P, _ = S.integrate_geodesic(sp, x, w, 1.0)
            ode_err = max(ode_err, float(np.max(np.abs(P[-1] - y))))
        passed = (chr_err < 1e-6 and rie_err < 1e-5 and rt_err < 1e-9 and ode_err < 1e-7
                  and (sec_max <= 1e-10 or not sp.is_cartan_hadamard))
        ok_all &= passed
        rows.append({"index": k, "space": tag, "christoffel_err": chr_err,
                     "riemann_err": rie_err, "exp_log_err": rt_err, "ode_err": ode_err,
                     "max_sectional": sec_max, "cartan_hadamard": sp.is_cartan_hadamard,
                     "passed": passed})
    # normal-coordinate metric expansion, H^3
    sp = S.Hyperbolic(3)
    rng = cfg.stream(99)
    o = sp.random_point(rng, 0.3)
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    rs = np.geomspace(1e-3, 1e-1, 8)
    res = []
    for r in rs:
        g, _, R = S.normal_coordinate_metric(sp, o, r * d)
        x = r * d
        res.append(np.max(np.abs(g - (np.eye(3) - np.einsum("kijl,k,l->ij", R, x, x) / 3))))
    slope = _slope(rs, np.maximum(res, 1e-300))
    rows.append({"index": 5, "space": "normal_coords", "slope": slope, "passed": slope >= 3.5})
    return Outcome(rows, plots={"normal_coords": (rs, np.array(res))},
                   passed=ok_all and slope >= 3.5)


@experiment("transport-holonomy",
            ["path independence of transport P^{g1}_{p,q} = P^{g2}_{p,q}", "parallel orthonormal frames"],
            ["transport.parallel_transport", "transport.holonomy_defect",
             "transport.propagate_frame"],
            areas=(0.05, 0.1, 0.2, 0.5), m_side=400)
def run_transport(cfg):
    from .curves import geodesic_triangle
    from scipy.optimize import brentq

    from .spaces import Hyperbolic, ProductH2R, geodesic
    from .transport import holonomy_defect, parallel_transport, rotation_angle, propagate_frame, frame_mismatch
    H2 = Hyperbolic(2)
    rows, ok = [], True
    xs, ys = [], []
    dirs = [np.array([np.cos(a), np.sin(a)]) for a in 2 * np.pi * np.arange(3) / 3]
    for k, A in enumerate(cfg.params["areas"]):
        # equilateral triangle with angle defect A: interior angles (pi - A) / 3
        alpha = (np.pi - A) / 3
        side = np.arccosh((np.cos(alpha) + np.cos(alpha) ** 2) / np.sin(alpha) ** 2)
        rho = brentq(lambda r: H2.distance(np.sinh(r) * dirs[0], np.sinh(r) * dirs[1]) - side,
                     1e-9, 10.0)
        P = [np.sinh(rho) * q for q in dirs]
        loop = geodesic_triangle(H2, *P, m_side=cfg.params["m_side"])
        ang = rotation_angle(H2, loop)
        dfc = holonomy_defect(H2, loop)
        fr = propagate_frame(H2, loop)
        mism = frame_mismatch(H2, loop.points[0], fr.frames[0], fr.frames[-1])
        # a single transported vector turns by the same angle
        x0, e = loop.points[0], fr.frames[0][0]
        w = parallel_transport(H2, loop, e)
        turn = np.arccos(np.clip(H2.inner(x0, e, w) / (H2.norm(x0, e) * H2.norm(x0, w)), -1, 1))
        passed = (abs(ang - A) < 1e-5 and abs(dfc - 2 * np.sin(A / 2)) < 1e-5
                  and abs(mism - dfc) < 1e-8 and abs(turn - abs(ang)) < 1e-6)
        ok &= passed
        xs.append(A)
        ys.append(dfc)
        rows.append({"index": k, "area": A, "rotation": ang, "defect": dfc,
                     "predicted_defect": 2 * np.sin(A / 2), "frame_mismatch": mism,
                     "vector_turn": float(turn),
                     "passed": passed})
    # product loop lying in (geodesic) x R: trivial holonomy
    sp = ProductH2R()
    side = [((0, 0, 0), (1, 0, 0)), ((1, 0, 0), (1, 0, 1)), ((1, 0, 1), (0, 0, 1)),
            ((0, 0, 1), (0, 0, 0))]
    loop = None
    for a, b in side:
        g = geodesic(sp, np.array(a, float), np.array(b, float), 200)
        loop = g if loop is None else loop.concat(g)
    dp = holonomy_defect(sp, loop)
    rows.append({"index": len(rows), "area": 0.0, "defect": dp, "passed": dp <= 1e-6})
    ok &= dp <= 1e-6
    return Outcome(rows, plots={"holonomy_vs_area": (np.array(xs), np.array(ys))}, passed=ok)


@experiment("curve-tau", ["tau(gamma) total curvature", "turning angle"],
            ["curves.total_curvature", "curves.geodesic_curvature"],
            radius=1.0, m=2001)
def run_curve_tau(cfg):
    from .curves import (euclidean_circle, geodesic_curvature, hyperbolic_circle,
                         total_curvature)
    from .spaces import Euclidean, Hyperbolic
    r, m = cfg.params["radius"], cfg.params["m"]
    rows = []
    c = euclidean_circle(1.0, m)
    tau = total_curvature(Euclidean(2), c)
    rows.append({"index": 0, "fixture": "circle_E2", "tau": tau, "expected": 2 * np.pi,
                 "kappa": geodesic_curvature(Euclidean(2), c, 1.0), "passed": abs(tau - 2 * np.pi) < 1e-6})
    h = hyperbolic_circle(r, m)
    tau = total_curvature(Hyperbolic(2), h)
    exp = 2 * np.pi * np.cosh(r)
    kap = geodesic_curvature(Hyperbolic(2), h, h.length / 3)
    rows.append({"index": 1, "fixture": "circle_H2", "tau": tau, "expected": exp, "kappa": kap,
                 "passed": abs(tau - exp) < 1e-6 * exp and abs(kap - 1 / np.tanh(r)) < 1e-6})
    return Outcome(rows, passed=all(r_["passed"] for r_ in rows))


@experiment("chord-fit", ["chord expansion 2h - (kappa^2/3) h^3", "uniform bound >= 2h - C h^3"],
            ["curves.chord_curvature_fit", "curves.uniform_chord_bound_check"],
            radius=1.0, m=4001)
def run_chord_fit(cfg):
    from .curves import (chord_curvature_fit, euclidean_circle, hyperbolic_circle,
                         uniform_chord_bound_check)
    from .spaces import Euclidean, Hyperbolic
    r, m = cfg.params["radius"], cfg.params["m"]
    rows = []
    for k, (name, sp, c, kap) in enumerate([
            ("circle_E2", Euclidean(2), euclidean_circle(1.0, m), 1.0),
            ("circle_H2", Hyperbolic(2), hyperbolic_circle(r, m), 1 / np.tanh(r))]):
        khat = chord_curvature_fit(sp, c, c.length / 2)
        C, h0, viol = uniform_chord_bound_check(sp, c)
        rows.append({"index": k, "fixture": name, "kappa_hat": khat, "kappa": kap,
                     "rel_err": abs(khat - kap) / kap, "C": C, "h0": h0, "violations": viol,
                     "passed": abs(khat - kap) <= 0.02 * kap and viol == 0})
    return Outcome(rows, passed=all(r_["passed"] for r_ in rows))


@experiment("two-point", ["two-point expansion -(1/3) R(a,b,b,a)"],
            ["curves.two_point_defect"], eps=0.1, n_rho=10)
def run_two_point(cfg):
    from .curves import two_point_defect
    from .spaces import Hyperbolic
    sp = Hyperbolic(3)
    o = np.zeros(3)
    e = cfg.params["eps"]
    meas, pred = two_point_defect(sp, o, np.array([e, 0, 0]), np.array([0, e, 0]))
    rel = abs(meas - pred) / abs(pred)
    rhos = np.geomspace(0.01, 0.2, cfg.params["n_rho"])
    res = []
    for rho in rhos:
        a = np.array([rho / 2, 0, 0])
        b = np.array([0, rho / 2, 0])
        mm, pp = two_point_defect(sp, o, a, b, radius=1.0)
        res.append(abs(mm - pp))
    slope = _slope(rhos, np.array(res))
    rows = [{"index": 0, "eps": e, "measured": meas, "predicted": pred, "rel_err": rel,
             "slope": slope, "passed": rel <= 0.05 and slope >= 4.5}]
    return Outcome(rows, plots={"two_point_residual": (rhos, np.array(res))},
                   passed=rows[0]["passed"])


def random_frenet_curve(rng, space, m=301):
    """Seeded smooth curve in H^2 or H^3 with bounded curvature."""
    from .curves import frenet_curve
    a = rng.uniform(0, 2, 4)
    L = float(rng.uniform(0.5, 3.0))
    kap = lambda s: a[0] + a[1] * np.sin(a[2] * s + a[3]) ** 2  # noqa: E731
    tor = (lambda s: a[1] - 1.0) if space.dim == 3 else None  # noqa: E731
    return frenet_curve(space, kap, tor, length=L, m=m)


def _majorize_instance(params, rng, idx):
    from .majorize import PROPER_TOL, TURN_TOL, curvature_nonincrease_check, majorize
    from .spaces import Hyperbolic
    sp = Hyperbolic(2 if idx % 2 else 3)
    c = random_frenet_curve(rng, sp, params["m"])
    tc, rep = majorize(sp, c, return_report=True)
    excess = curvature_nonincrease_check(sp, c, tc)
    ok = (rep.ok and rep.proper_error <= PROPER_TOL * c.length
          and rep.turn_excess <= TURN_TOL and excess <= TURN_TOL)
    return {"dim": sp.dim, "length": c.length, "chord_deficit": rep.chord_deficit,
            "proper_error": rep.proper_error, "min_turn": rep.min_turn,
            "total_turn": rep.total_turn, "turn_excess": excess, "flips": rep.flips,
            "rounds": rep.rounds, "passed": bool(ok)}


@experiment("majorize", ["proper chord-convex majorant",
                         "majorization does not increase curvature"],
            ["majorize.majorize", "majorize.curvature_nonincrease_check"],
            n_instances=200, m=301)
def run_majorize(cfg):
    rows = _map(cfg, _majorize_instance, cfg.params["n_instances"])
    return Outcome(rows, passed=all(r["passed"] for r in rows))


def _schur_instance(params, rng, idx):
    from .curves import frenet_curve
    from .majorize import circle_arc, schur_verify
    from .spaces import Hyperbolic
    sp = Hyperbolic(2 if idx % 2 else 3)
    L = float(rng.uniform(0.5, 3.0))
    k1 = float(rng.uniform(0.05, np.pi / L))  # k1 L <= pi keeps gamma1 chord-convex
    amp, freq, ph = rng.uniform(0, 1), rng.uniform(0, 4), rng.uniform(0, np.pi)
    shrink = 1 - 1e-3
    kap = lambda s: shrink * k1 * (1 - amp * np.sin(freq * s + ph) ** 2)  # noqa: E731
    tau0 = float(rng.uniform(-1, 1))
    tor = (lambda s: tau0) if sp.dim == 3 else None  # noqa: E731
    m = params["m"]
    g2 = frenet_curve(sp, kap, tor, length=L, m=m)
    g1 = circle_arc(k1, L, m)
    v = schur_verify(g1, sp, g2)
    return {"dim": sp.dim, "length": L, "kappa1": k1, **v.as_row()}


@experiment("schur-suite", ["Schur comparison theorem |g2(0)g2(l)| >= |g1(0)g1(l)|"],
            ["majorize.schur_verify"], n_instances=500, m=257)
def run_schur(cfg):
    rows = _map(cfg, _schur_instance, cfg.params["n_instances"])
    viol = [r for r in rows if r.get("hypothesis_holds") and not r["passed"]]
    return Outcome(rows, passed=not viol and all("error" not in r for r in rows))


def _closed_surface(rng, idx, level):
    """Seeded closed surface: perturbed spheres and Klein ellipsoids in E^3/H^3, tori in E^3."""
    from .spaces import Euclidean, Hyperbolic
    from .surfaces import bumpy_sphere, klein_ellipsoid, torus_surface
    kind = idx % 4
    if kind == 0:
        return bumpy_sphere(Euclidean(3), float(rng.uniform(0.0, 0.25)), level=level)
    if kind == 1:
        return bumpy_sphere(Hyperbolic(3), float(rng.uniform(0.0, 0.25)),
                            radius=float(rng.uniform(0.5, 1.5)), level=level)
    if kind == 2:
        R, r = float(rng.uniform(1.8, 3.0)), float(rng.uniform(0.6, 1.0))
        n = int(np.ceil(50 * R / r))  # discretization error scales like R / (r n)
        return torus_surface(R, r, n, n)
    return klein_ellipsoid(Hyperbolic(3), rng.uniform(0.3, 0.7, 3), _rotation(rng),
                           rng.uniform(-0.1, 0.1, 3), level=level)


def _rotation(rng):
    Q, R = np.linalg.qr(rng.normal(size=(3, 3)))
    return Q * np.sign(np.diag(R))


def _chern_lashof_instance(params, rng, idx):
    from .surfaces import curvature_report
    S = _closed_surface(rng, idx, params["level"])
    rep = curvature_report(S.space, S)
    return {"surface": S.name, "space": S.space.chart, "genus": S.genus,
            **rep.as_row(), "passed": rep.total_abs >= FOUR_PI * (1 - 0.005)}


@experiment("chern-lashof", ["total absolute curvature >= 4 pi", "2 pi (2 + 2g) bound"],
            ["surfaces.curvature_report", "surfaces.shape_operator"],
            n_instances=50, level=4, sphere_level=5)
def run_chern_lashof(cfg):
    from .spaces import Euclidean, Hyperbolic
    from .surfaces import (curvature_report, shape_operator, sphere_surface, torus_surface,
                           vertex_curvature)
    rows = []
    fixed = [("unit_sphere_E3", sphere_surface(Euclidean(3), 1.0, cfg.params["sphere_level"]),
              lambda r: abs(r.total_abs / FOUR_PI - 1) <= 0.005),
             ("torus_R2_r1", torus_surface(2.0, 1.0, 100, 100),
              lambda r: (abs(r.total_abs / (8 * np.pi) - 1) <= 0.01
                         and abs(r.total_signed) <= 0.01 * 8 * np.pi
                         and abs(r.total_positive / FOUR_PI - 1) <= 0.01))]
    for rad in (0.5, 1.0, 2.0):
        exp = FOUR_PI * np.cosh(rad) ** 2
        fixed.append((f"geodesic_sphere_r{rad:g}",
                      sphere_surface(Hyperbolic(3), rad, cfg.params["sphere_level"]),
                      lambda r, e=exp: (abs(r.total_abs / e - 1) <= 0.01
                                        and abs(r.gauss_bonnet / FOUR_PI - 1) <= 0.01)))
    ok = True
    for k, (name, S, check) in enumerate(fixed):
        rep = curvature_report(S.space, S)
        vc = vertex_curvature(S.space, S)
        probe = np.linspace(0, len(S.vertices) - 1, 5).astype(int)
        spot = max(abs(shape_operator(S.space, S, int(v))[1] - vc.gk[v]) for v in probe)
        p = bool(check(rep)) and spot <= 1e-9 * (1 + np.max(np.abs(vc.gk)))
        ok &= p
        rows.append({"index": k, "surface": name, "space": S.space.chart, "genus": S.genus,
                     **rep.as_row(), "shape_spot_err": spot, "passed": p})
    rand = _map(cfg, _chern_lashof_instance, cfg.params["n_instances"])
    for r in rand:
        r["index"] += len(fixed)
        ok &= bool(r["passed"])
    return Outcome(rows + rand, passed=ok)


def _flow_instance(params, rng, idx):
    from .spaces import Hyperbolic
    from .surfaces import curvature_report, klein_ellipsoid, parallel_surface
    sp = Hyperbolic(3)
    S = klein_ellipsoid(sp, rng.uniform(0.3, 0.7, 3), _rotation(rng),
                        rng.uniform(-0.1, 0.1, 3), level=params["level"])
    ts = np.linspace(0.1, 1.0, params["n_t"])
    G = []
    for t in ts:
        G.append(curvature_report(sp, parallel_surface(sp, S, float(t), certify=(t == ts[0])))
                 .total_signed)
    G = np.array(G)
    worst = float(np.max(np.maximum(G[:-1] - G[1:], 0) / G[:-1])) if len(G) > 1 else 0.0
    return {"G_first": float(G[0]), "G_last": float(G[-1]), "worst_drop": worst,
            "passed": worst <= 0.005}


@experiment("parallel-flow", ["t -> G(Gamma^t) nondecreasing", "outer parallel surface d^{-1}(t)"],
            ["surfaces.parallel_surface", "hull.certify_convex"],
            n_instances=50, n_t=10, level=3, radius=1.0, sphere_level=4)
def run_parallel_flow(cfg):
    from .spaces import Hyperbolic
    from .surfaces import curvature_report, parallel_surface, sphere_surface
    sp = Hyperbolic(3)
    r = cfg.params["radius"]
    S = sphere_surface(sp, r, cfg.params["sphere_level"])
    ts = np.linspace(0.1, 1.0, cfg.params["n_t"])
    rows, Gs = [], []
    ok = True
    for k, t in enumerate(ts):
        G = curvature_report(sp, parallel_surface(sp, S, float(t))).total_signed
        exp = FOUR_PI * np.cosh(r + t) ** 2
        p = abs(G / exp - 1) <= 0.01
        ok &= p
        Gs.append(G)
        rows.append({"index": k, "t": float(t), "G": G, "expected": exp, "passed": p})
    rand = _map(cfg, _flow_instance, cfg.params["n_instances"])
    for rr in rand:
        rr["index"] += len(rows)
        ok &= bool(rr["passed"])
    return Outcome(rows + rand, plots={"sphere_flow": (ts, np.array(Gs))}, passed=ok)


def _kleiner_instance(params, rng, idx):
    from .hull import kleiner_chain
    S = _closed_surface(rng, idx, params["level"])
    rec = kleiner_chain(S.space, S)
    return {"surface": S.name, "space": S.space.chart, **rec.as_row()}


@experiment("kleiner-chain", ["G~ >= G+ >= G(Gamma cap Gamma0) = G(Gamma0) >= 4 pi"],
            ["hull.kleiner_chain", "hull.convex_hull", "hull.hull_boundary_curvature"],
            n_instances=100, level=5)
def run_kleiner(cfg):
    from .hull import convex_hull, hull_boundary_curvature
    from .spaces import Euclidean
    rng = cfg.stream(10**6)
    P = rng.normal(size=(200, 3))
    G0 = hull_boundary_curvature(Euclidean(3), convex_hull(Euclidean(3), P))
    rows = [{"index": 0, "surface": "euclidean_polytope", "hull_curvature": G0,
             "passed": abs(G0 - FOUR_PI) <= 1e-9}]
    rand = _map(cfg, _kleiner_instance, cfg.params["n_instances"])
    for r in rand:
        r["index"] += 1
    return Outcome(rows + rand, passed=all(bool(r["passed"]) for r in rows + rand))


@experiment("gauss-map", ["area of RP^2 is 2 pi", "G~ = integral over RP^2 of #preimages"],
            ["surfaces.gauss_map_area"], level=5, n_dirs=400, amp=0.2)
def run_gauss_map(cfg):
    from .spaces import Euclidean
    from .surfaces import bumpy_sphere, curvature_report, gauss_map_area, sphere_surface, torus_surface
    E3 = Euclidean(3)
    rows, ok = [], True
    for k, S in enumerate([sphere_surface(E3, 1.0, cfg.params["level"]), torus_surface(2, 1, 100, 100),
                           bumpy_sphere(E3, cfg.params["amp"], level=cfg.params["level"])]):
        rep = curvature_report(E3, S)
        area, mult = gauss_map_area(S, cfg.params["n_dirs"])
        p = abs(area / rep.total_abs - 1) <= 0.02 and mult >= 2
        ok &= p
        rows.append({"index": k, "surface": S.name, "gauss_area": area,
                     "total_abs": rep.total_abs, "min_multiplicity": mult, "passed": p})
    return Outcome(rows, passed=ok)


@experiment("develop", ["developing map f_i = integral of theta_i", "normal correspondence",
                        "f preserves total curvature of curves"],
            ["develop.surface_frame", "develop.develop_map", "develop.verify_isometry",
             "develop.verify_tau_preservation", "develop.verify_normal_correspondence",
             "surfaces.flatness_scan"],
            nu=100, nv=100)
def run_develop(cfg):
    from . import develop as D
    from .errors import NotFlatOnTangentPlanes
    from .surfaces import flatness_scan, product_strip, sphere_patch
    nu, nv = cfg.params["nu"], cfg.params["nv"]
    rows, ok = [], True
    for k, (base, L) in enumerate([("geodesic", 2.0), ("circle", 1.0)]):
        P = product_strip(base, L, 1.0, nu, nv)
        fr = D.surface_frame(P.space, P)
        dev = D.develop_map(P.space, P, fr)
        iso = D.verify_isometry(P.space, P, dev.points, seed=cfg.seed)
        ncd = D.verify_normal_correspondence(P.space, P, fr, dev.points)
        ts, ti = D.verify_tau_preservation(P.space, P, dev.points,
                                           (np.arange(nu), np.zeros(nu, int)))
        flat = flatness_scan(P.space, P.to_trisurface())
        scaled = D.verify_isometry(P.space, P, dev.points * 1.01, seed=cfg.seed)
        bent = D.verify_normal_correspondence(P.space, P, D.rotate_frame_column(fr, nv // 2, 0.01),
                                              dev.points)
        p = (fr.path_defect <= 1e-6 and iso.passed and ncd <= 1e-4
             and abs(ts - ti) <= 1e-3 * (1 + ts) and not scaled.passed and bent > 1e-4)
        ok &= p
        rows.append({"index": k, "fixture": P.name, "flatness": flat,
                     "path_defect": fr.path_defect, "exactness": dev.exactness,
                     "first_form": iso.first_form, "path_lengths": iso.path_lengths,
                     "normal_defect": ncd, "tau_source": ts, "tau_image": ti,
                     "scaled_control": scaled.first_form, "frame_control": bent, "passed": p})
    try:
        D.surface_frame(sphere_patch().space, sphere_patch())
        rejected = False
    except NotFlatOnTangentPlanes:
        rejected = True
    ok &= rejected
    rows.append({"index": 2, "fixture": "sphere_patch", "passed": rejected})
    return Outcome(rows, passed=ok)


@experiment("hull-aperture", ["T_pX flat at extreme points => conv(X) is C^1"],
            ["hull.tangent_cone_aperture", "hull.convex_hull"],
            sizes=(1000, 3000, 10000, 30000, 100000))
def run_hull_aperture(cfg):
    from .hull import convex_hull, tangent_cone_aperture
    from .spaces import Euclidean
    E3 = Euclidean(3)
    rows = []
    ns, defects = [], []
    rng = cfg.stream(0)
    for k, n in enumerate(cfg.params["sizes"]):
        n = int(n)
        P = rng.normal(size=(n, 3))
        P /= np.linalg.norm(P, axis=1, keepdims=True)
        P[0] = [0.0, 0.0, 1.0]
        h = convex_hull(E3, P)
        d = np.pi - tangent_cone_aperture(E3, h, P[0])
        ns.append(n)
        defects.append(d)
        rows.append({"index": k, "fixture": "sphere_samples", "n": n, "aperture_defect": d,
                     "passed": True})
    slope = _slope(ns, defects)
    # circular cone of half-angle 45 degrees: apex defect pi/2
    cone = [np.array([[0.0, 0.0, 1.0]])]
    th = rng.uniform(0, 2 * np.pi, 4000)
    z = rng.uniform(0, 1, 4000)
    cone.append(np.stack([(1 - z) * np.cos(th), (1 - z) * np.sin(th), z], 1))
    C = np.vstack(cone)
    cd = np.pi - tangent_cone_aperture(E3, convex_hull(E3, C), C[0])
    rows.append({"index": len(rows), "fixture": "cone_apex", "aperture_defect": cd,
                 "slope": slope, "passed": cd >= 0.5 and slope < 0})
    return Outcome(rows, plots={"aperture_refinement": (np.array(ns), np.array(defects))},
                   passed=cd >= 0.5 and slope < 0)


# -- output ---------------------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return "" if v is None else str(v)


def csv_text(rows):
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in cols])
    return buf.getvalue()


def write_outcome(outdir, outcome):
    os.makedirs(os.path.join(outdir, "plotdata"), exist_ok=True)
    with open(os.path.join(outdir, "results.csv"), "w", newline="") as fh:
        fh.write(csv_text(outcome.rows))
    defects = outcome.defects or [
        {"index": r["index"], "error": r.get("error", "failed")}
        for r in outcome.rows if not r.get("passed", True) or "error" in r]
    with open(os.path.join(outdir, "defects.csv"), "w", newline="") as fh:
        fh.write(csv_text(defects) if defects else "index,error\n")
    for name, (x, y) in outcome.plots.items():
        with open(os.path.join(outdir, "plotdata", f"{name}.dat"), "w") as fh:
            for a, b in zip(np.asarray(x, float), np.asarray(y, float)):
                fh.write(f"{a!r} {b!r}\n")


def run(cfg):
    """Run one experiment; returns (exit status, Outcome)."""
    exp = REGISTRY[cfg.experiment]
    try:
        outcome = exp.func(cfg)
    except GeometryError as exc:
        outcome = Outcome([{"index": 0, "error": f"{type(exc).__name__}: {exc}",
                            "passed": False}], passed=False)
    write_outcome(os.path.join(cfg.out, cfg.experiment), outcome)
    return (0 if outcome.passed else 1), outcome


def manifest_text():
    lines = []
    for name, e in REGISTRY.items():
        lines.append(f"{name}")
        lines.append(f"  checks: {'; '.join(e.anchors)}")
        lines.append(f"  ops:    {', '.join(e.ops)}")
        if e.params:
            lines.append("  params: " + ", ".join(f"{k}={_fmt_param(v)}" for k, v in e.params.items()))
    return "\n".join(lines) + "\n"


def _fmt_param(v):
    return ",".join(_fmt(x) for x in v) if isinstance(v, tuple) else _fmt(v)


def main(argv=None):
    ap = argparse.ArgumentParser(prog="chgeom", description=__doc__.split("\n")[0])
    ap.add_argument("experiment", nargs="?", choices=sorted(REGISTRY) + ["all"])
    ap.add_argument("--config")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out")
    ap.add_argument("--jobs", type=int)
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    ap.add_argument("--list", action="store_true", help="print the experiment manifest")
    args = ap.parse_args(argv)
    if args.list:
        sys.stdout.write(manifest_text())
        return 0
    if args.experiment is None:
        ap.error("an experiment is required (or --list)")
    try:
        if args.experiment == "all":
            if args.config or args.set:
                raise ConfigError("'all' runs every experiment with its defaults")
            status = 0
            for name in REGISTRY:
                cfg = load_config(name, seed=args.seed, out=args.out, jobs=args.jobs)
                st, oc = run(cfg)
                print(f"{name}: {'PASS' if st == 0 else 'FAIL'}")
                status |= st
            return status
        cfg = load_config(args.experiment, args.config, args.set, args.seed, args.out, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    st, oc = run(cfg)
    print(f"{cfg.experiment}: {'PASS' if st == 0 else 'FAIL'} "
          f"({len(oc.rows)} rows -> {os.path.join(cfg.out, cfg.experiment)})")
    return st


if __name__ == "__main__":
    sys.exit(main())

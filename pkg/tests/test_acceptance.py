"""Acceptance criteria, one test and one PASS/FAIL line each.

Every criterion drives the same experiment code as the ``chgeom`` CLI and
checks the reported quantities at the contract tolerances.  Run alone with

    pytest tests/test_acceptance.py -v

or as a script (``python3 tests/test_acceptance.py``) for just the lines.
"""

import sys
import tempfile
import time

import numpy as np
import pytest

from chgeom import cli

FOUR_PI = 4 * np.pi
_CACHE = {}
_OUT = tempfile.mkdtemp(prefix="chgeom-accept-")

pytestmark = pytest.mark.slow


def experiment(name, **params):
    """Run an experiment once per session; returns (rows, passed, seconds)."""
    key = (name, tuple(sorted(params.items())))
    if key not in _CACHE:
        cfg = cli.load_config(name, out=_OUT)
        cfg.params.update(params)
        t0 = time.perf_counter()
        status, oc = cli.run(cfg)
        _CACHE[key] = (oc.rows, status == 0, time.perf_counter() - t0)
    return _CACHE[key]


def report(capsys, number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    if capsys is None:
        print(line)
    else:
        with capsys.disabled():
            print("\n" + line)
    return ok


def _by(rows, key, value):
    return [r for r in rows if r.get(key) == value]


# -- criteria ------------------------------------------------------------------------------

def check_chern_lashof_floor(capsys=None):
    rows, _, secs = experiment("chern-lashof")
    sphere = _by(rows, "surface", "unit_sphere_E3")[0]
    rand = rows[5:]
    worst = min(r["total_abs"] for r in rand) / FOUR_PI
    err = abs(sphere["total_abs"] / FOUR_PI - 1)
    ok = (err <= 5e-3 and len(rand) == 50 and worst >= 1 - 5e-3
          and all("error" not in r for r in rand) and secs <= 60)
    return report(capsys, 1, "Chern-Lashof floor", ok,
                  f"sphere rel err {err:.2e}; min G~/4pi over {len(rand)} surfaces {worst:.4f}; "
                  f"{secs:.1f} s")


def check_tight_torus(capsys=None):
    rows, _, _ = experiment("chern-lashof")
    t = _by(rows, "surface", "torus_R2_r1")[0]
    e_abs = abs(t["total_abs"] / (8 * np.pi) - 1)
    e_sig = abs(t["total_signed"]) / (8 * np.pi)
    e_pos = abs(t["total_positive"] / FOUR_PI - 1)
    ok = max(e_abs, e_sig, e_pos) <= 1e-2
    return report(capsys, 2, "tight torus", ok,
                  f"G~ {e_abs:.2e}, |G| {e_sig:.2e}, G+ {e_pos:.2e} (relative)")


def check_hyperbolic_spheres(capsys=None):
    rows, _, _ = experiment("chern-lashof")
    errs, gbs = [], []
    for r in (0.5, 1.0, 2.0):
        row = _by(rows, "surface", f"geodesic_sphere_r{r:g}")[0]
        errs.append(abs(row["total_abs"] / (FOUR_PI * np.cosh(r) ** 2) - 1))
        gbs.append(abs(row["gauss_bonnet"] / FOUR_PI - 1))
    ok = max(errs) <= 1e-2 and max(gbs) <= 1e-2
    return report(capsys, 3, "geodesic spheres in H^3", ok,
                  "G~ err " + ", ".join(f"{e:.2e}" for e in errs)
                  + "; Gauss-Bonnet err " + ", ".join(f"{e:.2e}" for e in gbs))


def check_two_point(capsys=None):
    rows, _, _ = experiment("two-point")
    r = rows[0]
    ok = r["rel_err"] <= 0.05 and r["slope"] >= 4.5 and abs(r["predicted"] - 3.3333e-5) < 1e-9
    return report(capsys, 4, "two-point expansion", ok,
                  f"measured {r['measured']:.5e} vs {r['predicted']:.5e} "
                  f"(rel {r['rel_err']:.2e}); slope {r['slope']:.3f}")


def check_chord_law(capsys=None):
    rows, _, _ = experiment("chord-fit")
    ok = all(r["rel_err"] <= 0.02 for r in rows)
    return report(capsys, 5, "chord-curvature law", ok,
                  "; ".join(f"{r['fixture']} kappa^ {r['kappa_hat']:.5f} (rel {r['rel_err']:.1e})"
                            for r in rows))


def check_schur(capsys=None):
    rows, _, secs = experiment("schur-suite")
    hyp = [r for r in rows if r.get("hypothesis_holds")]
    viol = [r for r in hyp if not r["passed"]]
    ok = len(rows) == 500 and len(hyp) == 500 and not viol and secs <= 120
    return report(capsys, 6, "Schur suite", ok,
                  f"{len(hyp)}/{len(rows)} hypotheses verified, {len(viol)} violations, "
                  f"min conclusion margin {min(r['conclusion_margin'] for r in hyp):.3e}; "
                  f"{secs:.1f} s")


def check_majorization(capsys=None):
    rows, ok_all, _ = experiment("majorize")
    bad = [r for r in rows if not r["passed"]]
    ok = len(rows) == 200 and not bad and ok_all
    worst = max(r.get("chord_deficit", np.inf) for r in rows)
    return report(capsys, 7, "majorization postconditions", ok,
                  f"{len(rows) - len(bad)}/{len(rows)} majorants verified; "
                  f"max chord deficit {worst:.2e}; max turning excess "
                  f"{max(r.get('turn_excess', np.inf) for r in rows):.2e}")


def check_parallel_flow(capsys=None):
    rows, ok_all, _ = experiment("parallel-flow")
    sphere = [r for r in rows if "t" in r and r["t"] is not None and "expected" in r]
    bodies = [r for r in rows if "worst_drop" in r]
    s_err = max(abs(r["G"] / r["expected"] - 1) for r in sphere)
    drop = max(r.get("worst_drop", np.inf) for r in bodies)
    ok = ok_all and len(bodies) == 50 and len(sphere) == 10 and s_err <= 1e-2 and drop <= 5e-3
    return report(capsys, 8, "parallel-flow monotonicity", ok,
                  f"worst relative drop over {len(bodies)} bodies {drop:.2e}; "
                  f"sphere vs 4pi cosh^2(r+t) max err {s_err:.2e}")


def check_kleiner(capsys=None):
    rows, ok_all, _ = experiment("kleiner-chain")
    poly = rows[0]
    chains = rows[1:]
    e0 = abs(poly["hull_curvature"] - FOUR_PI)
    ok = ok_all and len(chains) == 100 and e0 <= 1e-9
    return report(capsys, 9, "Kleiner chain", ok,
                  f"{sum(bool(r['passed']) for r in chains)}/{len(chains)} chains ordered; "
                  f"Euclidean hull |G0 - 4pi| {e0:.1e}")


def check_develop(capsys=None):
    rows, ok_all, _ = experiment("develop")
    strips = rows[:2]
    ok = ok_all and all(
        r["path_defect"] <= 1e-6 and r["first_form"] <= 1e-4 and r["path_lengths"] <= 1e-4
        and abs(r["tau_source"] - r["tau_image"]) <= 1e-3 * (1 + r["tau_source"])
        and r["normal_defect"] <= 1e-4 and r["scaled_control"] > 1e-4 and r["frame_control"] > 1e-4
        for r in strips) and rows[2]["passed"]
    return report(capsys, 10, "developing map", ok,
                  "; ".join(f"{r['fixture']}: hol {r['path_defect']:.1e}, iso "
                            f"{max(r['first_form'], r['path_lengths']):.1e}, nu "
                            f"{r['normal_defect']:.1e}" for r in strips)
                  + f"; sphere patch rejected {rows[2]['passed']}")


def check_gauss_map(capsys=None):
    rows, ok_all, _ = experiment("gauss-map")
    ok = ok_all and all(abs(r["gauss_area"] / r["total_abs"] - 1) <= 0.02
                        and r["min_multiplicity"] >= 2 for r in rows)
    return report(capsys, 11, "Gauss-map cross-check", ok,
                  "; ".join(f"{r['surface']} {r['gauss_area'] / r['total_abs'] - 1:+.2e} "
                            f"(mult {r['min_multiplicity']})" for r in rows))


def check_determinism(capsys=None):
    same = []
    for name, params, jobs in [("schur-suite", "n_instances=40", (1, 2)),
                               ("majorize", "n_instances=20", (2, 1)),
                               ("chern-lashof", "n_instances=4", (1, 1))]:
        blobs = []
        for k, j in enumerate(jobs):
            out = f"{_OUT}/det{k}"
            cli.main([name, "--set", params, "--jobs", str(j), "--out", out])
            with open(f"{out}/{name}/results.csv", "rb") as fh:
                blobs.append(fh.read())
        same.append(blobs[0] == blobs[1])
    return report(capsys, 12, "determinism", all(same),
                  f"{sum(same)}/{len(same)} reruns byte-identical (including different --jobs)")


CRITERIA = [check_chern_lashof_floor, check_tight_torus, check_hyperbolic_spheres,
            check_two_point, check_chord_law, check_schur, check_majorization,
            check_parallel_flow, check_kleiner, check_develop, check_gauss_map,
            check_determinism]


@pytest.mark.parametrize("check", CRITERIA, ids=[c.__name__[6:] for c in CRITERIA])
def test_criterion(check, capsys):
    assert check(capsys)


if __name__ == "__main__":
    sys.exit(0 if all([c() for c in CRITERIA]) else 1)

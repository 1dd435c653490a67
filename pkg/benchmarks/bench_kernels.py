"""Time the JIT kernels against their pure-numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each backend runs in its own interpreter (the switch is read at import
time).  JIT compilation happens in a warm-up call and is reported
separately.  Results from both backends are compared element-wise.
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from chgeom import _kernels as K
from chgeom._accel import backend
from chgeom.spaces import Hyperbolic

repeat = int(sys.argv[1])
H = Hyperbolic(3)
rng = np.random.default_rng(0)
m = 200
ts = np.linspace(0.0, 1.0, m)
P = rng.normal(scale=0.3, size=(m, 3))
D = np.gradient(P, ts, axis=0)
V0 = np.eye(3)
pts = rng.normal(scale=0.5, size=(20000, 3))
A = rng.normal(size=(20000, 2, 3))

cases = {
    "transport_nodes": lambda: K.transport_nodes(H.model_id, ts, P, D, V0, 8)[0],
    "gram_batch": lambda: K.gram_batch(H.model_id, pts, A, A),
    "christoffel_batch": lambda: K.christoffel_batch(H.model_id, pts, A[:, 0], A[:, 1]),
}
out = {"backend": backend(), "cases": {}}
for name, f in cases.items():
    t0 = time.perf_counter()
    ref = f()
    warm = time.perf_counter() - t0
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        f()
        best = min(best, time.perf_counter() - t0)
    out["cases"][name] = {"warmup": warm, "best": best,
                          "checksum": float(np.sum(np.abs(ref))), "sample": np.ravel(ref)[:8].tolist()}
print(json.dumps(out))
"""


def run(pure, repeat):
    env = dict(os.environ, CHGEOM_PURE_NUMPY="1" if pure else "0")
    res = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    jit, ref = run(False, args.repeat), run(True, args.repeat)
    print(f"{'kernel':<20}{jit['backend'] + ' (s)':>14}{'compile (s)':>14}"
          f"{ref['backend'] + ' (s)':>14}{'speedup':>10}{'agree':>8}")
    ok = True
    for name, a in jit["cases"].items():
        b = ref["cases"][name]
        agree = abs(a["checksum"] - b["checksum"]) <= 1e-9 * max(1.0, abs(b["checksum"]))
        ok &= agree
        print(f"{name:<20}{a['best']:>14.4g}{a['warmup'] - a['best']:>14.3g}"
              f"{b['best']:>14.4g}{b['best'] / a['best']:>10.1f}{str(agree):>8}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy twins.

Both backend modules are imported directly, so no environment flag is
needed here.  Every case is checked for bitwise-identical output before
timing; a speedup below 1.0 means numpy won.  Use ``--pipeline`` to also
time a full build-and-fit run in subprocesses, one per BIORTHO_KERNELS
setting, which exercises backend selection the way users hit it.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from biortho.kernels import _numpy as knp

try:
    from biortho.kernels import _numba as knb
except ImportError:
    knb = None

KERNELS = (
    "dot_w",
    "row_dots",
    "row_norms_sq",
    "weighted_gram",
    "mgs_residual",
    "combine_rows",
    "grow_duals",
    "drop_dual",
)


def make_cases(n_atoms: int, n_points: int, seed: int):
    rng = np.random.default_rng(seed)
    w = np.full(n_points, 1.0 / n_points)
    rows = np.ascontiguousarray(rng.standard_normal((n_atoms, n_points)))
    v = rng.standard_normal(n_points)
    q, _ = np.linalg.qr(rng.standard_normal((n_points, n_atoms)))
    basis = np.ascontiguousarray(q.T)
    g = rng.standard_normal(n_atoms)
    return {
        "dot_w": (w, v, v),
        "row_dots": (w, rows, v),
        "row_norms_sq": (w, rows),
        "weighted_gram": (w, rows),
        "mgs_residual": (w, basis, v),
        "combine_rows": (g, rows),
        "grow_duals": (rows, g, v, 2.0),
        "drop_dual": (rows, g, n_atoms // 2, 2.0),
    }


def best_time(fn, args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def run_kernel_bench(n_atoms: int, n_points: int, repeats: int, seed: int):
    cases = make_cases(n_atoms, n_points, seed)
    results = []
    for name in KERNELS:
        args = cases[name]
        f_np = getattr(knp, name)
        f_nb = getattr(knb, name)
        out_np = f_np(*args)
        out_nb = f_nb(*args)  # first call also compiles
        if not np.array_equal(np.asarray(out_np), np.asarray(out_nb)):
            raise SystemExit(f"{name}: backends disagree, refusing to time")
        t_np = best_time(f_np, args, repeats)
        t_nb = best_time(f_nb, args, repeats)
        results.append({
            "kernel": name,
            "numpy_s": t_np,
            "numba_s": t_nb,
            "speedup": t_np / t_nb if t_nb > 0 else float("inf"),
        })
    return results


_PIPELINE_SNIPPET = """
import time
import numpy as np
from biortho import Grid, Signal, build_duals, fit, mexican_hat_dictionary
from biortho import kernels

grid = Grid(-10.0, 10.0, {n_points})
d = mexican_hat_dictionary(grid, [c * 0.5 for c in range(-20, 21)])
rng = np.random.default_rng(7)
f = Signal(grid, rng.standard_normal(grid.n_points))
state = build_duals(d)  # warm compile outside the timed loop
best = float("inf")
for _ in range({repeats}):
    start = time.perf_counter()
    state = build_duals(d)
    fit(state, f)
    best = min(best, time.perf_counter() - start)
print(kernels.BACKEND, best)
"""


def run_pipeline_bench(n_points: int, repeats: int):
    results = {}
    code = _PIPELINE_SNIPPET.format(n_points=n_points, repeats=repeats)
    for backend in ("numpy", "numba"):
        env = dict(os.environ, BIORTHO_KERNELS=backend)
        proc = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True, text=True, env=env,
        )
        if proc.returncode != 0:
            raise SystemExit(f"pipeline run failed under {backend}:\n{proc.stderr}")
        reported, seconds = proc.stdout.split()
        assert reported == backend, f"expected {backend}, selected {reported}"
        results[backend] = float(seconds)
    return results


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--atoms", type=int, default=40)
    ap.add_argument("--points", type=int, default=4001)
    ap.add_argument("--repeats", type=int, default=25)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--pipeline", action="store_true",
                    help="also time a 41-atom build-and-fit per backend")
    ap.add_argument("--json", dest="json_out", default=None,
                    help="write results to this JSON file")
    ns = ap.parse_args(argv)

    if knb is None:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1

    results = run_kernel_bench(ns.atoms, ns.points, ns.repeats, ns.seed)
    width = max(len(r["kernel"]) for r in results)
    print(f"kernel benchmark: {ns.atoms} atoms x {ns.points} points, "
          f"best of {ns.repeats}")
    print(f"{'kernel':<{width}}  {'numpy (ms)':>12}  {'numba (ms)':>12}  speedup")
    for r in results:
        print(f"{r['kernel']:<{width}}  {r['numpy_s'] * 1e3:>12.4f}  "
              f"{r['numba_s'] * 1e3:>12.4f}  {r['speedup']:>6.2f}x")

    payload = {"kernels": results}
    if ns.pipeline:
        pipe = run_pipeline_bench(ns.points, max(3, ns.repeats // 5))
        payload["pipeline"] = pipe
        print(f"\nbuild-and-fit pipeline ({ns.points} points): "
              f"numpy {pipe['numpy'] * 1e3:.1f} ms, "
              f"numba {pipe['numba'] * 1e3:.1f} ms, "
              f"speedup {pipe['numpy'] / pipe['numba']:.2f}x")

    if ns.json_out:
        with open(ns.json_out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

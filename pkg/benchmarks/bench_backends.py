"""Benchmark: compiled kernel core vs pure-numpy fallback.

Times the three hot batch operations on hemisphere meshes of increasing
size and prints a comparison table.  Run as

    python benchmarks/bench_backends.py [--sizes 8,16,24]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from degenpot import _pykern, backend
from degenpot.kernel import Params
from degenpot.surface import hemisphere_mesh

try:
    from degenpot import _ckern
except ImportError:
    _ckern = None


def best_of(fn, repeats=3):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def run(sizes, alpha=0.3):
    prm = Params(3, alpha)
    kt = backend.tables(prm)
    impls = [("python", _pykern)] + ([("compiled", _ckern)] if _ckern else [])
    rng = np.random.default_rng(0)
    header = f"{'operation':<22}{'N':>6}{'python [s]':>14}{'compiled [s]':>14}{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for n_theta in sizes:
        mesh = hemisphere_mesh(1.0, n_theta, 2 * n_theta, 3.0, prm)
        n = mesh.n_nodes
        targets = rng.uniform(0.1, 0.5, (64, 3))
        ops = {
            "q1_cross(64 targets)": lambda impl: impl.q1_cross(mesh.nodes, targets, kt),
            "k1_cross(64 targets)": lambda impl: impl.k1_cross(
                mesh.nodes, mesh.normals, mesh.x1w, targets, kt
            ),
            "assemble_offdiag": lambda impl: impl.assemble_offdiag(
                mesh.nodes, mesh.normals, mesh.weights, mesh.x1w, kt
            ),
        }
        for name, op in ops.items():
            results = {}
            times = {}
            for impl_name, impl in impls:
                times[impl_name], results[impl_name] = best_of(lambda: op(impl))
            if _ckern:
                ref = results["python"]
                dev = np.max(np.abs(results["compiled"] - ref) / (np.abs(ref) + 1e-300))
                assert dev < 1e-12, f"backend mismatch {dev:.2e} in {name}"
                speed = times["python"] / times["compiled"]
                print(
                    f"{name:<22}{n:>6}{times['python']:>14.4f}"
                    f"{times['compiled']:>14.4f}{speed:>9.1f}x"
                )
            else:
                print(f"{name:<22}{n:>6}{times['python']:>14.4f}{'n/a':>14}{'':>10}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="8,16,32", help="comma-separated n_theta values")
    args = ap.parse_args()
    run([int(s) for s in args.sizes.split(",")])

"""Compare the compiled split-scan kernel against the numpy fallback.

Times the raw candidate scan over single nodes of growing size, then a full
trade-off curve per method with each backend driving tree growth.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
"""

import statistics
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fairtrees._kernel.scan_py import scan_split_candidates as scan_python  # noqa: E402

try:
    from fairtrees._kernel._scan import scan_split_candidates as scan_compiled
except ImportError:
    scan_compiled = None

from fairtrees.data import synth_biased  # noqa: E402
from fairtrees.harness import MethodSpec, gamma_grid, make_trainer  # noqa: E402
from fairtrees.metrics import build_curve  # noqa: E402
from fairtrees.data import holdout_split  # noqa: E402
from fairtrees.tree import GrowthLimits  # noqa: E402

REPEATS = 7


def timeit(fn, *args):
    best = []
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        best.append(time.perf_counter() - t0)
    return statistics.median(best)


def node_arrays(n, rng):
    X = np.ascontiguousarray(np.column_stack([
        rng.normal(size=n), rng.normal(size=n), rng.uniform(size=n),
        rng.integers(0, 2, n).astype(float), rng.integers(0, 2, n).astype(float),
    ]))
    y = rng.integers(0, 2, n).astype(np.uint8)
    s = rng.integers(0, 2, n).astype(np.uint8)
    kinds = np.array([1, 1, 1, 0, 0], dtype=np.uint8)
    return X, y, s, kinds


def bench_scans():
    print("split-candidate scan, one node, 10 thresholds/column")
    print(f"{'rows':>9} {'python (ms)':>12} {'compiled (ms)':>14} {'speedup':>8}")
    rng = np.random.default_rng(0)
    for n in (1_000, 10_000, 100_000, 400_000):
        X, y, s, kinds = node_arrays(n, rng)
        t_py = timeit(scan_python, X, y, s, kinds, 10, max(1, n // 100)) * 1e3
        if scan_compiled is None:
            print(f"{n:>9} {t_py:>12.3f} {'(not built)':>14} {'-':>8}")
            continue
        t_c = timeit(scan_compiled, X, y, s, kinds, 10, max(1, n // 100)) * 1e3
        print(f"{n:>9} {t_py:>12.3f} {t_c:>14.3f} {t_py / t_c:>7.1f}x")


def bench_curves(backend_scan, label):
    # tree growth resolves the kernel through fairtrees.data's module global
    import fairtrees.data as data_mod

    data_mod.scan_split_candidates = backend_scan
    ds = synth_biased(5000, 0.8, seed=3)
    train, test = holdout_split(ds, 2 / 3, seed=0)
    out = {}
    for name in ("two_trees", "combined", "constrained", "backtracking"):
        spec = MethodSpec(name)
        limits = GrowthLimits(max_depth=6, min_samples=0.05, n_total=train.n)
        trainer = make_trainer(name, limits)
        t0 = time.perf_counter()
        build_curve(trainer, train, test, gamma_grid(spec))
        out[name] = time.perf_counter() - t0
    print(f"\nfull 50-point curve, n=5000, depth 6 [{label} backend]")
    for name, sec in out.items():
        print(f"  {name:>12}: {sec * 1e3:8.1f} ms")
    return out


def main():
    bench_scans()
    py = bench_curves(scan_python, "python")
    if scan_compiled is None:
        print("\ncompiled kernel not built; run: python3 setup.py build_ext --inplace")
        return
    comp = bench_curves(scan_compiled, "compiled")
    print("\ncurve speedup compiled vs python:")
    for name in py:
        print(f"  {name:>12}: {py[name] / comp[name]:5.1f}x")


if __name__ == "__main__":
    main()

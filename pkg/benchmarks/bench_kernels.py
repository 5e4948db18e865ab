#!/usr/bin/env python3
"""Benchmark the compiled template-scan kernel against the numpy fallback.

Run:  python benchmarks/bench_kernels.py
The two lanes share one contract (exact integer SSD, first row-major
minimum), so this only measures speed: results are asserted identical.
"""

import statistics
import time

import numpy as np

from adwar.perceptual import _kernels_py

try:
    from adwar.perceptual import _kernels_cy
except ImportError:
    _kernels_cy = None

CASES = [
    # (name, haystack hw, template hw) modeled on real workloads
    ("icon-in-creative", (250, 300), (16, 20)),
    ("icon-half-scale", (250, 300), (8, 10)),
    ("word-in-banner", (90, 280), (7, 53)),
    ("small-fixture", (64, 64), (8, 8)),
]


def run(kernel, hay, tmpl, repeats):
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = kernel.best_ssd_match(hay, tmpl)
        times.append(time.perf_counter() - t0)
    return result, min(times), statistics.mean(times)


def main():
    rng = np.random.default_rng(7)
    lanes = [("python", _kernels_py)]
    if _kernels_cy is not None:
        lanes.insert(0, ("compiled", _kernels_cy))
    else:
        print("compiled lane unavailable (extension not built)\n")

    print(f"{'case':<18} {'lane':<9} {'best ms':>10} {'mean ms':>10}   result")
    for name, (hh, hw), (th, tw) in CASES:
        hay = rng.integers(0, 256, size=(hh, hw), dtype=np.uint8)
        tmpl = rng.integers(0, 256, size=(th, tw), dtype=np.uint8)
        results = {}
        for lane_name, kernel in lanes:
            repeats = 5 if (hh * hw > 32_000 and lane_name == "python") else 20
            result, best, mean = run(kernel, hay, tmpl, repeats)
            results[lane_name] = result
            print(
                f"{name:<18} {lane_name:<9} {best * 1000:>10.3f} {mean * 1000:>10.3f}   {result}"
            )
        if len(results) == 2:
            assert results["compiled"] == results["python"], name
        print()


if __name__ == "__main__":
    main()

"""Compare the compiled recursion kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [N ...]
"""

from __future__ import annotations

import sys
import timeit

import numpy as np

from holepair import _recursion_py as slow
from holepair.exact_recursive import RecursionParams, branch_weights

try:
    from holepair import _recursion as fast
except ImportError:
    fast = None


def cases(p, q):
    return {
        "density": lambda m: m.density(p, q),
        "pair_particle(d=1)": lambda m: m.pair_particle(p, q, 1),
        "hole_count": lambda m: m.hole_count(p, q),
    }


def main(sizes) -> None:
    if fast is None:
        print("compiled extension not built; only the numpy path is available")
    print(f"{'kernel':<20}{'N':>7}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>9}{'max |diff|':>12}")
    for N in sizes:
        p, q = branch_weights(RecursionParams.from_dimensionless(N, 2.0, 0.3))
        for name, f in cases(p, q).items():
            reps = max(1, int(2e6 // (N * N)))
            t_slow = min(timeit.repeat(lambda: f(slow), number=reps, repeat=3)) / reps
            if fast is None:
                print(f"{name:<20}{N:>7}{t_slow:>12.3e}")
                continue
            t_fast = min(timeit.repeat(lambda: f(fast), number=reps, repeat=3)) / reps
            diff = float(np.max(np.abs(np.asarray(f(slow)) - np.asarray(f(fast)))))
            print(f"{name:<20}{N:>7}{t_slow:>12.3e}{t_fast:>12.3e}{t_slow / t_fast:>9.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main([int(a) for a in sys.argv[1:]] or [100, 1000, 4000])

"""Compare the compiled sampling kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--shots N] [--repeat R]

Both backends are timed on the same single-stage and two-stage workloads
and their counts are checked for equality.
"""

import argparse
import time

import numpy as np

from weakstat import _kernels_py
from weakstat.sampler import _cdf, sequential_probabilities
from weakstat.scenarios import double_slit_scenario
from weakstat.tomography import build_weak_povm, gell_mann_basis, outcome_probabilities

try:
    from weakstat import _kernels as compiled
except ImportError:
    compiled = None


def workload():
    sc = double_slit_scenario()
    povm = build_weak_povm(gell_mann_basis(2), 0.05)
    p_m = outcome_probabilities(sc.initial, povm)
    joint = sequential_probabilities(sc.initial, povm, list(sc.final_pvm.values()))
    second = np.ascontiguousarray([_cdf(row / p) for row, p in zip(joint, p_m)])
    return _cdf(p_m), second


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(mod, shots, repeat, first, second):
    key = mod.stream_key(1234)

    def single():
        c = np.zeros(first.size, dtype=np.int64)
        mod.count_categorical(key, 0, shots, first, c)
        return c

    def double():
        c = np.zeros(second.shape, dtype=np.int64)
        mod.count_two_stage(key, 0, shots, first, second, c)
        return c

    t1, c1 = best_time(single, repeat)
    t2, c2 = best_time(double, repeat)
    return (t1, c1), (t2, c2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=10**7)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    first, second = workload()
    rows = {"numpy": bench(_kernels_py, args.shots, args.repeat, first, second)}
    if compiled is not None:
        rows["cython"] = bench(compiled, args.shots, args.repeat, first, second)
    print(f"shots {args.shots:,}, best of {args.repeat}")
    print(f"{'backend':<8} {'single-stage':>14} {'two-stage':>14} {'Mshots/s (2-stage)':>20}")
    for name, ((t1, _), (t2, _)) in rows.items():
        print(f"{name:<8} {t1:>13.3f}s {t2:>13.3f}s {args.shots / t2 / 1e6:>20.1f}")
    if compiled is None:
        print("compiled extension not built; only the fallback was timed")
        return
    (t1p, c1p), (t2p, c2p) = rows["numpy"]
    (t1c, c1c), (t2c, c2c) = rows["cython"]
    same = np.array_equal(c1p, c1c) and np.array_equal(c2p, c2c)
    print(f"speedup  {t1p / t1c:>13.1f}x {t2p / t2c:>13.1f}x")
    print(f"identical counts: {same}")


if __name__ == "__main__":
    main()

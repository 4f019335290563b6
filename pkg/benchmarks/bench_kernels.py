#!/usr/bin/env python3
"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from thinwidth import _kernels
from thinwidth.morse import random_knot


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def report(name, py_fn, nb_fn, repeat):
    t_py, r_py = best_of(py_fn, repeat)
    if nb_fn is None:
        print(f"{name:<24} numpy {t_py * 1e3:9.3f} ms   numba    n/a")
        return
    nb_fn()  # compile
    t_nb, r_nb = best_of(nb_fn, repeat)
    assert np.array_equal(np.asarray(r_py), np.asarray(r_nb)), f"{name}: paths disagree"
    print(f"{name:<24} numpy {t_py * 1e3:9.3f} ms   numba {t_nb * 1e3:9.3f} ms   x{t_py / t_nb:6.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    py, nb = _kernels.PY_KERNELS, _kernels.NB_KERNELS
    if not nb:
        print("numba unavailable or disabled; timing the numpy path only")

    def run(label, name, *kargs, repeat=args.repeat):
        nb_fn = (lambda: nb[name](*kargs)) if nb else None
        report(label, lambda: py[name](*kargs), nb_fn, repeat)

    big = random_knot(rng, 20000).kinds
    run("width 20k events", "width", big, 0)
    run("min_level 20k events", "min_level", big, 0)
    mid = random_knot(rng, 600).kinds
    run("block swap 200x200", "transposition_deltas", mid, 0, 100, 300, 500)
    small = random_knot(rng, 14).kinds
    run("oracle dp 14 events", "min_width_dp", small, 0, np.zeros(14, dtype=np.int64), repeat=max(1, args.repeat // 2))


if __name__ == "__main__":
    main()

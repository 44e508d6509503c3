"""Time the compiled and vectorized incomplete-gamma kernels on the same inputs.

    python3 benchmarks/bench_gamma.py [--n 200000] [--repeat 5]
"""
import argparse
import time

import numpy as np

from qwl import _kernels


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    s = rng.uniform(-0.9, 4.0, args.n)
    s[::7] = 0.0
    x = 10.0 ** rng.uniform(-4, 1.5, args.n)

    # the lower function is only needed for positive exponents
    s_pos = rng.uniform(0.05, 4.0, args.n)

    print(f"n = {args.n}, best of {args.repeat}")
    for label, nb_fn, np_fn, s in (
        ("upper", _kernels.gamma_upper_array, _kernels.gamma_upper_array_numpy, s),
        ("lower", _kernels.gamma_lower_array, _kernels.gamma_lower_array_numpy, s_pos),
    ):
        t_np, ref = best_of(np_fn, (s, x), args.repeat)
        if not _kernels.HAVE_NUMBA:
            print(f"{label:>6}: numpy {t_np * 1e3:8.2f} ms  (numba unavailable or disabled)")
            continue
        nb_fn(s[:10], x[:10])  # compile outside the timing
        t_nb, out = best_of(nb_fn, (s, x), args.repeat)
        rel = np.max(np.abs(out - ref) / np.maximum(np.abs(ref), 1e-300))
        print(f"{label:>6}: numpy {t_np * 1e3:8.2f} ms  numba {t_nb * 1e3:8.2f} ms  "
              f"speedup {t_np / t_nb:5.1f}x  max rel diff {rel:.1e}")


if __name__ == "__main__":
    main()

"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat N]

Each kernel runs once to warm up the JIT, then the best of N runs is kept.
Outputs of the two backends are compared before timing.
"""

import argparse
import time

import numpy as np

from micropump import kernels
from micropump._accel import NUMBA_AVAILABLE


def best_of(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    radii = 1.25e-3 + 45e-6 * np.arange(10) + 12.5e-6
    zs = np.zeros(10)
    cur = np.ones(10)
    r = rng.uniform(0, 1.2e-3, 20000)
    z = rng.uniform(1e-5, 1e-3, 20000)
    yield "loop_field (10 loops x 20000 pts)", kernels.loop_field_numba, kernels.loop_field_numpy, (radii, zs, cur, r, z)
    yield ("loop_field_quadrature (2^16 panels)", kernels.loop_field_quadrature_numba,
           kernels.loop_field_quadrature_numpy, (1e-3, 1.0, 5e-4, 5e-4, 1 << 16))
    yield ("assemble_biharmonic (257 x 257)", kernels.assemble_biharmonic_numba,
           kernels.assemble_biharmonic_numpy, (257, 257, 1.0 / 256, 1.0 / 256))
    yield ("disc_load_fraction (257 x 257, sub 32)", kernels.disc_load_fraction_numba,
           kernels.disc_load_fraction_numpy, (257, 257, 1.0 / 256, 1.0 / 256, 0.5, 0.5, 0.3, 32))


def same(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return all(np.allclose(x, y, rtol=1e-10, atol=0, equal_nan=True) for x, y in zip(a, b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")
    print(f"{'kernel':<42}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  match")
    for name, f_nb, f_np, a in cases():
        t_np = best_of(f_np, a, args.repeat)
        t_nb = best_of(f_nb, a, args.repeat)
        ok = same(f_nb(*a), f_np(*a))
        print(f"{name:<42}{t_np * 1e3:12.2f}{t_nb * 1e3:12.2f}{t_np / t_nb:10.1f}  {ok}")


if __name__ == "__main__":
    main()

"""Benchmark the numba kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py [--size 128] [--repeat 50]

Times the stencil operators and the 5x5 curvature-pair accumulation on a
disc-masked random surface, plus one full energy+gradient evaluation
through each backend (set BOUNDCUE_BACKEND to pick the backend used by
the library at import time; this script imports both directly).
"""

import argparse
import time

import numpy as np

from boundcue.gsm import GsmParams
from boundcue.kernels import _numpy_impl

try:
    from boundcue.kernels import _numba_impl
except ImportError:
    _numba_impl = None


def make_case(size, seed=0):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((size, size))
    for _ in range(3):
        z = 0.25 * (np.roll(z, 1, 0) + np.roll(z, -1, 0) + np.roll(z, 1, 1) + np.roll(z, -1, 1))
    yy, xx = np.mgrid[0:size, 0:size]
    mask = (xx - size / 2) ** 2 + (yy - size / 2) ** 2 <= (0.45 * size) ** 2
    return np.ascontiguousarray(z), np.ascontiguousarray(mask)


def timeit(fn, repeat):
    fn()  # warm-up (JIT compile on the numba side)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()

    z, mask = make_case(args.size)
    g = GsmParams()
    c = np.ascontiguousarray(np.random.default_rng(1).standard_normal(z.shape))

    cases = [
        ("grad_x", lambda impl: impl.grad_x(z, mask)),
        ("grad_y", lambda impl: impl.grad_y(z, mask)),
        ("grad_x_adj", lambda impl: impl.grad_x_adj(c, mask)),
        ("second_x", lambda impl: impl.second_x(z, mask)),
        ("pair_energy_5x5", lambda impl: impl.pair_energy_5x5(z, mask, g.a_log, g.inv2s2, g.invs2)),
    ]
    print(f"size={args.size}  repeat={args.repeat}")
    header = f"{'kernel':18s} {'numpy':>10s}"
    if _numba_impl is not None:
        header += f" {'numba':>10s} {'speedup':>8s}"
    print(header)
    for name, call in cases:
        t_np = timeit(lambda: call(_numpy_impl), args.repeat)
        line = f"{name:18s} {t_np * 1e3:9.3f}ms"
        if _numba_impl is not None:
            t_nb = timeit(lambda: call(_numba_impl), args.repeat)
            line += f" {t_nb * 1e3:9.3f}ms {t_np / t_nb:7.1f}x"
        print(line)

    # end-to-end energy evaluation through the installed backend
    from boundcue.annotations import AnnotationSet
    from boundcue.energies import CueWeights, total_energy
    from boundcue.geometry import HeightField
    from boundcue import kernels

    hf = HeightField(np.where(mask, z, 0.0), mask)
    aset = AnnotationSet(width=z.shape[1], height=z.shape[0], mask=mask)
    w = CueWeights(delta_sfc=1, delta_reg=1)
    t = timeit(lambda: total_energy(hf, aset, w), max(5, args.repeat // 10))
    print(f"\ntotal_energy+grad via BOUNDCUE_BACKEND={kernels.BACKEND}: {t * 1e3:.2f}ms")


if __name__ == "__main__":
    main()

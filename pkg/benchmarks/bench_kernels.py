"""Compare the compiled and numpy kernels on the hot paths.

    python benchmarks/bench_kernels.py [--repeat 5]

Reports the best wall time per call and the largest relative difference
between the two backends.
"""
import argparse
import timeit

import numpy as np

from stokespec import _backend, _pykernels


def cases():
    rng = np.random.default_rng(0)
    x_small = rng.uniform(0.05, 60.0, 2_000)
    x_large = rng.uniform(0.05, 60.0, 200_000)
    t = np.cos(np.linspace(0.01, np.pi - 0.01, 64))
    t_large = np.cos(np.linspace(0.01, np.pi - 0.01, 4_096))
    return [
        ("jhalf_range n=-12..11, 2k points", "jhalf_range", (-12, 11, x_small)),
        ("jhalf_range n=-12..11, 200k points", "jhalf_range", (-12, 11, x_large)),
        ("legendre_table lmax=32, 64 nodes", "legendre_table", (32, t)),
        ("legendre_table lmax=64, 4096 nodes", "legendre_table", (64, t_large)),
    ]


def max_rel_diff(a, b):
    """Largest row-wise max|a - b| / max|a|, over every returned table."""
    out = 0.0
    for x, y in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
        x, y = np.asarray(x), np.asarray(y)
        x2, y2 = x.reshape(len(x), -1), y.reshape(len(y), -1)
        scale = np.max(np.abs(x2), axis=1)
        scale[scale == 0] = 1
        out = max(out, float(np.max(np.max(np.abs(x2 - y2), axis=1) / scale)))
    return out


def best(func, args, repeat):
    number = 1
    while timeit.timeit(lambda: func(*args), number=number) < 0.05:
        number *= 4
    return min(timeit.repeat(lambda: func(*args), number=number, repeat=repeat)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    compiled = _backend._ckernels
    print(f"active backend: {_backend.BACKEND}")
    if compiled is None:
        print("compiled kernels unavailable; timing numpy kernels only")
    print(f"{'case':40s} {'numpy':>11s} {'cython':>11s} {'speedup':>8s} {'max rel diff':>13s}")
    for label, name, fargs in cases():
        py = getattr(_pykernels, name)
        t_py = best(py, fargs, args.repeat)
        if compiled is None:
            print(f"{label:40s} {t_py * 1e3:9.3f}ms")
            continue
        cy = getattr(compiled, name)
        t_cy = best(cy, fargs, args.repeat)
        diff = max_rel_diff(py(*fargs), cy(*fargs))
        print(f"{label:40s} {t_py * 1e3:9.3f}ms {t_cy * 1e3:9.3f}ms {t_py / t_cy:7.1f}x {diff:13.2e}")


if __name__ == "__main__":
    main()

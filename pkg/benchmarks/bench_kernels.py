"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from tpspace._backend import get_kernels


def _rays(rng, d, n):
    V = rng.normal(size=(d, n)) + 1j * rng.normal(size=(d, n))
    return np.ascontiguousarray(V / np.linalg.norm(V, axis=0))


def cases(rng):
    V = _rays(rng, 4, 12)
    P = np.ascontiguousarray(np.abs(V.conj().T @ _rays(rng, 4, 12)) ** 2)
    H = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    A = np.ascontiguousarray(H + H.conj().T)
    z0 = 0.3 * (rng.normal(size=3) + 1j * rng.normal(size=3))
    return {
        "overlap_matrix d=4 n=12": lambda k: k.overlap_matrix(V),
        "recon_loss_grad d=4 n=12": lambda k: k.recon_loss_grad(V, P),
        "rk4_segment d=4 1000 steps": lambda k: k.rk4_segment(A, z0, 0, 1.0, 1e-3, 1000, 1e6),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    py = get_kernels("python")
    try:
        cy = get_kernels("cython")
    except ImportError:
        print("compiled kernels not built; run pip install -e . --no-build-isolation")
        return 1
    print(f"{'kernel':<30}{'python':>12}{'cython':>12}{'speedup':>10}")
    for name, fn in cases(np.random.default_rng(0)).items():
        times = {}
        for label, k in (("python", py), ("cython", cy)):
            timer = timeit.Timer(lambda: fn(k))
            number, _ = timer.autorange()
            times[label] = min(timer.repeat(args.repeat, number)) / number
        print(f"{name:<30}{times['python'] * 1e6:>10.1f}us{times['cython'] * 1e6:>10.1f}us"
              f"{times['python'] / times['cython']:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 16]

Both backends are imported directly, so the comparison does not depend on
SMALLDEV_PURE_PYTHON. Results are checked for bit-identity before timing.
"""

import argparse
import math
import timeit

import numpy as np

from smalldev import _purepy

try:
    from smalldev import _kernels
except ImportError:
    _kernels = None


def enumerate_case(n, seed):
    """n two-atom variables with a threshold far above the support: no pruning, 2^n leaves."""
    rng = np.random.default_rng(seed)
    weights = sorted(rng.dirichlet(np.ones(n)).tolist(), reverse=True)
    values, probs = [], []
    for _ in range(n):
        lo = float(rng.uniform(0.0, 0.9))
        hi = float(rng.uniform(1.1, 3.0))
        q = (1.0 - lo) / (hi - lo)
        values.append([hi, lo])
        probs.append([q, 1.0 - q])
    return (values, probs, weights, 1e9, 1e-12), dict(prune=False)


def samuels_case(n, seed):
    rng = np.random.default_rng(seed)
    weights = sorted(rng.dirichlet(np.ones(n)).tolist(), reverse=True)
    prefix = [math.fsum(weights[: i + 1]) for i in range(n)]
    return (weights, prefix, 0.05), {}


def best_time(fn, args, kwargs, repeat):
    return min(timeit.repeat(lambda: fn(*args, **kwargs), number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=16, help="variables in the enumeration case (2^n leaves)")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if _kernels is None:
        raise SystemExit("compiled kernels not built; run `pip install -e . --no-build-isolation` first")

    cases = [
        (f"enumerate_below 2^{args.n} leaves", "enumerate_below", enumerate_case(args.n, args.seed)),
        ("samuels_terms n=16", "samuels_terms", samuels_case(16, args.seed)),
        ("samuels_terms n=2000", "samuels_terms", samuels_case(2000, args.seed)),
    ]
    print(f"{'kernel':<32}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for label, name, (fargs, kwargs) in cases:
        py_fn, cy_fn = getattr(_purepy, name), getattr(_kernels, name)
        if py_fn(*fargs, **kwargs) != cy_fn(*fargs, **kwargs):
            raise SystemExit(f"{label}: backends disagree")
        t_py = best_time(py_fn, fargs, kwargs, args.repeat)
        t_cy = best_time(cy_fn, fargs, kwargs, args.repeat)
        print(f"{label:<32}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()

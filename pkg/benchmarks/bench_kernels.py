"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --samples 1000000 --repeat 5
"""

import argparse
import timeit

import numpy as np

from eprsim.kernels import backends


def make_inputs(n: int, k: int, seed: int):
    rng = np.random.default_rng(seed)
    lam = rng.normal(size=(n, 3))
    lam /= np.linalg.norm(lam, axis=1, keepdims=True)
    axes = rng.normal(size=(k, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    u = rng.random((n, 2))
    return lam, axes, np.ascontiguousarray(u[:, 0]), np.ascontiguousarray(u[:, 1])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=1_000_000)
    parser.add_argument("--axes", type=int, default=4)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    lam, axes, u1, u2 = make_inputs(args.samples, args.axes, args.seed)
    cases = {
        "axis_signs": lambda m: m.axis_signs(lam, axes),
        "sign_gram": lambda m: m.sign_gram(lam, axes),
        "pair_outcomes": lambda m: m.pair_outcomes(u1, u2, 0.75),
    }
    impls = backends()
    if "cython" not in impls:
        print("compiled extension not built; only the numpy fallback is timed")

    print(f"n={args.samples} axes={args.axes} best of {args.repeat}")
    print(f"{'kernel':<15}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for label, fn in cases.items():
        best = {name: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for name, mod in impls.items()}
        speedup = best["python"] / best["cython"] if "cython" in best else float("nan")
        print(f"{label:<15}" + "".join(f"{best[n] * 1e3:>10.2f}ms" for n in impls) + f"{speedup:>9.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

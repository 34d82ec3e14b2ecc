"""Time the compiled and pure-Python traversal kernels on identical trees.

    python3 benchmarks/bench_backends.py --dim 128 --size 256 512
"""

import argparse
import time

import numpy as np

from dualtree_matmul import build_tree, kernels, normalize_cols, normalize_rows
from dualtree_matmul.datagen import make_operands
from dualtree_matmul.traversal import PruneRuleConfig, traverse_trees


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dim", type=int, default=128)
    p.add_argument("--size", type=int, nargs="+", default=[128, 256, 512])
    p.add_argument("--regime", choices=("uniform", "clustered"), default="clustered")
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    backends = sorted(kernels.BACKENDS)
    if "compiled" not in backends:
        print("compiled kernel not built; only the Python backend is timed")
    cfg = PruneRuleConfig(args.epsilon)
    print(f"{'size':>6} {'backend':>9} {'traverse_s':>11} {'naive_s':>9} {'dots':>10}")
    for size in args.size:
        a, b, _ = make_operands(args.regime, size, size, args.dim, args.seed,
                                epsilon=args.epsilon)
        tu = build_tree(normalize_rows(a))
        tv = build_tree(normalize_cols(b))
        ref = None
        for name in backends:
            t_trav, (cos, stats) = best_of(
                lambda: traverse_trees(tu, tv, cfg, backend=name), args.repeats)
            t_naive, _ = best_of(lambda: kernels.get(name).naive_multiply(a, b), args.repeats)
            if ref is None:
                ref = cos
            elif not np.allclose(ref, cos, rtol=0, atol=1e-12):
                raise SystemExit(f"backends disagree at size {size}")
            print(f"{a.shape[0]:>6} {name:>9} {t_trav:>11.4f} {t_naive:>9.4f} "
                  f"{stats.scalar_dot_products:>10}")


if __name__ == "__main__":
    main()

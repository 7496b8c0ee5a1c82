"""Time the compiled and pure-Python Ranking kernels on double-bomb graphs.

    python benchmarks/bench_kernels.py --ns 20,100,500 --samples 2000

Permutations are generated once per size and shared by both backends, so the
timings cover the matching loop only. Counts are compared as a sanity check.
"""

import argparse
import time

import numpy as np

from oblivious_ranking import kernels
from oblivious_ranking.graph import double_bomb
from oblivious_ranking.sampling import permutation_block


def bench(kg, orders, module, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        counts, _ = kernels.ranking_batch(kg, orders, module=module)
        best = min(best, time.perf_counter() - start)
    return best, counts


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--ns", default="20,100,500")
    p.add_argument("--eps", type=float, default=0.63)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        print("compiled kernel not built; timing the Python fallback only")
    print(f"{'n':>5} {'nodes':>6} " + " ".join(f"{name + ' us/run':>16}" for name in backends) + "  speedup")
    for n in (int(v) for v in args.ns.split(",")):
        g, _ = double_bomb(n, args.eps)
        kg = kernels.KernelGraph.from_graph(g)
        orders = permutation_block(args.seed, 0, args.samples, g.node_count)
        times = {}
        counts = {}
        for name, mod in backends.items():
            t, c = bench(kg, orders, mod, args.repeat)
            times[name] = t / args.samples * 1e6
            counts[name] = c
        if len(counts) == 2:
            assert np.array_equal(counts["python"], counts["cython"]), "backends disagree"
            speedup = f"{times['python'] / times['cython']:7.1f}x"
        else:
            speedup = "      -"
        print(f"{n:>5} {g.node_count:>6} " + " ".join(f"{times[k]:>16.1f}" for k in backends) + "  " + speedup)


if __name__ == "__main__":
    main()

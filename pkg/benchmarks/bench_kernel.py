"""Compare the compiled reachability kernel against the pure-Python one.

Both implement the same 0-1 BFS; this script checks they return identical
paths on random machines and prints a timing table.

    python3 benchmarks/bench_kernel.py [--states N] [--repeat R]
"""

import argparse
import random
import time

from agverify import _kernel
from agverify._kernel import _pure


def random_instance(rng, n_states, density=4, tau_chance=0.1):
    src, label, dst = [], [], []
    for q in range(n_states):
        for _ in range(density):
            src.append(q)
            label.append(-1 if rng.random() < tau_chance
                         else rng.randrange(4))
            dst.append(rng.randrange(n_states))
    target = bytearray(n_states)
    for _ in range(max(1, n_states // 50)):
        target[rng.randrange(n_states)] = 1
    return src, label, dst, bytes(target)


def run(fn, instances, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = [fn(n, 0, s, l, d, t) for n, s, l, d, t in instances]
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--states", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--instances", type=int, default=20)
    args = ap.parse_args()

    if _kernel.BACKEND != "compiled":
        print("warning: compiled kernel unavailable, comparing pure "
              "against itself")
    compiled = _kernel.shortest_error_path
    pure = _pure.shortest_error_path

    rng = random.Random(0)
    sizes = [args.states // 100, args.states // 10, args.states]
    print("backend in use: %s" % _kernel.BACKEND)
    print("%10s %10s %12s %12s %8s" % ("states", "instances",
                                       "compiled(s)", "pure(s)", "speedup"))
    for n in sizes:
        instances = []
        for _ in range(args.instances):
            src, label, dst, target = random_instance(rng, n)
            instances.append((n, src, label, dst, target))
        tc, out_c = run(compiled, instances, args.repeat)
        tp, out_p = run(pure, instances, args.repeat)
        for a, b in zip(out_c, out_p):
            assert a == b, "kernels disagree on a witness path"
        print("%10d %10d %12.4f %12.4f %7.1fx" % (
            n, args.instances, tc, tp, tp / tc if tc else float("inf")))
    print("all witness paths identical across backends")


if __name__ == "__main__":
    main()

"""Wall-clock comparison of the compiled and pure-Python kernels.

    python benchmarks/compare_backends.py --sizes 64,128,256 --reps 3

Both backends produce identical tables and counters; only the time differs.
"""
from __future__ import annotations

import argparse
import statistics
import sys
import time

from frfold import _backend
from frfold.bench import random_sequence
from frfold.cfl import parse_grammar, recognize_packed
from frfold.fr import fold_fr
from frfold.fr2 import fold_fr2

PARENS = parse_grammar("""
start: S
nullable: true
S -> L R
S -> L X
S -> S S
X -> S R
L -> '('
R -> ')'
""")


def timed(fn, reps):
    samples = []
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples) * 1000.0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="64,128,256")
    parser.add_argument("--reps", type=int, default=3)
    parser.add_argument("--w", type=int, default=2)
    args = parser.parse_args(argv)
    if "compiled" not in _backend.BACKENDS:
        print("compiled kernels are not built; nothing to compare", file=sys.stderr)
        return 1
    sizes = [int(x) for x in args.sizes.split(",")]
    print(f"{'task':<10}{'n':>6}{'python ms':>12}{'compiled ms':>13}{'speedup':>9}")
    for index, n in enumerate(sizes):
        seq = random_sequence(0, index, n)
        text = "()" * (n // 2)
        tasks = {
            "fr": lambda b: fold_fr(seq, w=args.w, backend=b),
            "fr2": lambda b: fold_fr2(seq, w=args.w, backend=b, updation="cached"),
            "cnf": lambda b: recognize_packed(PARENS, text, backend=b),
        }
        for name, task in tasks.items():
            slow = timed(lambda: task("python"), args.reps)
            fast = timed(lambda: task("compiled"), args.reps)
            print(f"{name:<10}{n:>6}{slow:>12.1f}{fast:>13.2f}{slow / fast:>8.0f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())

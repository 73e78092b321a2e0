#!/usr/bin/env python3
"""Micro-benchmarks for the exact decoders (MST, CRF Viterbi/partition).

    python scripts/decoder_benchmarks.py --sizes 5 10 20 40
"""

import argparse
import time

import numpy as np

from annopipe.crf import TagLattice, crf_log_partition, crf_viterbi
from annopipe.mst import decode_mst


def bench(fn, repeats=20):
    started = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - started) / repeats * 1000.0


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[5, 10, 20, 40])
    parser.add_argument("--tags", type=int, default=9)
    args = parser.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'n':>4} {'mst ms':>9} {'viterbi ms':>11} {'logZ ms':>9}")
    for n in args.sizes:
        scores = rng.normal(0, 1, (n + 1, n + 1))
        lattice = TagLattice(rng.normal(0, 1, (n, args.tags)),
                             rng.normal(0, 1, (args.tags, args.tags)),
                             rng.normal(0, 1, args.tags),
                             rng.normal(0, 1, args.tags))
        print(f"{n:>4} {bench(lambda: decode_mst(scores)):>9.3f} "
              f"{bench(lambda: crf_viterbi(lattice)):>11.3f} "
              f"{bench(lambda: crf_log_partition(lattice)):>9.3f}")


if __name__ == "__main__":
    main()

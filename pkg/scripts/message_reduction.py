"""Tabulate messages before and after optimization across genome workflow shapes."""

from __future__ import annotations

import argparse
import itertools

from swirl.encode import encode
from swirl.generators import GenomeParams, gen_1000genomes
from swirl.optimize import comm_stats, optimize


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-m", type=int, default=6)
    ap.add_argument("--pairs", action="store_true", help="also print every pair that shrank")
    args = ap.parse_args()

    print(f"{'n':>2} {'m':>2} {'a':>2} {'b':>2} {'c':>2} {'before':>7} {'after':>6} {'saved':>6}")
    for n, m in itertools.product((1, 2, 3), range(1, args.max_m + 1)):
        for a, b, c in sorted({(1, 1, 1), (max(1, m // 2), 1, 1), (1, 1, max(1, m // 2)), (1, 2, 1)}):
            if a > n or b > m or c > m:
                continue
            sys_ = encode(gen_1000genomes(GenomeParams(n, m, a, b, c)))
            before, after = comm_stats(sys_), comm_stats(optimize(sys_))
            saved = 1 - after.sends / before.sends if before.sends else 0.0
            print(f"{n:>2} {m:>2} {a:>2} {b:>2} {c:>2} {before.sends:>7} {after.sends:>6} {saved:>6.0%}")
            if args.pairs:
                for pair, k in sorted(before.per_pair.items()):
                    if after.per_pair[pair] < k:
                        print(f"      {pair[0]} -> {pair[1]}: {k} -> {after.per_pair[pair]}")


if __name__ == "__main__":
    main()

"""Check that optimization preserves behaviour over a grid of genome workflows.

Prints state counts for the original and optimized systems and the time taken.
Larger shapes need the tau-confluence reduction to stay tractable.
"""

from __future__ import annotations

import argparse
import itertools
import time

from swirl.bisim import check_theorem1
from swirl.encode import encode
from swirl.generators import GenomeParams, gen_1000genomes
from swirl.semantics import StateSpaceExceeded


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=3)
    ap.add_argument("--max-m", type=int, default=3)
    ap.add_argument("--max-states", type=int, default=200_000)
    ap.add_argument("--reduction", choices=["none", "tau-confluence"], default="tau-confluence")
    args = ap.parse_args()

    failures = 0
    for n, m in itertools.product(range(1, args.max_n + 1), range(1, args.max_m + 1)):
        for b, c in {(1, 1), (m, 1), (1, m)}:
            params = GenomeParams(n, m, 1, b, c)
            t0 = time.perf_counter()
            try:
                res = check_theorem1(encode(gen_1000genomes(params)), args.max_states, args.reduction)
            except StateSpaceExceeded:
                print(f"{params}  too many states")
                continue
            took = time.perf_counter() - t0
            failures += not res.related
            print(f"{params}  {res}  states={res.states_a}/{res.states_b}  {took:.2f}s")
    raise SystemExit(1 if failures else 0)


if __name__ == "__main__":
    main()

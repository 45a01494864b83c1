"""Sweep random structure pairs and tabulate the four equivalence verdicts.

    python scripts/portmanteau_sweep.py --pairs 50 --alpha 3 --seed 1
"""

import argparse
import random
import sys
from collections import Counter

from artifact.gen import SIGNATURES, StructureParams, random_structure, small_algebra
from artifact.invariants import Portmanteau


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=50)
    ap.add_argument("--alpha", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--mutate", choices=["box-imp", "exists-drop-first"])
    args = ap.parse_args()

    rng = random.Random(args.seed)
    tally: Counter = Counter()
    disagreements = 0
    for i in range(args.pairs):
        alg = small_algebra(rng)
        sig = SIGNATURES[rng.choice(["empty", "unary", "const", "fun", "mixed"])]
        m = random_structure(rng, alg, sig, "M", StructureParams())
        n = random_structure(rng, alg, sig, "N", StructureParams())
        k = rng.choice([0, 1])
        pairs = [(x, y) for x in m.tuples(k) for y in n.tuples(k) if m.tuple_extent(x) == n.tuple_extent(y)]
        x, y = rng.choice(pairs)
        pm = Portmanteau(m, x, n, y, mutation=args.mutate)
        for alpha in range(args.alpha + 1):
            row = pm.row(alpha)
            tally[(alpha, row.invariants_equal, row.agree)] += 1
            if not row.agree:
                disagreements += 1
                print(f"pair {i} ({alg.name}, {sig.name}) alpha {alpha}: {row}")

    print(f"{'alpha':>5} {'equivalent':>10} {'different':>10} {'disagree':>9}")
    for alpha in range(args.alpha + 1):
        eq = sum(c for (a, e, ok), c in tally.items() if a == alpha and e and ok)
        ne = sum(c for (a, e, ok), c in tally.items() if a == alpha and not e and ok)
        bad = sum(c for (a, _, ok), c in tally.items() if a == alpha and not ok)
        print(f"{alpha:>5} {eq:>10} {ne:>10} {bad:>9}")
    return 1 if disagreements else 0


if __name__ == "__main__":
    sys.exit(main())

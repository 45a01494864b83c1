"""Pure sets over the two-element algebra: where each method separates sizes m and n.

Classically the sets of sizes m < n are alpha-equivalent exactly when alpha <= m.

    python scripts/ef_calibration.py --max-size 4
"""

import argparse
import sys
import time

from artifact.fixtures import pure_set
from artifact.invariants import Portmanteau


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-size", type=int, default=4)
    args = ap.parse_args()

    wrong = 0
    print(f"{'m':>2} {'n':>2} {'alpha':>5} {'G':>5} {'Q':>5} {'game':>4} {'phi':>5} {'expect':>6}")
    for a in range(1, args.max_size):
        for b in range(a + 1, args.max_size + 1):
            start = time.perf_counter()
            pm = Portmanteau(pure_set(a), (), pure_set(b), ())
            for alpha in range(a + 2):
                row = pm.row(alpha)
                expect = alpha <= a
                ok = row.agree and row.invariants_equal == expect
                wrong += not ok
                print(
                    f"{a:>2} {b:>2} {alpha:>5} {row.invariants_equal!s:>5} {row.q_witness!s:>5} "
                    f"{row.game_winner:>4} {row.mutual_forcing!s:>5} {expect!s:>6}" + ("" if ok else "  MISMATCH")
                )
            print(f"   ({time.perf_counter() - start:.2f}s)")
    return 1 if wrong else 0


if __name__ == "__main__":
    sys.exit(main())

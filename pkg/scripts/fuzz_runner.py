"""Run the property fuzzer over several seeds and summarize.

    python scripts/fuzz_runner.py --seeds 0 1 2 --count 100
"""

import argparse
import json
import sys

from artifact.fuzz import FuzzConfig, run


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--count", type=int, default=100)
    ap.add_argument("--max-alpha", type=int, default=2)
    ap.add_argument("--mutate", choices=["box-imp", "exists-drop-first"])
    ap.add_argument("--json", action="store_true", help="one JSON report per line")
    args = ap.parse_args()

    failed = False
    for seed in args.seeds:
        rep = run(FuzzConfig(seed=seed, count=args.count, max_alpha=args.max_alpha, mutation=args.mutate))
        failed |= not rep.ok
        if args.json:
            print(json.dumps(rep.to_json()))
        else:
            print("\n".join(rep.lines()))
    return 2 if failed else 0


if __name__ == "__main__":
    sys.exit(main())

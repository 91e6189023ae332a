"""Run every comparison against the reference values and print the verdicts.

    python scripts/reproduce_table.py [--shots 10000] [--seed 0]

Equivalent to ``rydpair reproduce-paper`` without writing files.
"""

import argparse

from rydpair.config import RunConfig
from rydpair.reproduce import reproduce_reference


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=10_000, help="shots per angle")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    checks, _ = reproduce_reference(RunConfig(master_seed=args.seed), args.shots)
    for c in checks:
        print(c.line())
    print(f"\n{sum(c.passed for c in checks)}/{len(checks)} checks passed")


if __name__ == "__main__":
    main()

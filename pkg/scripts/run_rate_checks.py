#!/usr/bin/env python3
"""Run every bound-verification suite and print one line per check."""

import argparse

from envmeta.harness.verify import CHECKS


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--only", nargs="*", choices=sorted(CHECKS), default=None)
    args = parser.parse_args()

    names = args.only or list(CHECKS)
    worst = 0
    for name in names:
        result = CHECKS[name]()
        print(result.line)
        worst = max(worst, 0 if result.passed else 2)
    return worst


if __name__ == "__main__":
    raise SystemExit(main())

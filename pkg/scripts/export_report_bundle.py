#!/usr/bin/env python3
"""Write the standard report-input bundle (same as `envmeta export`)."""

import argparse

from envmeta.harness.cli import main as cli_main


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--dir", default="envmeta-out/bundle")
    args = parser.parse_args()
    return cli_main(["export", "--dir", args.dir])


if __name__ == "__main__":
    raise SystemExit(main())

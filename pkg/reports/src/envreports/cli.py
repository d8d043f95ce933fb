"""CLI: render one figure from a TOML figure spec.

    report <figure-spec.toml>
"""

from __future__ import annotations

import argparse
import sys

from .figures import plot_counterexample, plot_curves, plot_plateau_slope
from .spec import FigureSpec


def render(spec: FigureSpec):
    if spec.kind == "curves":
        return plot_curves(spec.input, spec.output, sidecar=spec.sidecar,
                           bound=spec.bound, x_scale=spec.x_scale, y_scale=spec.y_scale)
    if spec.kind == "plateau-slope":
        return plot_plateau_slope(spec.input, spec.output,
                                  x_scale=spec.x_scale, y_scale=spec.y_scale)
    return plot_counterexample(spec.input, spec.output, verdict_json=spec.verdict)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="report",
                                     description="render figures from envmeta artifacts")
    parser.add_argument("figure_spec", help="path to a figure-spec TOML file")
    args = parser.parse_args(argv)
    spec = FigureSpec.load(args.figure_spec)
    result = render(spec)
    print(f"wrote {result.output}")
    if spec.kind == "plateau-slope":
        print(f"fitted slope: {result.slope:.4f} on {result.column}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

    envmeta run <config.toml> [--out DIR] [--workers N]
    envmeta sweep --param alpha --values 0.05,0.1,0.2 <config.toml> [--out DIR]
    envmeta verify {lemma4|remarkA1|thm41|thm42|thm54|thm56|envelope}
    envmeta counterexample {nonconvex|nonsmooth} --alpha V [--out DIR]
    envmeta export --dir DIR

The output root defaults to $ENVMETA_OUT, then ./envmeta-out.  ``run`` exits
0 when every enabled theorem check passes or is skipped and 2 otherwise;
``verify`` exits 2 on a failed check.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from ..algorithms import OuterSpec
from ..counterexamples import (
    imaml_inner_solve,
    nonconvexity_grid,
    nonconvexity_witness,
    nonsmoothness_grid,
    piecewise_quartic,
    verify_nonconvexity,
    verify_nonsmoothness,
)
from ..envelope import InnerSolverSpec
from ..tasks import SuiteDescriptor
from .config import ExperimentConfig
from .experiment import run_experiment, run_sweep
from .verify import CHECKS, run_check

COUNTEREXAMPLE_CSV_COLUMNS = ("x", "z", "phi", "phi2_closed", "phi2_fd")


def _out_root(arg: str | None) -> Path:
    if arg:
        return Path(arg)
    return Path(os.environ.get("ENVMETA_OUT", "envmeta-out"))


def _cmd_run(args) -> int:
    config = ExperimentConfig.load(args.config)
    out = _out_root(args.out)
    outcome = run_experiment(config, out, workers=args.workers)
    for check in outcome.checks:
        print(f"check {check.name}: {check.status} {check.detail}".rstrip())
    print(f"artifacts written to {out}")
    if outcome.exit_code != 0:
        failed = [c.name for c in outcome.checks if c.status == "fail"]
        print(f"violated bounds: {', '.join(failed)}", file=sys.stderr)
    return outcome.exit_code


def _cmd_sweep(args) -> int:
    config = ExperimentConfig.load(args.config)
    values = [float(v) for v in args.values.split(",")]
    out = _out_root(args.out) / f"sweep_{args.param}"
    path = run_sweep(config, args.param, values, out, workers=args.workers)
    print(f"sweep summary written to {path}")
    return 0


def _cmd_verify(args) -> int:
    result = run_check(args.check)
    print(result.line)
    return 0 if result.passed else 2


def _write_counterexample(kind: str, alpha: float, out: Path) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    tag = f"{kind}_alpha{alpha:g}"
    if kind == "nonconvex":
        rows = [(x, z, phi, c, fd) for x, z, phi, c, fd in nonconvexity_grid(alpha)]
        report = verify_nonconvexity(alpha)
        verdict = report.to_dict()
        fn = piecewise_quartic()
        x0 = nonconvexity_witness(alpha)
        z0 = float(imaml_inner_solve(fn, x0, alpha))
        # Tangent of phi at the witness: slope f'(z0) * dz/dx.
        verdict["phi_x0"] = float(fn.value(z0))
        verdict["tangent_slope"] = float(fn.d1(z0) / (1.0 + alpha * fn.d2(z0)))
    else:
        grid = nonsmoothness_grid(alpha)
        rows = [(x, z, phi, c, fd) for x, z, phi, c, fd in grid]
        verdict = verify_nonsmoothness(alpha).to_dict()

    csv_path = out / f"counterexample_{tag}.csv"
    lines = [",".join(COUNTEREXAMPLE_CSV_COLUMNS)]
    lines += [",".join(repr(float(v)) for v in row) for row in rows]
    csv_path.write_text("\n".join(lines) + "\n")
    (out / f"counterexample_{tag}.json").write_text(
        json.dumps(verdict, indent=2, sort_keys=True) + "\n")
    return csv_path


def _cmd_counterexample(args) -> int:
    out = _out_root(args.out)
    path = _write_counterexample(args.kind, args.alpha, out)
    print(f"counterexample artifacts written next to {path}")
    return 0


def _cmd_export(args) -> int:
    """Bundle the standard demo artifacts for the reporting pipeline."""
    out = Path(args.dir)
    out.mkdir(parents=True, exist_ok=True)

    _write_counterexample("nonconvex", 0.1, out / "counterexample")
    _write_counterexample("nonsmooth", 1.0, out / "counterexample")

    pair = SuiteDescriptor("explicit_quadratic", {
        "matrices": [[[1.0]], [[2.0]]],
        "centers": [[0.0], [3.0]],
    })
    bias_cfg = ExperimentConfig(
        suite=pair, alpha=0.1,
        outer=OuterSpec(method="fo-maml", beta=0.5, tau=2, K=150, seed=1),
        repetitions=1, base_seed=1)
    run_sweep(bias_cfg, "alpha", list(np.geomspace(0.025, 0.2, 9)),
              out / "bias_sweep", workers=args.workers)

    demo_cfg = ExperimentConfig(
        suite=SuiteDescriptor("quadratic", {
            "n": 4, "d": 3, "mu": 0.1, "L": 1.0, "spread": 1.0, "seed": 42,
            "rng": "philox4x64",
        }),
        alpha=1.0 / math.sqrt(6.0),
        outer=OuterSpec(method="fo-muml", beta=1.0, tau=4, K=400, seed=7,
                        inner=InnerSolverSpec("exact")),
        repetitions=1, base_seed=7, checks=("thm54",))
    outcome = run_experiment(demo_cfg, out / "thm54_demo", workers=args.workers)
    print(f"export bundle written to {out}")
    return outcome.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="envmeta",
                                     description="Moreau-envelope meta-optimization harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--workers", type=int, default=0)
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter over a config")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--workers", type=int, default=0)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run a named bound-verification suite")
    p_verify.add_argument("check", choices=sorted(CHECKS))
    p_verify.set_defaults(fn=_cmd_verify)

    p_ce = sub.add_parser("counterexample", help="emit landscape CSV + verdict JSON")
    p_ce.add_argument("kind", choices=("nonconvex", "nonsmooth"))
    p_ce.add_argument("--alpha", type=float, required=True)
    p_ce.add_argument("--out", default=None)
    p_ce.set_defaults(fn=_cmd_counterexample)

    p_export = sub.add_parser("export", help="write the standard report-input bundle")
    p_export.add_argument("--dir", required=True)
    p_export.add_argument("--workers", type=int, default=0)
    p_export.set_defaults(fn=_cmd_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

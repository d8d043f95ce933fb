"""Experiment execution and persistence.

Layout written below the output directory:

    runs/run_<seed>.csv     per-run records, columns
                            run_id,k,dist_sq,F_val,grad_norm_sq,mean_cert_err,wall_ns
    summary.csv             cross-repetition mean/SE per iteration
    meta.json               schema v1 sidecar: config + hash, git revision,
                            ground truth, theory report, check outcomes

Timing is off by default so rerunning a deterministic config reproduces the
CSV files byte for byte; enabling record_timing trades that away for real
wall-clock columns.  Repetitions are independent (seeded base_seed + index)
and may execute concurrently; the summary pass runs after a join.
"""

from __future__ import annotations

import json
import math
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ..algorithms import OuterSpec, Trajectory, run_outer
from ..tasks import TaskSuite, build_suite
from ..theory import TheoryReport, build_theory_report, rate_thm41, rate_thm42, rate_thm54, rate_thm56
from .config import ExperimentConfig, config_hash
from .fitting import RateFit, RateFitError, fit_rate
from .ground_truth import GroundTruth, bias_fixed_point, estimate_sigma_sq, solve_ground_truth

__all__ = ["ExperimentOutcome", "run_experiment", "run_sweep", "SWEEP_SUMMARY_COLUMNS"]

CSV_COLUMNS = ("run_id", "k", "dist_sq", "F_val", "grad_norm_sq", "mean_cert_err", "wall_ns")

SWEEP_SUMMARY_COLUMNS = ("param", "value", "plateau_dist_sq", "bias_sq_closed", "fitted_factor")


def _git_revision() -> str:
    try:
        p = subprocess.run(["git", "rev-parse", "HEAD"], capture_output=True, text=True, check=False)
        rev = p.stdout.strip()
        return rev if p.returncode == 0 and rev else "nogit"
    except OSError:
        return "nogit"


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_run_csv(path: Path, run_id: str, traj: Trajectory) -> None:
    lines = [",".join(CSV_COLUMNS)]
    for k in range(len(traj)):
        lines.append(",".join([
            run_id, str(int(traj.ks[k])),
            _fmt(traj.dist_sq[k]), _fmt(traj.f_val[k]), _fmt(traj.grad_norm_sq[k]),
            _fmt(traj.mean_cert_err[k]), str(int(traj.wall_ns[k])),
        ]))
    path.write_text("\n".join(lines) + "\n")


@dataclass
class CheckOutcome:
    name: str
    status: str  # "pass" | "fail" | "skipped"
    detail: str = ""


@dataclass
class ExperimentOutcome:
    out_dir: Path
    config: ExperimentConfig
    ground_truth: GroundTruth
    theory: TheoryReport
    trajectories: list[Trajectory]
    checks: list[CheckOutcome] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 2 if any(c.status == "fail" for c in self.checks) else 0

    def mean_dist_sq(self) -> np.ndarray:
        return np.mean([t.dist_sq for t in self.trajectories], axis=0)

    def se_dist_sq(self) -> np.ndarray:
        if len(self.trajectories) < 2:
            return np.zeros(len(self.trajectories[0]))
        stack = np.stack([t.dist_sq for t in self.trajectories])
        return np.std(stack, axis=0, ddof=1) / math.sqrt(stack.shape[0])


def _theory_delta(config: ExperimentConfig, suite: TaskSuite) -> dict:
    inner = config.outer.inner
    method = config.outer.method
    if method == "fo-maml":
        return {"inner_steps": 1}
    if method in ("exact-prox-sgd", "full-gd") or inner.kind == "exact":
        return {"delta": 0.0}
    if inner.kind == "to_delta":
        return {"delta": inner.delta}
    return {"inner_steps": inner.s}


def _evaluate_checks(config: ExperimentConfig, suite: TaskSuite, gt: GroundTruth,
                     outcome: ExperimentOutcome) -> list[CheckOutcome]:
    L, mu = suite.L, suite.mu
    alpha, outer = config.alpha, config.outer
    delta_kw = _theory_delta(config, suite)
    # An s-step anchored inner loop realizes the delta-oracle contract with
    # delta = (alpha L)^s; the one-step method corresponds to delta = alpha L.
    delta = delta_kw["delta"] if "delta" in delta_kw \
        else (alpha * L) ** delta_kw["inner_steps"]
    mean = outcome.mean_dist_sq()
    se = outcome.se_dist_sq()
    d0 = mean[0]
    results = []
    for name in config.checks:
        if name == "thm41":
            bound = rate_thm41(L, mu, alpha, outer.beta, outer.tau, gt.sigma_star_sq)
        elif name == "thm42":
            bound = rate_thm42(L, mu, alpha, outer.beta, outer.tau, delta, gt.sigma_star_sq)
        elif name == "thm54":
            bound = rate_thm54(L, mu, alpha, outer.beta, outer.tau, delta, gt.sigma_star_sq)
        elif name == "thm56":
            results.append(_check_thm56(config, suite, gt, outcome))
            continue
        else:
            raise ValueError(f"unknown check {name!r}")
        if not bound.precondition_ok:
            results.append(CheckOutcome(name, "skipped", "precondition unsatisfied"))
            continue
        rhs = bound.factor ** np.arange(len(mean)) * d0 + bound.radius + 3 * se
        bad = np.nonzero(mean > rhs)[0]
        if len(bad):
            results.append(CheckOutcome(
                name, "fail",
                f"mean dist_sq exceeds bound at k={int(bad[0])} "
                f"({mean[bad[0]]:.6g} > {rhs[bad[0]]:.6g})"))
        else:
            results.append(CheckOutcome(name, "pass", f"holds at all {len(mean)} iterations"))
    return results


def _check_thm56(config: ExperimentConfig, suite: TaskSuite, gt: GroundTruth,
                 outcome: ExperimentOutcome) -> CheckOutcome:
    L = suite.L
    alpha, outer = config.alpha, config.outer
    delta_kw = _theory_delta(config, suite)
    delta = delta_kw["delta"] if "delta" in delta_kw else (alpha * L) ** delta_kw["inner_steps"]
    probes = [np.zeros(suite.d), gt.x_star]
    for traj in outcome.trajectories:
        probes.extend(x for _, x in traj.snapshots)
        probes.append(traj.x_final)
    sigma_sq = estimate_sigma_sq(suite, alpha, probes)
    mean_grad = np.mean([t.grad_norm_sq for t in outcome.trajectories], axis=0)
    f0 = float(np.mean([t.f_val[0] for t in outcome.trajectories]))
    best = np.minimum.accumulate(mean_grad)
    for k in range(1, len(best)):
        b = rate_thm56(L, alpha, outer.beta, outer.tau, delta, sigma_sq, f0 - gt.F_star, k)
        if not b.precondition_ok:
            return CheckOutcome("thm56", "skipped", "precondition unsatisfied")
        if best[k] > b.value:
            return CheckOutcome(
                "thm56", "fail",
                f"best grad norm^2 {best[k]:.6g} exceeds bound {b.value:.6g} at k={k}")
    return CheckOutcome("thm56", "pass", f"holds at all {len(best) - 1} iterations")


def run_experiment(config: ExperimentConfig, out_dir: str | Path,
                   workers: int = 0) -> ExperimentOutcome:
    """Build the suite, run all repetitions, evaluate checks, persist artifacts."""
    out = Path(out_dir)
    runs_dir = out / "runs"
    runs_dir.mkdir(parents=True, exist_ok=True)

    suite = build_suite(config.suite)
    gt = solve_ground_truth(suite, config.alpha)
    theory = build_theory_report(
        L=suite.L, mu=suite.mu, alpha=config.alpha, beta=config.outer.beta,
        tau=config.outer.tau, sigma_star_sq=gt.sigma_star_sq, **_theory_delta(config, suite))

    seeds = config.run_seeds()

    def one(seed: int) -> Trajectory:
        spec = OuterSpec(method=config.outer.method, beta=config.outer.beta,
                         tau=config.outer.tau, K=config.outer.K, seed=seed,
                         inner=config.outer.inner)
        return run_outer(suite, None, config.alpha, spec, x_star=gt.x_star,
                         snapshot_stride=config.snapshot_stride,
                         record_timing=config.record_timing)

    if workers > 0 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trajectories = list(pool.map(one, seeds))
    else:
        trajectories = [one(s) for s in seeds]

    outcome = ExperimentOutcome(out_dir=out, config=config, ground_truth=gt,
                                theory=theory, trajectories=trajectories)
    outcome.checks = _evaluate_checks(config, suite, gt, outcome)

    run_files = []
    for seed, traj in zip(seeds, trajectories):
        path = runs_dir / f"run_{seed}.csv"
        write_run_csv(path, str(seed), traj)
        run_files.append(str(path.relative_to(out)))

    mean = outcome.mean_dist_sq()
    se = outcome.se_dist_sq()
    mean_f = np.mean([t.f_val for t in trajectories], axis=0)
    mean_g = np.mean([t.grad_norm_sq for t in trajectories], axis=0)
    lines = ["k,mean_dist_sq,se_dist_sq,mean_F_val,mean_grad_norm_sq"]
    for k in range(len(mean)):
        lines.append(",".join([str(k), _fmt(mean[k]), _fmt(se[k]), _fmt(mean_f[k]), _fmt(mean_g[k])]))
    (out / "summary.csv").write_text("\n".join(lines) + "\n")

    sidecar = {
        "schema": "v1",
        "config": config.to_dict(),
        "config_hash": config_hash(config),
        "git_revision": _git_revision(),
        "ground_truth": {
            "x_star": gt.x_star.tolist(),
            "F_star": gt.F_star,
            "sigma_star_sq": gt.sigma_star_sq,
            "kappa": gt.kappa if math.isfinite(gt.kappa) else "inf",
            "L_F": gt.L_F,
            "mu_F": gt.mu_F,
            "fomaml_fixed_point": None if gt.fomaml_fixed_point is None
            else gt.fomaml_fixed_point.tolist(),
            "kind": gt.kind,
        },
        "theory": json.loads(theory.to_json()),
        "checks": [asdict(c) for c in outcome.checks],
        "runs": run_files,
    }
    (out / "meta.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return outcome


def run_sweep(config: ExperimentConfig, param: str, values: list[float],
              out_dir: str | Path, workers: int = 0) -> Path:
    """Run one experiment per parameter value and write a sweep summary CSV.

    Currently alpha is the only sweepable parameter; each value gets its own
    subdirectory.  The summary rows carry the fitted plateau of the mean
    squared distance, the closed-form one-step bias when it applies, and the
    fitted contraction factor.
    """
    if param != "alpha":
        raise ValueError(f"unsupported sweep parameter {param!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for value in values:
        sub = out / f"{param}_{value:g}"
        cfg = ExperimentConfig(
            suite=config.suite, alpha=float(value), outer=config.outer,
            repetitions=config.repetitions, base_seed=config.base_seed,
            seeds=config.seeds, checks=config.checks,
            snapshot_stride=config.snapshot_stride, record_timing=config.record_timing)
        outcome = run_experiment(cfg, sub, workers=workers)
        mean = outcome.mean_dist_sq()
        try:
            fit = fit_rate(mean)
        except RateFitError:
            fit = RateFit(factor=float("nan"), plateau=float(np.median(mean[-max(1, len(mean) // 10):])))
        bias_sq = float("nan")
        suite = build_suite(cfg.suite)
        if suite.is_quadratic and cfg.outer.method == "fo-maml" and cfg.outer.tau == suite.n:
            x_inf = bias_fixed_point(suite, cfg.alpha, cfg.outer.beta)
            diff = x_inf - outcome.ground_truth.x_star
            bias_sq = float(diff @ diff)
        rows.append((param, float(value), fit.plateau, bias_sq, fit.factor))

    lines = [",".join(SWEEP_SUMMARY_COLUMNS)]
    for row in rows:
        lines.append(",".join([row[0]] + [_fmt(v) for v in row[1:]]))
    path = out / "sweep_summary.csv"
    path.write_text("\n".join(lines) + "\n")
    return path

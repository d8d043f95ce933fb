"""Figure renderers.

Each renderer reads artifact files, draws one deterministic PNG (fixed style,
no timestamp or software metadata in the image), and returns the exact series
it plotted so tests can make numeric assertions on the data rather than on
pixels.
"""

from __future__ import annotations

import csv
import glob as globlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RUN_COLUMNS = ("run_id", "k", "dist_sq", "F_val", "grad_norm_sq", "mean_cert_err", "wall_ns")
SWEEP_COLUMNS = ("param", "value", "plateau_dist_sq", "bias_sq_closed", "fitted_factor")
COUNTEREXAMPLE_COLUMNS = ("x", "z", "phi", "phi2_closed", "phi2_fd")

# Anything below this is indistinguishable from the accumulation floor of the
# squared-distance column; slope fits on such data are meaningless.
NUMERICAL_FLOOR = 1e-16


class SlopeRejected(ValueError):
    """Plateau data sits at the numerical floor; no slope to fit."""


def _read_csv(path: str | Path, required: tuple[str, ...]) -> dict[str, list[str]]:
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        missing = [c for c in required if c not in (reader.fieldnames or ())]
        if missing:
            raise ValueError(
                f"schema mismatch in {path}: missing columns {missing}; "
                f"found {reader.fieldnames}")
        rows = list(reader)
    return {c: [r[c] for r in rows] for c in (reader.fieldnames or ())}


def _save(fig, output: str | Path) -> None:
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120, metadata={"Software": None})
    plt.close(fig)


@dataclass
class CurvesResult:
    ks: np.ndarray
    curves: dict[str, np.ndarray]
    bound: np.ndarray | None
    bound_name: str | None
    output: Path


def plot_curves(input_glob: str, output: str | Path, sidecar: str | None = None,
                bound: str | None = None, x_scale: str = "linear",
                y_scale: str = "log") -> CurvesResult:
    """Convergence curves (squared distance per iteration), one per run CSV,
    with an optional theoretical-bound overlay from the meta.json sidecar."""
    paths = sorted(globlib.glob(input_glob))
    if not paths:
        raise ValueError(f"no run CSVs match {input_glob!r}")

    curves: dict[str, np.ndarray] = {}
    ks = None
    for path in paths:
        table = _read_csv(path, RUN_COLUMNS)
        run_id = table["run_id"][0] if table["run_id"] else Path(path).stem
        ks = np.array([int(v) for v in table["k"]])
        curves[run_id] = np.array([float(v) for v in table["dist_sq"]])

    overlay = None
    bound_name = None
    if sidecar is not None:
        meta = json.loads(Path(sidecar).read_text())
        entries = meta["theory"]["entries"]
        bound_name = bound or next(
            (name for name, e in entries.items() if e["precondition_ok"]), None)
        if bound_name is not None and entries[bound_name]["precondition_ok"]:
            entry = entries[bound_name]
            d0 = float(np.mean([c[0] for c in curves.values()]))
            overlay = entry["factor"] ** ks * d0 + entry["radius"]

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for run_id, values in curves.items():
        ax.plot(ks, values, lw=1.2, label=f"run {run_id}")
    if overlay is not None:
        ax.plot(ks, overlay, "k--", lw=1.6, label=f"{bound_name} bound")
    ax.set_xscale(x_scale)
    ax.set_yscale(y_scale)
    ax.set_xlabel("iteration k")
    ax.set_ylabel("squared distance to optimum")
    ax.legend(loc="best", fontsize=8)
    _save(fig, output)
    return CurvesResult(ks=ks, curves=curves, bound=overlay, bound_name=bound_name,
                        output=Path(output))


@dataclass
class PlateauSlopeResult:
    values: np.ndarray
    distances: np.ndarray
    slope: float
    column: str
    output: Path


def plot_plateau_slope(summary_csv: str | Path, output: str | Path,
                       x_scale: str = "log", y_scale: str = "log") -> PlateauSlopeResult:
    """Log-log plateau/bias distances against the swept parameter with the
    fitted slope.  Prefers the closed-form bias column when it is populated
    and falls back to the measured plateau.  Raises SlopeRejected when the
    data sits at the numerical floor (nothing to fit)."""
    table = _read_csv(summary_csv, SWEEP_COLUMNS)
    values = np.array([float(v) for v in table["value"]])
    bias = np.array([float(v) for v in table["bias_sq_closed"]])
    plateau = np.array([float(v) for v in table["plateau_dist_sq"]])
    if np.all(np.isfinite(bias)):
        ys, column = bias, "bias_sq_closed"
    else:
        ys, column = plateau, "plateau_dist_sq"

    if len(values) < 2:
        raise ValueError("need at least two sweep points")
    if np.max(ys) < NUMERICAL_FLOOR:
        raise SlopeRejected(
            f"{column} is at the numerical floor (max {np.max(ys):.3g}); slope fit rejected")

    distances = np.sqrt(ys)
    slope, intercept = np.polyfit(np.log(values), np.log(distances), 1)

    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    ax.plot(values, distances, "o", ms=5, label=column.replace("_sq", " distance"))
    ax.plot(values, np.exp(intercept) * values ** slope, "-", lw=1.2,
            label=f"fit: slope {slope:.3f}")
    ax.set_xscale(x_scale)
    ax.set_yscale(y_scale)
    ax.set_xlabel(str(table["param"][0]))
    ax.set_ylabel("distance to optimum")
    ax.legend(loc="best", fontsize=8)
    _save(fig, output)
    return PlateauSlopeResult(values=values, distances=distances, slope=float(slope),
                              column=column, output=Path(output))


@dataclass
class CounterexampleResult:
    xs: np.ndarray
    phi: np.ndarray
    zs: np.ndarray
    tangent: np.ndarray | None
    phi_minus_tangent: np.ndarray | None
    x0: float | None
    curvature_agrees: bool | None
    output: Path = field(default=Path())


def plot_counterexample(grid_csv: str | Path, output: str | Path,
                        verdict_json: str | None = None) -> CounterexampleResult:
    """Landscape figure: the task loss and its implicit meta-objective, plus
    the tangent construction at the witness point when a verdict is given.

    The meta-objective curve is (x, phi).  Because phi(x) = f(z(x)), the
    pairs (z, phi) are exactly the graph of f sampled along the grid, so both
    overlays come straight from the CSV with no recomputation.
    """
    table = _read_csv(grid_csv, COUNTEREXAMPLE_COLUMNS)
    xs = np.array([float(v) for v in table["x"]])
    zs = np.array([float(v) for v in table["z"]])
    phi = np.array([float(v) for v in table["phi"]])

    tangent = None
    gap = None
    x0 = None
    agrees = None
    if verdict_json is not None:
        verdict = json.loads(Path(verdict_json).read_text())
        x0 = verdict.get("x0")
        agrees = verdict.get("closed_matches_fd")
        if x0 is not None:
            tangent = verdict["phi_x0"] + verdict["tangent_slope"] * (xs - x0)
            gap = phi - tangent

    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot(zs, phi, color="tab:gray", lw=1.2, label="task loss f")
    ax.plot(xs, phi, color="tab:blue", lw=1.6, label="meta-objective phi")
    if tangent is not None:
        ax.plot(xs, tangent, "r--", lw=1.2, label="tangent at witness")
        ax.axvline(x0, color="r", lw=0.6, alpha=0.5)
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    ax.legend(loc="best", fontsize=8)
    _save(fig, output)
    return CounterexampleResult(xs=xs, phi=phi, zs=zs, tangent=tangent,
                                phi_minus_tangent=gap, x0=x0,
                                curvature_agrees=agrees, output=Path(output))

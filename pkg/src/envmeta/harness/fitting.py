"""Empirical rate fitting: per-step contraction factor and plateau level.

A convergent trajectory under the strongly convex bounds has two regimes:
geometric decay followed by a noise/bias floor.  The plateau is estimated as
the median of the last 10% of iterations; the contraction factor comes from
a log-linear least-squares fit restricted to the clearly pre-plateau segment
(values above 10x the plateau).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["RateFit", "RateFitError", "fit_rate", "loglog_slope"]


class RateFitError(RuntimeError):
    """No qualifying decay segment (and the trajectory is not constant)."""


@dataclass(frozen=True)
class RateFit:
    factor: float
    plateau: float


def fit_rate(values, plateau_fraction: float = 0.1,
             threshold: float = 10.0) -> RateFit:
    """Fit a geometric decay factor and plateau to a positive value sequence.

    Accepts either a raw sequence or a Trajectory, whose squared-distance
    column must be populated (an optimum was supplied when it was recorded).
    Constant sequences (relative variation below 1e-12) return factor 1 with
    the constant as plateau.
    """
    if hasattr(values, "dist_sq"):
        values = values.dist_sq
        if not np.all(np.isfinite(values)):
            raise ValueError("trajectory has no squared-distance column "
                             "(no optimum was supplied when it was recorded)")
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or len(v) < 2:
        raise ValueError("need a 1-D sequence with at least two entries")
    if not np.all(np.isfinite(v)):
        raise ValueError("trajectory contains non-finite values")

    vmax = float(np.max(np.abs(v)))
    if vmax == 0.0 or float(np.max(v) - np.min(v)) <= 1e-12 * vmax:
        return RateFit(factor=1.0, plateau=float(np.median(v)))

    tail = max(1, int(np.ceil(plateau_fraction * len(v))))
    plateau = float(np.median(v[-tail:]))

    mask = v > threshold * plateau
    mask &= v > 0
    ks = np.nonzero(mask)[0]
    if len(ks) < 2:
        raise RateFitError(
            f"insufficient decay: only {len(ks)} points above {threshold}x the plateau"
        )
    slope, _ = np.polyfit(ks, np.log(v[ks]), 1)
    return RateFit(factor=float(np.exp(slope)), plateau=plateau)


def loglog_slope(xs: np.ndarray, ys: np.ndarray) -> float:
    """Least-squares slope of log(y) against log(x)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if np.any(xs <= 0) or np.any(ys <= 0):
        raise ValueError("log-log slope needs strictly positive data")
    slope, _ = np.polyfit(np.log(xs), np.log(ys), 1)
    return float(slope)

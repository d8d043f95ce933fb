"""Static figure rendering for envmeta experiment artifacts.

Read-only consumer of the schema-v1 contract (run CSVs, meta.json sidecars,
sweep summaries, counterexample grids); never recomputes any of the math.
"""

from .figures import SlopeRejected, plot_counterexample, plot_curves, plot_plateau_slope
from .spec import FigureSpec

__all__ = [
    "FigureSpec",
    "SlopeRejected",
    "plot_curves",
    "plot_plateau_slope",
    "plot_counterexample",
]

__version__ = "0.1.0"

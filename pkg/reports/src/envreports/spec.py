"""Figure specifications: which artifacts to read and what to render."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import tomli

KINDS = ("curves", "plateau-slope", "counterexample")


@dataclass(frozen=True)
class FigureSpec:
    """One figure: input glob, kind, output path, axis scales.

    ``sidecar`` points at the meta.json used for bound overlays (curves);
    ``bound`` selects the theory entry to overlay; ``verdict`` points at the
    counterexample verdict JSON for the tangent construction.
    """

    kind: str
    input: str
    output: str
    x_scale: str = "linear"
    y_scale: str = "linear"
    sidecar: str | None = None
    bound: str | None = None
    verdict: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        for scale in (self.x_scale, self.y_scale):
            if scale not in ("linear", "log"):
                raise ValueError(f"unknown axis scale {scale!r}")

    @staticmethod
    def load(path: str | Path) -> "FigureSpec":
        table = tomli.loads(Path(path).read_text())
        return FigureSpec(
            kind=table["kind"],
            input=table["input"],
            output=table["output"],
            x_scale=table.get("x_scale", "linear"),
            y_scale=table.get("y_scale", "linear"),
            sidecar=table.get("sidecar"),
            bound=table.get("bound"),
            verdict=table.get("verdict"),
        )

"""Experiment configuration: TOML (de)serialization and content hashing.

Configs round-trip exactly: parse(serialize(config)) == config.  The content
hash is a SHA-256 over a canonical JSON rendering and is stored in every
result sidecar so outputs can be traced back to their exact configuration.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import tomli
import tomlkit

from ..algorithms import OuterSpec
from ..envelope import InnerSolverSpec
from ..tasks import SuiteDescriptor

__all__ = ["ExperimentConfig", "config_hash"]

SCHEMA_VERSION = "v1"

CHECK_NAMES = ("thm41", "thm42", "thm54", "thm56")


def _inner_table(inner: InnerSolverSpec) -> dict[str, Any]:
    # TOML has no null: gamma is simply omitted when it defaults to alpha.
    table: dict[str, Any] = {
        "kind": inner.kind,
        "s": inner.s,
        "delta": inner.delta,
        "delta_ref": inner.delta_ref,
    }
    if inner.gamma is not None:
        table["gamma"] = inner.gamma
    return table


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a suite, an alpha, an outer method, and repetitions."""

    suite: SuiteDescriptor
    alpha: float
    outer: OuterSpec
    repetitions: int = 1
    base_seed: int = 0
    seeds: tuple[int, ...] | None = None
    checks: tuple[str, ...] = ()
    snapshot_stride: int = 0
    record_timing: bool = False

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha={self.alpha} must be positive")
        if self.repetitions < 1:
            raise ValueError(f"repetitions={self.repetitions} must be >= 1")
        for name in self.checks:
            if name not in CHECK_NAMES:
                raise ValueError(f"unknown check {name!r}; expected one of {CHECK_NAMES}")
        if self.seeds is not None and len(self.seeds) != self.repetitions:
            raise ValueError("explicit seed list length must match repetitions")

    def run_seeds(self) -> list[int]:
        if self.seeds is not None:
            return list(self.seeds)
        return [self.base_seed + i for i in range(self.repetitions)]

    def to_dict(self) -> dict[str, Any]:
        inner = self.outer.inner
        table: dict[str, Any] = {
            "schema": SCHEMA_VERSION,
            "alpha": self.alpha,
            "repetitions": self.repetitions,
            "base_seed": self.base_seed,
            "checks": list(self.checks),
            "snapshot_stride": self.snapshot_stride,
            "record_timing": self.record_timing,
            "suite": self.suite.to_toml_table(),
            "outer": {
                "method": self.outer.method,
                "beta": self.outer.beta,
                "tau": self.outer.tau,
                "K": self.outer.K,
                "seed": self.outer.seed,
                "inner": _inner_table(inner),
            },
        }
        if self.seeds is not None:
            table["seeds"] = list(self.seeds)
        return table

    def to_toml(self) -> str:
        return tomlkit.dumps(self.to_dict())

    @staticmethod
    def from_dict(table: dict[str, Any]) -> "ExperimentConfig":
        if table.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema {table.get('schema')!r}")
        outer_tbl = dict(table["outer"])
        inner_tbl = dict(outer_tbl.get("inner", {"kind": "exact"}))
        gamma = inner_tbl.get("gamma")
        inner = InnerSolverSpec(
            kind=str(inner_tbl.get("kind", "exact")),
            s=int(inner_tbl.get("s", 1)),
            delta=float(inner_tbl.get("delta", 0.0)),
            gamma=None if gamma is None else float(gamma),
            delta_ref=float(inner_tbl.get("delta_ref", 1e-12)),
        )
        outer = OuterSpec(
            method=str(outer_tbl["method"]),
            beta=float(outer_tbl["beta"]),
            tau=int(outer_tbl["tau"]),
            K=int(outer_tbl["K"]),
            seed=int(outer_tbl.get("seed", 0)),
            inner=inner,
        )
        seeds = table.get("seeds")
        return ExperimentConfig(
            suite=SuiteDescriptor.from_toml_table(dict(table["suite"])),
            alpha=float(table["alpha"]),
            outer=outer,
            repetitions=int(table.get("repetitions", 1)),
            base_seed=int(table.get("base_seed", 0)),
            seeds=None if seeds is None else tuple(int(s) for s in seeds),
            checks=tuple(str(c) for c in table.get("checks", [])),
            snapshot_stride=int(table.get("snapshot_stride", 0)),
            record_timing=bool(table.get("record_timing", False)),
        )

    @staticmethod
    def from_toml(text: str) -> "ExperimentConfig":
        return ExperimentConfig.from_dict(tomli.loads(text))

    @staticmethod
    def load(path: str | Path) -> "ExperimentConfig":
        return ExperimentConfig.from_toml(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_toml())


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON rendering of the config."""
    payload = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()

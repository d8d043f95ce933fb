"""Fixture data is produced exclusively through the envmeta command line, the
primary package's external interface; nothing here imports envmeta."""

import shutil
import subprocess
import sys
from pathlib import Path

import pytest

CONFIG_DIR = Path(__file__).parent / "configs"


def envmeta_cli(*args: str) -> None:
    exe = shutil.which("envmeta")
    cmd = [exe] if exe else [sys.executable, "-m", "envmeta.harness.cli"]
    subprocess.run([*cmd, *args], check=True, capture_output=True, text=True)


@pytest.fixture(scope="session")
def bundle(tmp_path_factory) -> Path:
    """The standard export bundle plus the extra sweeps/grids the figure
    examples need."""
    root = tmp_path_factory.mktemp("artifacts")
    envmeta_cli("export", "--dir", str(root / "bundle"))
    envmeta_cli("counterexample", "nonconvex", "--alpha", "0.01",
                "--out", str(root / "bundle" / "counterexample"))
    envmeta_cli("sweep", str(CONFIG_DIR / "zero_spread.toml"),
                "--param", "alpha", "--values", "0.05,0.08,0.1",
                "--out", str(root / "zero_spread"))
    envmeta_cli("sweep", str(CONFIG_DIR / "exact_inner.toml"),
                "--param", "alpha", "--values", "0.08,0.1,0.125",
                "--out", str(root / "exact_inner"))
    return root

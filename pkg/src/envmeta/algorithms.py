"""Outer-loop optimizers over a task suite.

All four methods share one update skeleton

    x^{k+1} = x^k - beta * mean_{i in T_k} grad f_i(z_i^k)

and differ only in how the batch T_k is drawn and how the inner point z_i^k
is produced:

* fo-maml         z_i^k = x^k - alpha grad f_i(x^k)  (one inner step);
* fo-muml         z_i^k from any configured inner solver; with a single
                  fixed-point step it reproduces fo-maml bit for bit, and
                  with the exact solver and full batch it reproduces
                  deterministic gradient descent on F bit for bit;
* exact-prox-sgd  exact inner solver, sampled batches (unbiased baseline);
* full-gd         exact/reference inner solver, all tasks every iteration.

Batches are sampled uniformly without replacement with a per-run Philox
stream, and gradients are always averaged in ascending task-index order so
results are bit-deterministic.  Iterations are sequential by nature; distinct
runs are independent and safe to execute concurrently.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .envelope import InnerSolverSpec, inner_solve, prox_reference
from .tasks import TaskSuite

__all__ = [
    "DivergenceError",
    "OuterSpec",
    "Trajectory",
    "run_fo_maml",
    "run_fo_muml",
    "run_exact_prox_sgd",
    "run_full_gd",
    "run_outer",
]

_DIVERGENCE_NORM = 1e12

METHODS = ("fo-maml", "fo-muml", "exact-prox-sgd", "full-gd")


class DivergenceError(RuntimeError):
    """Outer iterate norm exceeded the divergence cap."""


@dataclass(frozen=True)
class OuterSpec:
    """Outer-loop configuration: method, stepsize beta, batch size tau, K, seed."""

    method: str
    beta: float
    tau: int
    K: int
    seed: int = 0
    inner: InnerSolverSpec = field(default_factory=lambda: InnerSolverSpec("exact"))

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.beta <= 0:
            raise ValueError(f"beta={self.beta} must be positive")
        if self.tau < 1:
            raise ValueError(f"tau={self.tau} must be >= 1")
        if self.K < 0:
            raise ValueError(f"K={self.K} must be >= 0")


@dataclass(eq=False)
class Trajectory:
    """Per-iteration record stream for one run; row k describes the state x^k.

    mean_cert_err[k] is the mean certified inner error of the batch that
    produced x^k (NaN at k=0 and wherever the inner solver is uncertified).
    wall_ns holds elapsed nanoseconds per iteration when timing was enabled
    and zeros otherwise, keeping default output byte-stable across reruns.
    """

    ks: np.ndarray
    dist_sq: np.ndarray
    f_val: np.ndarray
    grad_norm_sq: np.ndarray
    mean_cert_err: np.ndarray
    wall_ns: np.ndarray
    x_final: np.ndarray
    snapshots: list[tuple[int, np.ndarray]]

    def __len__(self) -> int:
        return len(self.ks)


class _Observer:
    """Exact-reference measurements F(x), ||grad F(x)||^2, ||x - x*||^2.

    Quadratic suites use a stacked closed form (per-task envelope Hessians
    B_i = A_i (I + alpha A_i)^{-1} precomputed once per run); other suites
    fall back to per-task reference solves.
    """

    def __init__(self, suite: TaskSuite, alpha: float, x_star: np.ndarray | None):
        self.suite = suite
        self.alpha = alpha
        self.x_star = x_star
        self.quadratic = suite.is_quadratic
        if self.quadratic:
            d = suite.d
            eye = np.eye(d)
            self.A = np.stack([t.quadratic.A for t in suite.tasks])
            self.C = np.stack([t.quadratic.c for t in suite.tasks])
            B = np.stack([np.linalg.solve(eye + alpha * t.quadratic.A, t.quadratic.A)
                          for t in suite.tasks])
            self.B = 0.5 * (B + np.transpose(B, (0, 2, 1)))

    def __call__(self, x: np.ndarray):
        alpha = self.alpha
        if self.quadratic:
            r = x - self.C
            g = np.einsum("nij,nj->ni", self.B, r)
            g_mean = g.mean(axis=0)
            rz = r - alpha * g  # z - c
            f_vals = 0.5 * np.einsum("ni,nij,nj->n", rz, self.A, rz) \
                + 0.5 * alpha * np.einsum("ni,ni->n", g, g)
            f_acc = float(f_vals.mean())
        else:
            grad_acc = np.zeros_like(x)
            f_acc = 0.0
            for task in self.suite.tasks:
                z = prox_reference(task, x, alpha)
                dzx = z - x
                f_acc += task.value(z) + 0.5 * float(dzx @ dzx) / alpha
                grad_acc += (x - z) / alpha
            g_mean = grad_acc / self.suite.n
            f_acc /= self.suite.n
        dist = float(np.nan) if self.x_star is None \
            else float(np.dot(x - self.x_star, x - self.x_star))
        return dist, f_acc, float(g_mean @ g_mean)


def run_outer(
    suite: TaskSuite,
    x0: np.ndarray | None,
    alpha: float,
    spec: OuterSpec,
    x_star: np.ndarray | None = None,
    snapshot_stride: int = 0,
    record_timing: bool = False,
) -> Trajectory:
    """Shared outer loop. Dispatches the inner solver from the method name."""
    if spec.tau > suite.n:
        raise ValueError(f"tau={spec.tau} exceeds suite size n={suite.n}")
    if alpha <= 0:
        raise ValueError(f"alpha={alpha} must be positive")

    method = spec.method
    if method == "fo-maml":
        inner = InnerSolverSpec("fixed_point", s=1)
    elif method in ("exact-prox-sgd", "full-gd"):
        inner = InnerSolverSpec("exact") if suite.is_quadratic else InnerSolverSpec(
            "to_delta", delta=1e-10, delta_ref=1e-13)
        if method == "exact-prox-sgd" and not suite.is_quadratic:
            raise ValueError("exact-prox-sgd requires closed-form prox availability")
    else:
        inner = spec.inner

    if method in ("fo-maml", "fo-muml") and alpha * suite.L >= 1:
        warnings.warn(
            f"alpha*L={alpha * suite.L:.3g} >= 1: the one-step/multistep inner loop "
            "is outside its contraction regime",
            stacklevel=2,
        )

    n, d = suite.n, suite.d
    x = np.zeros(d) if x0 is None else np.array(x0, dtype=np.float64)
    full_batch = method == "full-gd"
    rng = None if full_batch else np.random.Generator(np.random.Philox(key=np.uint64(spec.seed)))
    all_tasks = np.arange(n)

    K = spec.K
    dist_sq = np.empty(K + 1)
    f_val = np.empty(K + 1)
    grad_norm_sq = np.empty(K + 1)
    cert = np.full(K + 1, np.nan)
    wall = np.zeros(K + 1, dtype=np.int64)
    snapshots: list[tuple[int, np.ndarray]] = []

    measure = _Observer(suite, alpha, x_star)
    dist_sq[0], f_val[0], grad_norm_sq[0] = measure(x)
    if snapshot_stride > 0:
        snapshots.append((0, x.copy()))

    for k in range(K):
        t0 = time.perf_counter_ns() if record_timing else 0
        if full_batch:
            batch = all_tasks
        else:
            batch = np.sort(rng.choice(n, size=spec.tau, replace=False))
        g_mean = np.zeros(d)
        cert_sum = 0.0
        cert_count = 0
        for i in batch:
            res = inner_solve(suite.tasks[int(i)], x, alpha, inner)
            g_mean += res.g
            if res.certified_rel_err is not None:
                cert_sum += res.certified_rel_err
                cert_count += 1
        g_mean /= len(batch)
        x = x - spec.beta * g_mean
        if float(np.linalg.norm(x)) > _DIVERGENCE_NORM:
            raise DivergenceError(f"outer iterate norm exceeded 1e12 at iteration {k}")

        dist_sq[k + 1], f_val[k + 1], grad_norm_sq[k + 1] = measure(x)
        if cert_count == len(batch):
            cert[k + 1] = cert_sum / cert_count
        if record_timing:
            wall[k + 1] = time.perf_counter_ns() - t0
        if snapshot_stride > 0 and (k + 1) % snapshot_stride == 0:
            snapshots.append((k + 1, x.copy()))

    return Trajectory(
        ks=np.arange(K + 1), dist_sq=dist_sq, f_val=f_val, grad_norm_sq=grad_norm_sq,
        mean_cert_err=cert, wall_ns=wall, x_final=x, snapshots=snapshots,
    )


def run_fo_maml(
    suite: TaskSuite,
    x0: np.ndarray | None,
    alpha: float,
    beta: float,
    tau: int,
    K: int,
    seed: int = 0,
    **kwargs,
) -> Trajectory:
    """FO-MAML: single inner gradient step per task, sampled batches."""
    spec = OuterSpec(method="fo-maml", beta=beta, tau=tau, K=K, seed=seed)
    return run_outer(suite, x0, alpha, spec, **kwargs)


def run_fo_muml(
    suite: TaskSuite,
    x0: np.ndarray | None,
    alpha: float,
    beta: float,
    tau: int,
    K: int,
    inner: InnerSolverSpec,
    seed: int = 0,
    **kwargs,
) -> Trajectory:
    """FO-MuML: configurable inner solver (multistep, certified, or exact)."""
    spec = OuterSpec(method="fo-muml", beta=beta, tau=tau, K=K, seed=seed, inner=inner)
    return run_outer(suite, x0, alpha, spec, **kwargs)


def run_exact_prox_sgd(
    suite: TaskSuite,
    x0: np.ndarray | None,
    alpha: float,
    beta: float,
    tau: int,
    K: int,
    seed: int = 0,
    **kwargs,
) -> Trajectory:
    """SGD on F with exact envelope gradients: the delta -> 0 sampled baseline."""
    spec = OuterSpec(method="exact-prox-sgd", beta=beta, tau=tau, K=K, seed=seed)
    return run_outer(suite, x0, alpha, spec, **kwargs)


def run_full_gd(
    suite: TaskSuite,
    x0: np.ndarray | None,
    alpha: float,
    beta: float,
    K: int,
    **kwargs,
) -> Trajectory:
    """Deterministic gradient descent on F with exact/reference inner solves."""
    spec = OuterSpec(method="full-gd", beta=beta, tau=suite.n, K=K, seed=0)
    return run_outer(suite, x0, alpha, spec, **kwargs)


def sample_batch_sequence(n: int, tau: int, K: int, seed: int) -> list[np.ndarray]:
    """The exact batch index sequence a seeded sampled run will use."""
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    return [np.sort(rng.choice(n, size=tau, replace=False)) for _ in range(K)]

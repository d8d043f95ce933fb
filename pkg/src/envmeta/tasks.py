"""Task-loss oracles and deterministic synthetic task-suite generators.

A task loss is a smooth function f_i with declared smoothness constant L and
strong-convexity constant mu.  Suites bundle n tasks sharing one ambient
dimension d.  Two generator families are provided:

* quadratic:  f_i(z) = 0.5 (z - c_i)^T A_i (z - c_i) with spectrum of A_i
  contained in [mu, L] (endpoints attained for d >= 2).
* logistic:   l2-regularized logistic loss on synthetic separable-ish data.

All randomness is drawn from the counter-based Philox4x64-10 generator keyed
by the 64-bit suite seed, so rebuilding a suite from its descriptor is
bit-identical across runs and platforms.  Suites are immutable and their
oracles are pure functions, safe for concurrent evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

__all__ = [
    "QuadraticParams",
    "TaskLoss",
    "SuiteDescriptor",
    "TaskSuite",
    "make_quadratic_suite",
    "make_logistic_suite",
    "make_explicit_quadratic_suite",
    "build_suite",
    "eval_value",
    "eval_grad",
    "quadratic_task",
]

# Spectrum slack for eigenvalue membership checks at construction time.
_EIG_TOL = 1e-9


def _rng(seed: int) -> np.random.Generator:
    """Philox4x64-10 stream keyed by the suite seed."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


@dataclass(frozen=True, eq=False)
class QuadraticParams:
    """Closed-form descriptor of f(z) = 0.5 (z-c)^T A (z-c)."""

    A: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.A, dtype=np.float64)
        c = np.asarray(self.c, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if c.shape != (A.shape[0],):
            raise ValueError(f"center must have shape ({A.shape[0]},), got {c.shape}")
        if not np.allclose(A, A.T, rtol=0, atol=1e-12):
            raise ValueError("A must be symmetric")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "c", c)


@dataclass(frozen=True, eq=False)
class TaskLoss:
    """Differentiable loss oracle with declared constants.

    Attributes:
        d: ambient dimension.
        value: x -> float oracle.
        grad: x -> gradient oracle (exact for the built-in families).
        L: smoothness constant (grad is L-Lipschitz).
        mu: strong-convexity constant; 0 means merely convex.
        convexity: one of "strongly_convex", "convex", "nonconvex".
        quadratic: closed-form prox descriptor, present for quadratic tasks.
    """

    d: int
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    L: float
    mu: float
    convexity: str
    quadratic: QuadraticParams | None = None

    def __post_init__(self):
        if self.d <= 0:
            raise ValueError(f"invalid dimension d={self.d}")
        if self.L <= 0:
            raise ValueError(f"invalid constants: L={self.L} must be positive")
        if self.convexity not in ("strongly_convex", "convex", "nonconvex"):
            raise ValueError(f"unknown convexity class {self.convexity!r}")
        if self.convexity != "nonconvex" and self.mu < 0:
            raise ValueError(f"invalid constants: mu={self.mu} negative for convex task")


def quadratic_task(A: np.ndarray, c: np.ndarray) -> TaskLoss:
    """Wrap explicit quadratic parameters as a TaskLoss with exact constants."""
    params = QuadraticParams(np.asarray(A, dtype=np.float64), np.asarray(c, dtype=np.float64))
    eigs = np.linalg.eigvalsh(params.A)
    lo, hi = float(eigs[0]), float(eigs[-1])
    if lo <= 0:
        raise ValueError(f"invalid constants: min eigenvalue {lo} must be positive")

    def value(x: np.ndarray) -> float:
        r = x - params.c
        return float(0.5 * r @ (params.A @ r))

    def grad(x: np.ndarray) -> np.ndarray:
        return params.A @ (x - params.c)

    return TaskLoss(
        d=params.c.shape[0], value=value, grad=grad,
        L=hi, mu=lo, convexity="strongly_convex", quadratic=params,
    )


@dataclass(frozen=True)
class SuiteDescriptor:
    """Serializable recipe (family + parameters) for regenerating a suite.

    Suites are never serialized raw: persisting the descriptor and rebuilding
    reproduces bit-identical task parameters.
    """

    family: str
    params: dict[str, Any] = field(default_factory=dict)

    def to_toml_table(self) -> dict[str, Any]:
        table: dict[str, Any] = {"family": self.family}
        table.update(self.params)
        return table

    @staticmethod
    def from_toml_table(table: dict[str, Any]) -> "SuiteDescriptor":
        table = dict(table)
        family = table.pop("family")
        return SuiteDescriptor(family=family, params=table)

    def __eq__(self, other):
        if not isinstance(other, SuiteDescriptor):
            return NotImplemented
        return self.family == other.family and _params_equal(self.params, other.params)


def _params_equal(a: dict, b: dict) -> bool:
    if set(a) != set(b):
        return False
    for k in a:
        va, vb = a[k], b[k]
        if isinstance(va, (list, tuple)) or isinstance(vb, (list, tuple)):
            if not np.array_equal(np.asarray(va, dtype=float), np.asarray(vb, dtype=float)):
                return False
        elif va != vb:
            return False
    return True


@dataclass(frozen=True, eq=False)
class TaskSuite:
    """Immutable ordered collection of n task losses sharing dimension d."""

    tasks: tuple[TaskLoss, ...]
    descriptor: SuiteDescriptor

    def __post_init__(self):
        if not self.tasks:
            raise ValueError("invalid count: suite must contain at least one task")
        d = self.tasks[0].d
        if any(t.d != d for t in self.tasks):
            raise ValueError("dimension mismatch: all tasks must share d")

    @property
    def n(self) -> int:
        return len(self.tasks)

    @property
    def d(self) -> int:
        return self.tasks[0].d

    @property
    def seed(self) -> int:
        return int(self.params.get("seed", 0))

    @property
    def params(self) -> dict[str, Any]:
        return self.descriptor.params

    @property
    def L(self) -> float:
        """Uniform smoothness constant: max over tasks."""
        return max(t.L for t in self.tasks)

    @property
    def mu(self) -> float:
        """Uniform strong-convexity constant: min over tasks."""
        return min(t.mu for t in self.tasks)

    @property
    def is_quadratic(self) -> bool:
        return all(t.quadratic is not None for t in self.tasks)


def _orthogonal(rng: np.random.Generator, d: int) -> np.ndarray:
    # QR of a Gaussian matrix; column signs pinned to the R diagonal so the
    # factorization is canonical.
    g = rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * np.sign(np.diag(r))


def _expected_gaussian_norm(d: int) -> float:
    # E||g|| for g ~ N(0, I_d): sqrt(2) * Gamma((d+1)/2) / Gamma(d/2).
    return math.sqrt(2.0) * math.exp(math.lgamma((d + 1) / 2) - math.lgamma(d / 2))


def make_quadratic_suite(
    n: int,
    d: int,
    mu: float,
    L: float,
    center_spread: float,
    seed: int,
) -> TaskSuite:
    """Generate n quadratic tasks with spectrum in [mu, L].

    Eigenvalues are sampled log-uniformly in [mu, L] and the extremes are
    forced to mu and L when d >= 2, so the declared constants are attained.
    Centers are i.i.d. Gaussian rescaled to expected norm ``center_spread``;
    spread 0 collapses every minimizer to the origin (zero heterogeneity).
    """
    if d <= 0:
        raise ValueError(f"invalid dimension d={d}")
    if n <= 0:
        raise ValueError(f"invalid count n={n}")
    if mu <= 0 or L < mu:
        raise ValueError(f"invalid constants: need L >= mu > 0, got mu={mu}, L={L}")
    if center_spread < 0:
        raise ValueError(f"invalid constants: center_spread={center_spread} negative")

    rng = _rng(seed)
    norm_scale = center_spread / _expected_gaussian_norm(d)
    tasks = []
    for _ in range(n):
        lam = np.exp(rng.uniform(math.log(mu), math.log(L), size=d))
        if d >= 2:
            lam[int(np.argmin(lam))] = mu
            lam[int(np.argmax(lam))] = L
        q = _orthogonal(rng, d)
        A = (q * lam) @ q.T
        A = 0.5 * (A + A.T)
        c = rng.standard_normal(d) * norm_scale
        eigs = np.linalg.eigvalsh(A)
        if eigs[0] < mu - _EIG_TOL or eigs[-1] > L + _EIG_TOL:
            raise AssertionError("generated spectrum escaped [mu, L]")

        params = QuadraticParams(A, c)

        def value(x: np.ndarray, p=params) -> float:
            r = x - p.c
            return float(0.5 * r @ (p.A @ r))

        def grad(x: np.ndarray, p=params) -> np.ndarray:
            return p.A @ (x - p.c)

        tasks.append(TaskLoss(
            d=d, value=value, grad=grad, L=L, mu=mu,
            convexity="strongly_convex", quadratic=params,
        ))

    desc = SuiteDescriptor("quadratic", {
        "n": n, "d": d, "mu": mu, "L": L, "spread": center_spread, "seed": seed,
        "rng": "philox4x64",
    })
    return TaskSuite(tasks=tuple(tasks), descriptor=desc)


def make_logistic_suite(
    n: int,
    d: int,
    samples_per_task: int,
    reg: float,
    seed: int,
) -> TaskSuite:
    """Generate n l2-regularized logistic tasks on synthetic data.

    Each task draws its own design matrix X (rows ~ N(0, I)) and labels from
    a task-specific linear teacher with a small label-noise margin, so the
    data is separable-ish.  Constants: L = 0.25 * lambda_max(X^T X)/m + reg
    (the standard conservative logistic bound) and mu = reg.
    """
    if d <= 0:
        raise ValueError(f"invalid dimension d={d}")
    if n <= 0:
        raise ValueError(f"invalid count n={n}")
    if samples_per_task < 1:
        raise ValueError(f"invalid count samples_per_task={samples_per_task}")
    if reg < 0:
        raise ValueError(f"invalid constants: reg={reg} negative")

    rng = _rng(seed)
    tasks = []
    for _ in range(n):
        X = rng.standard_normal((samples_per_task, d))
        w = rng.standard_normal(d)
        w *= 1.0 / max(np.linalg.norm(w), 1e-12)
        margin = X @ w + 0.1 * rng.standard_normal(samples_per_task)
        y = np.where(margin >= 0, 1.0, -1.0)
        m = samples_per_task
        L = float(0.25 * np.linalg.eigvalsh(X.T @ X)[-1] / m + reg)

        def value(theta: np.ndarray, X=X, y=y, m=m, reg=reg) -> float:
            t = y * (X @ theta)
            return float(np.mean(np.logaddexp(0.0, -t)) + 0.5 * reg * theta @ theta)

        def grad(theta: np.ndarray, X=X, y=y, m=m, reg=reg) -> np.ndarray:
            t = y * (X @ theta)
            # sigma(-t) = 1/(1+exp(t)), computed stably
            s = 1.0 / (1.0 + np.exp(t))
            return -(X.T @ (y * s)) / m + reg * theta

        tasks.append(TaskLoss(
            d=d, value=value, grad=grad, L=L, mu=reg,
            convexity="strongly_convex" if reg > 0 else "convex",
        ))

    desc = SuiteDescriptor("logistic", {
        "n": n, "d": d, "samples": samples_per_task, "reg": reg, "seed": seed,
        "rng": "philox4x64",
    })
    return TaskSuite(tasks=tuple(tasks), descriptor=desc)


def make_explicit_quadratic_suite(
    matrices: list[np.ndarray] | list[list[list[float]]],
    centers: list[np.ndarray] | list[list[float]],
) -> TaskSuite:
    """Suite from explicit per-task (A_i, c_i); serializes as nested arrays."""
    if len(matrices) != len(centers) or not matrices:
        raise ValueError("invalid count: need one matrix per center, at least one task")
    As = [np.atleast_2d(np.asarray(A, dtype=np.float64)) for A in matrices]
    cs = [np.atleast_1d(np.asarray(c, dtype=np.float64)) for c in centers]
    tasks = tuple(quadratic_task(A, c) for A, c in zip(As, cs))
    desc = SuiteDescriptor("explicit_quadratic", {
        "matrices": [A.tolist() for A in As],
        "centers": [c.tolist() for c in cs],
    })
    return TaskSuite(tasks=tasks, descriptor=desc)


def build_suite(descriptor: SuiteDescriptor) -> TaskSuite:
    """Regenerate a suite from its descriptor (deterministic in the seed)."""
    p = descriptor.params
    if descriptor.family == "quadratic":
        return make_quadratic_suite(
            n=int(p["n"]), d=int(p["d"]), mu=float(p["mu"]), L=float(p["L"]),
            center_spread=float(p["spread"]), seed=int(p["seed"]),
        )
    if descriptor.family == "logistic":
        return make_logistic_suite(
            n=int(p["n"]), d=int(p["d"]), samples_per_task=int(p["samples"]),
            reg=float(p["reg"]), seed=int(p["seed"]),
        )
    if descriptor.family == "explicit_quadratic":
        return make_explicit_quadratic_suite(p["matrices"], p["centers"])
    raise ValueError(f"unknown suite family {descriptor.family!r}")


def eval_value(task: TaskLoss, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (task.d,):
        raise ValueError(f"dimension mismatch: expected ({task.d},), got {x.shape}")
    return task.value(x)


def eval_grad(task: TaskLoss, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (task.d,):
        raise ValueError(f"dimension mismatch: expected ({task.d},), got {x.shape}")
    return task.grad(x)

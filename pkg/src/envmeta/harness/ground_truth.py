"""Ground-truth solvers: x*, sigma*^2, and the full-batch one-step fixed point.

For quadratic suites everything is closed form: the envelope gradient of
task i is B_i (x - c_i) with B_i = A_i (I + alpha A_i)^{-1}, so x* solves a
single d x d linear system.  For other suites x* is obtained by running
deterministic gradient descent on F to gradient norm <= 1e-12 and is marked
as numerical ground truth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..envelope import envelope_grad_reference, prox_reference
from ..tasks import TaskSuite
from ..theory import envelope_constants

__all__ = ["GroundTruth", "solve_ground_truth", "bias_fixed_point", "estimate_sigma_sq"]

_GRAD_TOL = 1e-9
_NUMERICAL_GRAD_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Solution-level quantities for one (suite, alpha) configuration."""

    x_star: np.ndarray
    F_star: float
    sigma_star_sq: float
    kappa: float
    L_F: float
    mu_F: float
    fomaml_fixed_point: np.ndarray | None
    kind: str  # "closed_form" | "numerical"


def _envelope_hessians(suite: TaskSuite, alpha: float) -> list[np.ndarray]:
    """B_i = A_i (I + alpha A_i)^{-1}, symmetric since A_i is."""
    out = []
    for task in suite.tasks:
        A = task.quadratic.A
        B = np.linalg.solve(np.eye(task.d) + alpha * A, A)
        out.append(0.5 * (B + B.T))
    return out


def _mean_objective(suite: TaskSuite, x: np.ndarray, alpha: float) -> float:
    acc = 0.0
    for task in suite.tasks:
        z = prox_reference(task, x, alpha)
        r = z - x
        acc += task.value(z) + 0.5 * float(r @ r) / alpha
    return acc / suite.n


def _mean_grad(suite: TaskSuite, x: np.ndarray, alpha: float) -> np.ndarray:
    acc = np.zeros(suite.d)
    for task in suite.tasks:
        acc += envelope_grad_reference(task, x, alpha)
    return acc / suite.n


def solve_ground_truth(suite: TaskSuite, alpha: float) -> GroundTruth:
    """Compute x*, F(x*), sigma*^2, and envelope constants for the suite."""
    if alpha <= 0:
        raise ValueError(f"alpha={alpha} must be positive")
    L, mu = suite.L, suite.mu

    if suite.is_quadratic:
        Bs = _envelope_hessians(suite, alpha)
        H = np.sum(Bs, axis=0)
        rhs = np.zeros(suite.d)
        for B, task in zip(Bs, suite.tasks):
            rhs += B @ task.quadratic.c
        try:
            x_star = np.linalg.solve(H, rhs)
        except np.linalg.LinAlgError as e:  # impossible for mu > 0; guarded anyway
            raise ValueError("singular system while solving for x*") from e
        kind = "closed_form"
        grad_tol = _GRAD_TOL
    else:
        x_star = _minimize_numerically(suite, alpha)
        kind = "numerical"
        grad_tol = 1e-10

    residual = float(np.linalg.norm(_mean_grad(suite, x_star, alpha)))
    if residual > grad_tol * max(1.0, float(np.linalg.norm(x_star))):
        raise ValueError(f"ground-truth stationarity residual {residual:.3g} too large")

    sigma = 0.0
    for task in suite.tasks:
        g = envelope_grad_reference(task, x_star, alpha)
        sigma += float(g @ g)
    sigma /= suite.n

    convexity = "strongly_convex" if mu > 0 else "convex"
    L_F, mu_F = envelope_constants(L, mu, alpha, convexity)
    kappa = L / mu if mu > 0 else math.inf

    fixed_point = None
    if suite.is_quadratic:
        try:
            fixed_point = _fomaml_fixed_point(suite, alpha)
        except np.linalg.LinAlgError:
            # Degenerate one-step map: alpha hits an inverse eigenvalue of the
            # averaged curvature, so the fixed point is not unique.
            fixed_point = None

    return GroundTruth(
        x_star=x_star, F_star=_mean_objective(suite, x_star, alpha),
        sigma_star_sq=sigma, kappa=kappa, L_F=L_F, mu_F=mu_F,
        fomaml_fixed_point=fixed_point, kind=kind,
    )


def _minimize_numerically(suite: TaskSuite, alpha: float, max_iters: int = 200_000) -> np.ndarray:
    """Plain gradient descent on F with stepsize 1/L_F down to ||grad F|| <= 1e-12."""
    L, mu = suite.L, suite.mu
    L_F, _ = envelope_constants(L, mu, alpha, "strongly_convex" if mu > 0 else "convex")
    beta = 1.0 / L_F
    x = np.zeros(suite.d)
    for _ in range(max_iters):
        g = _mean_grad(suite, x, alpha)
        if float(np.linalg.norm(g)) <= _NUMERICAL_GRAD_TOL:
            return x
        x = x - beta * g
    raise RuntimeError("numerical ground-truth solve did not reach the gradient tolerance")


def _fomaml_fixed_point(suite: TaskSuite, alpha: float) -> np.ndarray:
    """Solve sum_i A_i (I - alpha A_i)(x - c_i) = 0 for the one-step bias point."""
    d = suite.d
    M_sum = np.zeros((d, d))
    rhs = np.zeros(d)
    for task in suite.tasks:
        A, c = task.quadratic.A, task.quadratic.c
        M = A @ (np.eye(d) - alpha * A)
        M_sum += M
        rhs += M @ c
    return np.linalg.solve(M_sum, rhs)


def bias_fixed_point(suite: TaskSuite, alpha: float, beta: float) -> np.ndarray:
    """Exact fixed point of full-batch FO-MAML on a quadratic suite.

    The affine update map is x -> x - (beta/n) sum_i A_i (I - alpha A_i)(x - c_i);
    its fixed point is independent of beta, but beta decides whether the map
    contracts, which is checked spectrally before returning.
    """
    if not suite.is_quadratic:
        raise ValueError("bias fixed point requires a quadratic suite")
    d = suite.d
    M_sum = np.zeros((d, d))
    for task in suite.tasks:
        A = task.quadratic.A
        M_sum += A @ (np.eye(d) - alpha * A)
    J = np.eye(d) - (beta / suite.n) * M_sum
    radius = float(np.max(np.abs(np.linalg.eigvals(J))))
    if radius >= 1:
        raise ValueError(
            f"non-contraction: full-batch one-step map has spectral radius {radius:.6g} >= 1"
        )
    return _fomaml_fixed_point(suite, alpha)


def estimate_sigma_sq(suite: TaskSuite, alpha: float, points: list[np.ndarray],
                      inflation: float = 2.0) -> float:
    """Empirical uniform variance bound: max over probe points of the
    per-point gradient variance (1/n) sum_i ||grad F_i(x) - grad F(x)||^2,
    inflated by ``inflation``."""
    worst = 0.0
    for x in points:
        grads = [envelope_grad_reference(task, x, alpha) for task in suite.tasks]
        mean = np.mean(grads, axis=0)
        var = float(np.mean([np.dot(g - mean, g - mean) for g in grads]))
        worst = max(worst, var)
    return inflation * worst

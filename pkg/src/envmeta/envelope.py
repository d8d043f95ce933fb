"""Moreau-envelope values, prox points, envelope gradients, and inner solvers.

For a task loss f with parameter alpha > 0, the envelope and prox point are

    F(x)   = min_z { f(z) + ||z - x||^2 / (2 alpha) }
    z(x)   = argmin_z { f(z) + ||z - x||^2 / (2 alpha) }

and the envelope gradient has the two equivalent forms

    grad F(x) = (x - z(x)) / alpha = grad f(z(x)).

Three inner solvers approximate z(x):

* exact          closed-form dense solve, quadratic tasks only;
* fixed_point    s steps of z_{l+1} = x - gamma * grad f(z_l) from z_0 = x
                 (gamma defaults to alpha; with gamma = alpha and s = 1 this
                 is exactly the one gradient-step inner loop of FO-MAML);
* to_delta       fixed-point steps until the relative-error certificate
                 ||(x - z)/gamma - grad F(x)|| <= delta * ||grad F(x)||
                 holds against a high-accuracy reference gradient.

Certification always measures against an operational reference (closed form
for quadratics, a deep fixed-point solve otherwise) rather than assuming the
geometric error bound; the bound only sizes the iteration budget.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .tasks import TaskLoss

__all__ = [
    "CertificationError",
    "InnerSolverSpec",
    "EnvelopeSpec",
    "InnerResult",
    "prox_exact_quadratic",
    "prox_fixed_point",
    "prox_to_delta",
    "prox_reference",
    "envelope_grad_reference",
    "envelope_grad",
    "envelope_value",
    "virtual_iterate",
    "inner_solve",
]

_DIVERGENCE_NORM = 1e12

# Relative-change stopping rule for the deep fixed-point reference solver.
_REFERENCE_TOL = 1e-14


class CertificationError(RuntimeError):
    """Raised when the inner loop cannot reach the requested delta."""


@dataclass(frozen=True)
class InnerSolverSpec:
    """Inner-loop configuration.

    kind is one of "exact", "fixed_point", "to_delta".  ``s`` is the step
    count for fixed_point; ``delta`` the target relative error for to_delta;
    ``gamma`` an optional mismatched inner stepsize (defaults to alpha);
    ``delta_ref`` the reference-solver tolerance used for certification.
    """

    kind: str
    s: int = 1
    delta: float = 0.0
    gamma: float | None = None
    delta_ref: float = 1e-12

    _ALIASES = {
        "exact-closed-form": "exact",
        "fixed-point": "fixed_point",
        "to-delta": "to_delta",
    }

    def __post_init__(self):
        object.__setattr__(self, "kind", self._ALIASES.get(self.kind, self.kind))
        if self.kind not in ("exact", "fixed_point", "to_delta"):
            raise ValueError(f"unknown inner solver kind {self.kind!r}")
        if self.kind == "fixed_point" and self.s < 1:
            raise ValueError(f"fixed_point requires s >= 1, got s={self.s}")
        if self.kind == "to_delta":
            if self.delta < 0:
                raise ValueError(f"delta={self.delta} must be >= 0")
            if self.delta > 0 and self.delta_ref > self.delta / 100:
                raise ValueError(
                    f"delta_ref={self.delta_ref} must be <= delta/100={self.delta / 100}"
                )


@dataclass(frozen=True)
class EnvelopeSpec:
    """Envelope parameter alpha paired with an inner-solver choice."""

    alpha: float
    inner: InnerSolverSpec

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha={self.alpha} must be positive")


@dataclass(frozen=True, eq=False)
class InnerResult:
    """Inner-loop output.

    z is the approximate prox point, g = grad f(z) the vector the outer loop
    actually uses, and y = z + alpha * grad f(z) the virtual iterate at which
    g is an exact envelope gradient.  certified_rel_err is the measured
    certificate ratio, or None when no reference was computed.
    """

    z: np.ndarray
    y: np.ndarray
    g: np.ndarray
    certified_rel_err: float | None


def prox_exact_quadratic(task: TaskLoss, x: np.ndarray, alpha: float) -> np.ndarray:
    """Closed-form prox for quadratics: solve (A + I/alpha) z = A c + x/alpha."""
    if task.quadratic is None:
        raise ValueError("not closed form: task lacks a quadratic descriptor")
    A, c = task.quadratic.A, task.quadratic.c
    d = task.d
    lhs = A + np.eye(d) / alpha
    rhs = A @ c + x / alpha
    return np.linalg.solve(lhs, rhs)


def prox_fixed_point(
    task: TaskLoss,
    x: np.ndarray,
    alpha: float,
    s: int,
    gamma: float | None = None,
) -> np.ndarray:
    """s steps of the anchored fixed-point recursion z_{l+1} = x - gamma grad f(z_l).

    With gamma = alpha the iterate after s steps satisfies the geometric
    inner-error bound ||grad f(z_s) - grad F(x)|| <= (alpha L)^{s+1} ||grad F(x)||,
    tight for one-dimensional quadratics.
    """
    if s < 1:
        raise ValueError(f"s={s} must be >= 1")
    gamma = alpha if gamma is None else gamma
    if gamma * task.L >= 1:
        warnings.warn(
            f"inner stepsize gamma={gamma} has gamma*L={gamma * task.L:.3g} >= 1; "
            "the fixed-point iteration may not contract",
            stacklevel=2,
        )
    z = x
    for _ in range(s):
        z = x - gamma * task.grad(z)
        if np.linalg.norm(z) > _DIVERGENCE_NORM:
            warnings.warn("inner fixed-point iterate exceeded 1e12; stopping early", stacklevel=2)
            return z
    return z


def prox_reference(task: TaskLoss, x: np.ndarray, alpha: float, delta_ref: float = _REFERENCE_TOL) -> np.ndarray:
    """High-accuracy prox: closed form when available, else deep fixed point."""
    if task.quadratic is not None:
        return prox_exact_quadratic(task, x, alpha)
    if alpha * task.L >= 1:
        raise ValueError(
            f"no closed-form prox and alpha*L={alpha * task.L:.3g} >= 1: "
            "the fixed-point reference solver would not converge"
        )
    z = x
    scale = max(1.0, float(np.linalg.norm(x)))
    # Contraction factor alpha*L per sweep; cap generously.
    max_steps = max(64, int(10 * math.ceil(math.log(1e16) / -math.log(alpha * task.L + 1e-300))))
    for _ in range(max_steps):
        z_next = x - alpha * task.grad(z)
        if np.linalg.norm(z_next - z) <= delta_ref * scale:
            return z_next
        z = z_next
    return z


def envelope_grad_reference(task: TaskLoss, x: np.ndarray, alpha: float,
                            delta_ref: float = _REFERENCE_TOL) -> np.ndarray:
    """Reference grad F(x) = (x - z(x))/alpha used for certificates and observers."""
    z = prox_reference(task, x, alpha, delta_ref)
    return (x - z) / alpha


def prox_to_delta(
    task: TaskLoss,
    x: np.ndarray,
    alpha: float,
    delta: float,
    delta_ref: float,
    gamma: float | None = None,
) -> InnerResult:
    """Fixed-point steps until the delta-certificate holds, measured exactly.

    The certificate compares (x - z)/gamma against the reference envelope
    gradient at x.  delta = 0 routes to the closed-form solver (quadratics
    only): no finite fixed-point iteration can certify zero error.
    """
    if delta < 0:
        raise ValueError(f"delta={delta} must be >= 0")
    gamma = alpha if gamma is None else gamma

    g_ref = envelope_grad_reference(task, x, alpha, delta_ref)
    ref_norm = float(np.linalg.norm(g_ref))
    scale = max(1.0, float(np.linalg.norm(x)))
    # Below this the reference gradient has no significant digits and the
    # relative criterion degenerates; certify on absolute smallness instead.
    ref_is_zero = ref_norm <= 1e-13 * scale

    if delta == 0.0:
        if task.quadratic is None:
            raise CertificationError(
                "certification failed: delta=0 is unreachable by fixed-point iteration "
                "and the task has no closed-form prox"
            )
        z = prox_exact_quadratic(task, x, alpha)
        g = task.grad(z)
        err = float(np.linalg.norm((x - z) / gamma - g_ref))
        return InnerResult(z=z, y=z + alpha * g, g=g,
                           certified_rel_err=err / ref_norm if ref_norm > 0 else 0.0)

    rate = gamma * task.L
    if rate < 1:
        cap = max(1, int(10 * math.ceil(math.log(1.0 / delta) / math.log(1.0 / rate))))
    else:
        cap = 100
    z = x
    measured = math.inf
    for _ in range(cap):
        z = x - gamma * task.grad(z)
        err = float(np.linalg.norm((x - z) / gamma - g_ref))
        if not ref_is_zero:
            measured = err / ref_norm
        else:
            # x is (numerically) the task's own minimizer and the recursion
            # is stationary there; require absolute smallness.
            measured = 0.0 if err <= 1e-12 * scale else math.inf
        if measured <= delta:
            g = task.grad(z)
            return InnerResult(z=z, y=z + alpha * g, g=g, certified_rel_err=measured)
    raise CertificationError(
        f"certification failed: relative error {measured:.3g} > delta={delta:.3g} "
        f"after {cap} fixed-point steps (gamma*L={rate:.3g})"
    )


def envelope_grad(task: TaskLoss, x: np.ndarray, alpha: float, inner: InnerSolverSpec) -> np.ndarray:
    """Envelope gradient (x - z)/alpha for the configured inner solver."""
    res = inner_solve(task, x, alpha, inner, certify=False)
    return (x - res.z) / alpha


def envelope_value(task: TaskLoss, x: np.ndarray, alpha: float, inner: InnerSolverSpec) -> float:
    """Envelope objective f(z) + ||z - x||^2/(2 alpha) at the inner solution."""
    res = inner_solve(task, x, alpha, inner, certify=False)
    r = res.z - x
    return float(task.value(res.z) + 0.5 * (r @ r) / alpha)


def virtual_iterate(task: TaskLoss, z: np.ndarray, alpha: float) -> np.ndarray:
    """Virtual iterate y = z + alpha grad f(z); the exact prox of y recovers z."""
    return z + alpha * task.grad(z)


def inner_solve(
    task: TaskLoss,
    x: np.ndarray,
    alpha: float,
    inner: InnerSolverSpec,
    certify: bool = True,
) -> InnerResult:
    """Run the configured inner solver and package the result.

    Certificate conventions per kind: to_delta certifies the oracle quantity
    (x - z)/gamma against the reference gradient (the delta-oracle contract);
    fixed_point, when a closed-form reference is available and ``certify`` is
    true, reports the relative error of the used gradient grad f(z_s), which
    the geometric bound caps at (alpha L)^{s+1}.  Certification is an
    observer and never alters the returned z.
    """
    if inner.kind == "to_delta":
        return prox_to_delta(task, x, alpha, inner.delta, inner.delta_ref, inner.gamma)

    if inner.kind == "exact":
        z = prox_exact_quadratic(task, x, alpha)
        g = task.grad(z)
        cert = 0.0
    else:
        z = prox_fixed_point(task, x, alpha, inner.s, inner.gamma)
        g = task.grad(z)
        cert = None
        if certify and task.quadratic is not None:
            g_ref = envelope_grad_reference(task, x, alpha)
            ref_norm = float(np.linalg.norm(g_ref))
            err = float(np.linalg.norm(g - g_ref))
            cert = err / ref_norm if ref_norm > 0 else 0.0
    return InnerResult(z=z, y=z + alpha * g, g=g, certified_rel_err=cert)

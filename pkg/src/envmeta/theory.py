"""Closed-form constants, contraction factors, and neighborhood radii.

Every calculator evaluates a stated inequality or formula verbatim and is
pure/total on its precondition domain.  Precondition flags are exact
evaluations of the hypotheses as written; callers are expected to skip a
bound when its flag is false rather than extrapolate.

Units differ between bounds and are recorded in each entry: the strongly
convex rates are in squared distance to the minimizer, the nonconvex rate is
in squared gradient norm.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

__all__ = [
    "envelope_constants",
    "prox_smoothness_bound",
    "inner_error_bound",
    "mismatched_step_bound",
    "RateBound",
    "rate_thm41",
    "rate_thm42",
    "rate_thm54",
    "rate_thm56",
    "TheoryReport",
    "build_theory_report",
]


def envelope_constants(L: float, mu: float, alpha: float, convexity: str) -> tuple[float, float]:
    """Smoothness/strong-convexity constants (L_F, mu_F) of the alpha-envelope.

    nonconvex (requires alpha < 1/L):  L_F = L / (1 - alpha L),  mu_F = 0
    convex:                            L_F = L / (1 + alpha L),  mu_F = 0
    strongly convex:                   L_F = L / (1 + alpha L),
                                       mu_F = mu / (1 + alpha mu)

    The dimension-free fallback 1/alpha (valid for any convex task) is exposed
    separately by :func:`prox_smoothness_bound`.
    """
    if alpha <= 0:
        raise ValueError(f"alpha={alpha} must be positive")
    if convexity == "nonconvex":
        if alpha * L >= 1:
            raise ValueError(
                f"regime violation: nonconvex envelope needs alpha*L < 1, got {alpha * L:.3g}"
            )
        return L / (1 - alpha * L), 0.0
    if convexity == "convex":
        return L / (1 + alpha * L), 0.0
    if convexity == "strongly_convex":
        return L / (1 + alpha * L), mu / (1 + alpha * mu)
    raise ValueError(f"unknown convexity class {convexity!r}")


def prox_smoothness_bound(alpha: float) -> float:
    """Fallback envelope smoothness 1/alpha, valid for any convex task loss."""
    if alpha <= 0:
        raise ValueError(f"alpha={alpha} must be positive")
    return 1.0 / alpha


def inner_error_bound(alpha: float, L: float, s: int) -> float:
    """Geometric inner-loop error factor (alpha L)^{s+1} after s anchored steps."""
    if s < 0:
        raise ValueError(f"s={s} must be >= 0")
    return (alpha * L) ** (s + 1)


def mismatched_step_bound(alpha: float, gamma: float, L: float, s: int) -> float:
    """Error factor (gamma L)^s + |alpha - gamma| L for a mismatched inner stepsize.

    The mismatch term is an irreducible floor: extra inner steps only help
    while the target accuracy exceeds |alpha - gamma| L.
    """
    if s < 1:
        raise ValueError(f"s={s} must be >= 1")
    return (gamma * L) ** s + abs(alpha - gamma) * L


@dataclass(frozen=True)
class RateBound:
    """One convergence bound: per-step factor, neighborhood radius, flag."""

    name: str
    factor: float
    radius: float
    precondition_ok: bool
    units: str

    def value_at(self, k: int, initial: float) -> float:
        """Evaluate factor^k * initial + radius."""
        return self.factor ** k * initial + self.radius


def rate_thm41(L: float, mu: float, alpha: float, beta: float, tau: int,
               sigma_star_sq: float) -> RateBound:
    """Weak FO-MAML rate for L-smooth mu-strongly convex tasks.

    factor = 1 - beta mu / 4
    radius = (16/mu) (2 alpha^2 L^2 / mu + beta/tau + beta) sigma*^2
    preconditions: beta <= 1/(20 L), alpha <= 1/(4 sqrt(kappa) L).
    """
    kappa = L / mu
    ok = beta <= 1 / (20 * L) and alpha <= 1 / (4 * math.sqrt(kappa) * L)
    factor = 1 - beta * mu / 4
    radius = (16 / mu) * (2 * alpha**2 * L**2 / mu + beta / tau + beta) * sigma_star_sq
    return RateBound("thm41", factor, radius, ok, "dist_sq")


def rate_thm42(L: float, mu: float, alpha: float, beta: float, tau: int,
               delta: float, sigma_star_sq: float) -> RateBound:
    """Rate for the delta-oracle method on strongly convex tasks.

    factor = 1 - beta mu / 4
    radius = (16/mu) (2 delta^2 / mu + beta/tau + beta delta^2) sigma*^2
    preconditions: alpha <= 1/L, beta <= 1/(20 L), delta <= 1/(4 sqrt(kappa)).

    Structurally parallel to the weak FO-MAML rate with the inner error
    abstracted into delta; the two are not numerically identical under the
    substitution delta = alpha L.
    """
    kappa = L / mu
    ok = alpha <= 1 / L and beta <= 1 / (20 * L) and delta <= 1 / (4 * math.sqrt(kappa))
    factor = 1 - beta * mu / 4
    radius = (16 / mu) * (2 * delta**2 / mu + beta / tau + beta * delta**2) * sigma_star_sq
    return RateBound("thm42", factor, radius, ok, "dist_sq")


def rate_thm54(L: float, mu: float, alpha: float, beta: float, tau: int,
               delta: float, sigma_star_sq: float) -> RateBound:
    """Improved strongly convex rate via virtual iterates.

    factor = 1 - beta mu / 12
    radius = 6 (beta/tau + 3 delta^2 alpha^2 L) sigma*^2 / mu
    preconditions: alpha <= 1/(sqrt(6) L), beta <= tau/(4 L).

    With the one-step inner loop (delta = alpha L) the bias term becomes
    18 alpha^4 L^3 sigma*^2 / mu, the O(alpha^4) neighborhood in squared
    distance.
    """
    ok = alpha <= 1 / (math.sqrt(6) * L) and beta <= tau / (4 * L)
    factor = 1 - beta * mu / 12
    radius = 6 * (beta / tau + 3 * delta**2 * alpha**2 * L) * sigma_star_sq / mu
    return RateBound("thm54", factor, radius, ok, "dist_sq")


@dataclass(frozen=True)
class GradNormBound:
    """k-dependent bound on min_{t<=k} ||grad F(x^t)||^2."""

    value: float
    floor: float
    precondition_ok: bool
    units: str = "grad_norm_sq"


def rate_thm56(L: float, alpha: float, beta: float, tau: int, delta: float,
               sigma_sq: float, F0_minus_Fstar: float, k: int) -> GradNormBound:
    """Nonconvex-regime bound on the best squared gradient norm up to step k.

        4/(beta k) * (F(x^0) - F*)
      + 4 (alpha L)^2 delta^2 sigma^2
      + 32 beta (alpha L)^2 (1/tau + (alpha L)^2 delta^2) sigma^2

    preconditions: alpha <= 1/(4 L), beta <= 1/(16 L).  The last two terms do
    not decay with k; with delta = alpha L the floor has leading term
    4 (alpha L)^4 sigma^2.
    """
    if k < 1:
        raise ValueError(f"k={k} must be >= 1")
    ok = alpha <= 1 / (4 * L) and beta <= 1 / (16 * L)
    al = alpha * L
    floor = 4 * al**2 * delta**2 * sigma_sq \
        + 32 * beta * al**2 * (1 / tau + al**2 * delta**2) * sigma_sq
    return GradNormBound(value=4 * F0_minus_Fstar / (beta * k) + floor,
                         floor=floor, precondition_ok=ok)


@dataclass(frozen=True)
class TheoryReport:
    """Predicted constants and per-bound entries for one configuration."""

    L: float
    mu: float
    alpha: float
    kappa: float
    L_F: float
    mu_F: float
    delta_pred: float
    entries: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def build_theory_report(
    L: float,
    mu: float,
    alpha: float,
    beta: float,
    tau: int,
    sigma_star_sq: float,
    delta: float | None = None,
    inner_steps: int | None = None,
) -> TheoryReport:
    """Assemble the standard report for a strongly convex configuration.

    The predicted oracle accuracy delta_pred is the explicit delta when
    given, else (alpha L)^s for an s-step inner loop (the one-step method
    realizes delta = alpha L), defaulting to the one-step value.
    """
    if delta is not None:
        delta_pred = delta
    elif inner_steps is not None:
        delta_pred = (alpha * L) ** inner_steps
    else:
        delta_pred = alpha * L
    L_F, mu_F = envelope_constants(L, mu, alpha, "strongly_convex")
    kappa = L / mu
    entries = {}
    for bound in (
        rate_thm41(L, mu, alpha, beta, tau, sigma_star_sq),
        rate_thm42(L, mu, alpha, beta, tau, delta_pred, sigma_star_sq),
        rate_thm54(L, mu, alpha, beta, tau, delta_pred, sigma_star_sq),
    ):
        entries[bound.name] = {
            "factor": bound.factor,
            "radius": bound.radius,
            "precondition_ok": bound.precondition_ok,
            "units": bound.units,
            "delta_pred": delta_pred,
        }
    return TheoryReport(L=L, mu=mu, alpha=alpha, kappa=kappa, L_F=L_F, mu_F=mu_F,
                        delta_pred=delta_pred, entries=entries)

"""Bound-verification check suites shared by the CLI and the acceptance tests.

Each check returns a CheckResult and is self-contained: it builds its own
seeded suites, runs the relevant method, and compares measured quantities to
the stated bound at the stated tolerance.  Checks print nothing; callers
format the one-line pass/fail output.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from ..algorithms import run_fo_maml, run_fo_muml, run_full_gd
from ..counterexamples import (
    NONCONVEXITY_THRESHOLD,
    nonconvexity_witness,
    phi_second_cosine,
    phi_second_fd,
    phi_second_piecewise,
    piecewise_quartic,
    quadratic_cosine,
    verify_nonconvexity,
    verify_nonsmoothness,
)
from ..envelope import (
    CertificationError,
    InnerSolverSpec,
    envelope_grad,
    envelope_grad_reference,
    envelope_value,
    prox_exact_quadratic,
    prox_fixed_point,
    prox_to_delta,
)
from ..tasks import TaskSuite, make_explicit_quadratic_suite, make_logistic_suite, make_quadratic_suite, quadratic_task
from ..theory import rate_thm41, rate_thm42, rate_thm54, rate_thm56
from .fitting import loglog_slope
from .ground_truth import bias_fixed_point, estimate_sigma_sq, solve_ground_truth

__all__ = ["CheckResult", "CHECKS", "run_check"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed_s: float = 0.0

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{self.name}] {status} ({self.elapsed_s:.2f}s): {self.detail}"


def _timed(name: str, fn) -> CheckResult:
    start = time.perf_counter()
    passed, detail = fn()
    return CheckResult(name, passed, detail, time.perf_counter() - start)


def _exact_grad(task, x, alpha):
    z = prox_exact_quadratic(task, x, alpha)
    return (x - z) / alpha


# --- inner-loop error bound ------------------------------------------------

LEMMA4_ALPHAS = (0.1, 0.25, 0.5)


def check_lemma4() -> CheckResult:
    """Geometric inner error: ||grad f(z_s) - grad F(x)|| <= (aL)^{s+1} ||grad F(x)||."""

    def body():
        rng = np.random.Generator(np.random.Philox(key=np.uint64(314)))
        cases = violations = 0
        for d in (1, 5):
            suite = make_quadratic_suite(n=20, d=d, mu=0.1, L=1.0, center_spread=1.0,
                                         seed=100 + d)
            for task in suite.tasks:
                x = rng.standard_normal(d) * 2.0
                for alpha in LEMMA4_ALPHAS:  # L = 1, so alpha*L = alpha
                    g_ref = _exact_grad(task, x, alpha)
                    ref = np.linalg.norm(g_ref)
                    for s in range(6):
                        z = x if s == 0 else prox_fixed_point(task, x, alpha, s)
                        err = np.linalg.norm(task.grad(z) - g_ref)
                        cases += 1
                        if err > alpha**(s + 1) * ref + 1e-12:
                            violations += 1
        # 1-D single-quadratic tightness: the bound is an equality.
        task = quadratic_task([[1.0]], [0.0])
        x = np.array([1.3])
        gap = 0.0
        for alpha in LEMMA4_ALPHAS:
            g_ref = _exact_grad(task, x, alpha)
            for s in range(6):
                z = x if s == 0 else prox_fixed_point(task, x, alpha, s)
                err = np.linalg.norm(task.grad(z) - g_ref)
                gap = max(gap, abs(err - alpha**(s + 1) * np.linalg.norm(g_ref)))
        ok = violations == 0 and gap <= 1e-12
        return ok, (f"{cases} grid cases, {violations} violations; "
                    f"1-D tightness gap {gap:.2e}")

    return _timed("lemma4", body)


def check_remark_a1() -> CheckResult:
    """Mismatched inner stepsize: bound and the certification floor."""

    def body():
        rng = np.random.Generator(np.random.Philox(key=np.uint64(272)))
        cases = violations = 0
        for d in (1, 5):
            suite = make_quadratic_suite(n=20, d=d, mu=0.1, L=1.0, center_spread=1.0,
                                         seed=200 + d)
            for task in suite.tasks:
                x = rng.standard_normal(d) * 2.0
                for alpha in LEMMA4_ALPHAS:
                    for gamma in (alpha / 2, 2 * alpha):
                        if gamma * 1.0 >= 1.0:
                            continue
                        g_ref = _exact_grad(task, x, alpha)
                        target = x - gamma * g_ref
                        for s in range(1, 6):
                            z = prox_fixed_point(task, x, alpha, s, gamma=gamma)
                            lhs = np.linalg.norm(z - target) / gamma
                            rhs = (gamma**s + abs(alpha - gamma)) * np.linalg.norm(g_ref)
                            cases += 1
                            if lhs > rhs + 1e-12:
                                violations += 1
        # Below the mismatch floor no step count can certify: on an isotropic
        # task the measured oracle error converges to |a-g| L / (1 + g L).
        # The alternating iterate can transiently dip under that limit, so
        # the target sits below every transient dip too.
        task = quadratic_task([[1.0]], [0.0])
        x = np.array([2.0])
        alpha = 0.25
        floor_hits = 0
        for gamma in (alpha / 2, 2 * alpha):
            delta = 0.2 * abs(alpha - gamma)
            try:
                prox_to_delta(task, x, alpha, delta, delta_ref=delta / 1000, gamma=gamma)
            except CertificationError:
                floor_hits += 1
        ok = violations == 0 and floor_hits == 2
        return ok, (f"{cases} grid cases, {violations} violations; "
                    f"certification refused below the floor in {floor_hits}/2 cases")

    return _timed("remarkA1", body)


# --- envelope identities and constants --------------------------------------

def check_envelope() -> CheckResult:
    """Gradient identity, finite differences, and envelope constants."""

    def body():
        failures = []
        exact = InnerSolverSpec("exact")
        suite = make_quadratic_suite(n=8, d=5, mu=0.1, L=10.0, center_spread=1.0, seed=303)
        alpha = 0.05
        rng = np.random.Generator(np.random.Philox(key=np.uint64(404)))

        # Two-formula identity (x - z)/alpha == grad f(z) with the exact inner.
        worst_id = 0.0
        for task in suite.tasks:
            for _ in range(6):
                x = rng.standard_normal(5) * 2
                z = prox_exact_quadratic(task, x, alpha)
                gap = np.linalg.norm((x - z) / alpha - task.grad(z))
                worst_id = max(worst_id, gap / max(1.0, np.linalg.norm(task.grad(z))))
        if worst_id > 1e-9:
            failures.append(f"gradient identity gap {worst_id:.2e} > 1e-9")

        # Central differences of the envelope value against the envelope gradient.
        worst_fd = 0.0
        for task in suite.tasks[:4]:
            x = rng.standard_normal(5)
            g = envelope_grad(task, x, alpha, exact)
            h = 1e-5
            fd = np.empty_like(x)
            for j in range(len(x)):
                e = np.zeros_like(x)
                e[j] = h
                fd[j] = (envelope_value(task, x + e, alpha, exact)
                         - envelope_value(task, x - e, alpha, exact)) / (2 * h)
            worst_fd = max(worst_fd, np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g)))
        if worst_fd > 1e-5:
            failures.append(f"finite-difference gradient gap {worst_fd:.2e} > 1e-5")

        # Envelope smoothness and strong monotonicity on random pairs.
        L, mu = suite.L, suite.mu
        L_F = L / (1 + alpha * L)
        mu_F = mu / (1 + alpha * mu)
        smooth_bad = mono_bad = 0
        for _ in range(1000):
            task = suite.tasks[int(rng.integers(suite.n))]
            x = rng.standard_normal(5) * 2
            y = rng.standard_normal(5) * 2
            gx, gy = _exact_grad(task, x, alpha), _exact_grad(task, y, alpha)
            if np.linalg.norm(gx - gy) > L_F * np.linalg.norm(x - y) * (1 + 1e-8):
                smooth_bad += 1
            if np.dot(gx - gy, x - y) < mu_F * np.dot(x - y, x - y) * (1 - 1e-8):
                mono_bad += 1
        if smooth_bad or mono_bad:
            failures.append(f"strongly convex class: {smooth_bad} smoothness / "
                            f"{mono_bad} monotonicity violations")

        # Convex class (unregularized logistic): smoothness only.
        lsuite = make_logistic_suite(n=4, d=3, samples_per_task=40, reg=0.0, seed=505)
        la = 0.5 / lsuite.L
        lLF = lsuite.L / (1 + la * lsuite.L)
        smooth_bad = 0
        for _ in range(1000):
            task = lsuite.tasks[int(rng.integers(lsuite.n))]
            x = rng.standard_normal(3)
            y = rng.standard_normal(3)
            gx = envelope_grad_reference(task, x, la)
            gy = envelope_grad_reference(task, y, la)
            if np.linalg.norm(gx - gy) > lLF * np.linalg.norm(x - y) * (1 + 1e-8):
                smooth_bad += 1
        if smooth_bad:
            failures.append(f"convex class: {smooth_bad} smoothness violations")

        return not failures, "; ".join(failures) if failures else (
            f"identity gap {worst_id:.1e}, fd gap {worst_fd:.1e}, "
            "2000 constant-inequality pairs clean")

    return _timed("envelope", body)


# --- convergence-rate checks -------------------------------------------------

THM54_SUITES = (
    # (kappa, n, d, suite seed)
    (1.0, 2, 2, 41),
    (10.0, 4, 3, 42),
    (100.0, 5, 2, 43),
    (10.0, 8, 5, 44),
    (100.0, 3, 4, 45),
)


def check_thm54(K: int = 2000) -> CheckResult:
    """Deterministic full-batch exact-inner runs against the improved rate."""

    def body():
        worst_margin = math.inf
        for kappa, n, d, seed in THM54_SUITES:
            L = 1.0
            mu = L / kappa
            suite = make_quadratic_suite(n=n, d=d, mu=mu, L=L, center_spread=1.0, seed=seed)
            alpha = 1.0 / (math.sqrt(6.0) * L)
            beta = n / (4.0 * L)
            gt = solve_ground_truth(suite, alpha)
            bound = rate_thm54(L, mu, alpha, beta, tau=n, delta=0.0,
                               sigma_star_sq=gt.sigma_star_sq)
            if not bound.precondition_ok:
                return False, f"preconditions unexpectedly unsatisfied for kappa={kappa}"
            traj = run_fo_muml(suite, None, alpha, beta, tau=n, K=K,
                               inner=InnerSolverSpec("exact"), seed=1, x_star=gt.x_star)
            ks = np.arange(K + 1)
            rhs = bound.factor**ks * traj.dist_sq[0] + bound.radius
            if np.any(traj.dist_sq > rhs):
                k_bad = int(np.argmax(traj.dist_sq > rhs))
                return False, (f"kappa={kappa}, n={n}: violated at k={k_bad} "
                               f"({traj.dist_sq[k_bad]:.6g} > {rhs[k_bad]:.6g})")
            worst_margin = min(worst_margin, float(np.min(rhs - traj.dist_sq)))
        return True, (f"{len(THM54_SUITES)} suites x {K} iterations, zero violations "
                      f"(min slack {worst_margin:.3g})")

    return _timed("thm54", body)


def _mc_mean_check(suite: TaskSuite, alpha: float, beta: float, tau: int, K: int,
                   inner: InnerSolverSpec | None, n_seeds: int, ks: tuple[int, ...],
                   bound) -> tuple[bool, str]:
    gt = solve_ground_truth(suite, alpha)
    runs = []
    for seed in range(n_seeds):
        if inner is None:
            traj = run_fo_maml(suite, None, alpha, beta, tau, K, seed=9000 + seed,
                               x_star=gt.x_star)
        else:
            traj = run_fo_muml(suite, None, alpha, beta, tau, K, inner=inner,
                               seed=9000 + seed, x_star=gt.x_star)
        runs.append(traj.dist_sq)
    stack = np.stack(runs)
    mean = stack.mean(axis=0)
    se = stack.std(axis=0, ddof=1) / math.sqrt(n_seeds)
    d0 = mean[0]
    details = []
    ok = True
    for k in ks:
        rhs = bound.factor**k * d0 + bound.radius + 3 * se[k]
        details.append(f"k={k}: {mean[k]:.4g} vs {rhs:.4g}")
        if mean[k] > rhs:
            ok = False
    return ok, "; ".join(details)


def check_thm42(n_seeds: int = 200) -> CheckResult:
    """Stochastic delta-oracle runs against the inexact-SGD rate."""

    def body():
        L, mu = 1.0, 0.1
        suite = make_quadratic_suite(n=8, d=5, mu=mu, L=L, center_spread=1.0, seed=2024)
        alpha = 0.5 / L
        beta = 1.0 / (20.0 * L)
        delta = 1.0 / (4.0 * math.sqrt(L / mu))
        bound = rate_thm42(L, mu, alpha, beta, tau=1, delta=delta,
                           sigma_star_sq=solve_ground_truth(suite, alpha).sigma_star_sq)
        if not bound.precondition_ok:
            return False, "preconditions unexpectedly unsatisfied"
        inner = InnerSolverSpec("to_delta", delta=delta, delta_ref=delta / 1000)
        ok, detail = _mc_mean_check(suite, alpha, beta, tau=1, K=1000, inner=inner,
                                    n_seeds=n_seeds, ks=(10, 100, 1000), bound=bound)
        return ok, f"{n_seeds} seeds; mean dist_sq vs bound+3SE: {detail}"

    return _timed("thm42", body)


def check_thm41(n_seeds: int = 120) -> CheckResult:
    """Stochastic one-step (FO-MAML) runs against the weak inexact-SGD rate."""

    def body():
        L, mu = 1.0, 0.1
        suite = make_quadratic_suite(n=8, d=5, mu=mu, L=L, center_spread=1.0, seed=2025)
        kappa = L / mu
        alpha = 0.9 / (4.0 * math.sqrt(kappa) * L)
        beta = 1.0 / (20.0 * L)
        bound = rate_thm41(L, mu, alpha, beta, tau=1,
                           sigma_star_sq=solve_ground_truth(suite, alpha).sigma_star_sq)
        if not bound.precondition_ok:
            return False, "preconditions unexpectedly unsatisfied"
        ok, detail = _mc_mean_check(suite, alpha, beta, tau=1, K=600, inner=None,
                                    n_seeds=n_seeds, ks=(10, 100, 600), bound=bound)
        return ok, f"{n_seeds} seeds; mean dist_sq vs bound+3SE: {detail}"

    return _timed("thm41", body)


def check_thm56() -> CheckResult:
    """Nonconvex-regime gradient-norm bound on a convex logistic instance."""

    def body():
        suite = make_logistic_suite(n=4, d=3, samples_per_task=50, reg=0.01, seed=11)
        L = suite.L
        alpha = 1.0 / (8.0 * L)
        beta = 1.0 / (16.0 * L)
        gt = solve_ground_truth(suite, alpha)
        traj = run_fo_maml(suite, None, alpha, beta, tau=suite.n, K=1000, seed=3,
                           x_star=gt.x_star, snapshot_stride=50)
        probes = [np.zeros(suite.d), gt.x_star, traj.x_final] + [x for _, x in traj.snapshots]
        sigma_sq = estimate_sigma_sq(suite, alpha, probes, inflation=2.0)
        f0 = traj.f_val[0]
        best = np.minimum.accumulate(traj.grad_norm_sq)
        details = []
        ok = True
        for k in (100, 1000):
            b = rate_thm56(L, alpha, beta, tau=suite.n, delta=alpha * L,
                           sigma_sq=sigma_sq, F0_minus_Fstar=f0 - gt.F_star, k=k)
            if not b.precondition_ok:
                return False, "preconditions unexpectedly unsatisfied"
            details.append(f"k={k}: {best[k]:.4g} vs {b.value:.4g}")
            if best[k] > b.value:
                ok = False
        return ok, f"sigma_sq(x2)={sigma_sq:.4g}; best grad_norm_sq vs bound: " + "; ".join(details)

    return _timed("thm56", body)


# --- one-step bias -----------------------------------------------------------

def asymmetric_pair_suite() -> TaskSuite:
    """The 1-D pair {z^2/2, (z-3)^2} with curvatures 1 and 2."""
    return make_explicit_quadratic_suite([[[1.0]], [[2.0]]], [[0.0], [3.0]])


def check_bias() -> CheckResult:
    """Closed-form one-step fixed point, iterative match, and alpha-scaling."""

    def body():
        suite = asymmetric_pair_suite()
        failures = []

        # Exact rational values: x_inf(0.1) = 48/25, x*(0.1) = 33/17,
        # x_inf(0.05) = 108/55, x*(0.05) = 63/32.
        expected = {0.1: (48 / 25, 33 / 17), 0.05: (108 / 55, 63 / 32)}
        biases = {}
        for alpha, (xi_exp, xs_exp) in expected.items():
            x_inf = bias_fixed_point(suite, alpha, beta=0.5)
            gt = solve_ground_truth(suite, alpha)
            if abs(x_inf[0] - xi_exp) > 1e-12 or abs(gt.x_star[0] - xs_exp) > 1e-12:
                failures.append(f"alpha={alpha}: fixed point/optimum off the rationals")
            biases[alpha] = abs(x_inf[0] - gt.x_star[0])
            traj = run_fo_maml(suite, None, alpha, beta=0.5, tau=2, K=120, seed=1,
                               x_star=gt.x_star)
            if abs(traj.x_final[0] - x_inf[0]) > 1e-8:
                failures.append(f"alpha={alpha}: iterative run misses the fixed point "
                                f"by {abs(traj.x_final[0] - x_inf[0]):.2e}")

        if abs(biases[0.1] - 0.021176) > 5e-6:
            failures.append(f"bias(0.1)={biases[0.1]:.6f} not approx 0.021176")
        if abs(biases[0.05] - 0.005116) > 5e-6:
            failures.append(f"bias(0.05)={biases[0.05]:.6f} not approx 0.005116")
        ratio = biases[0.1] / biases[0.05]
        if abs(ratio - 4.14) > 0.01:
            failures.append(f"bias ratio {ratio:.3f} not approx 4.14")

        alphas = np.geomspace(0.025, 0.2, 9)
        sweep_bias = []
        for alpha in alphas:
            x_inf = bias_fixed_point(suite, float(alpha), beta=0.5)
            gt = solve_ground_truth(suite, float(alpha))
            sweep_bias.append(abs(x_inf[0] - gt.x_star[0]))
        slope = loglog_slope(alphas, np.array(sweep_bias))
        if not 1.85 <= slope <= 2.15:
            failures.append(f"alpha-sweep bias slope {slope:.3f} outside [1.85, 2.15]")

        return not failures, "; ".join(failures) if failures else (
            f"bias(0.1)={biases[0.1]:.6f}, bias(0.05)={biases[0.05]:.6f}, "
            f"ratio {ratio:.3f}, sweep slope {slope:.3f}")

    return _timed("bias", body)


# --- reduction identities ----------------------------------------------------

REDUCTION_CONFIGS = (
    # (suite kwargs, alpha, beta, tau, K, run seed)
    (dict(n=4, d=3, mu=0.1, L=1.0, center_spread=1.0, seed=5), 0.2, 0.3, 2, 40, 17),
    (dict(n=3, d=2, mu=0.25, L=1.0, center_spread=0.5, seed=6), 0.1, 0.5, 1, 60, 23),
    (dict(n=5, d=4, mu=0.02, L=1.0, center_spread=2.0, seed=7), 0.15, 0.2, 5, 30, 31),
)


def _traj_equal(a, b) -> bool:
    return (np.array_equal(a.x_final, b.x_final)
            and np.array_equal(a.dist_sq, b.dist_sq, equal_nan=True)
            and np.array_equal(a.f_val, b.f_val)
            and np.array_equal(a.grad_norm_sq, b.grad_norm_sq)
            and np.array_equal(a.mean_cert_err, b.mean_cert_err, equal_nan=True))


def check_reductions() -> CheckResult:
    """Bitwise: one-step multistep == FO-MAML; exact full batch == full GD."""

    def body():
        for kwargs, alpha, beta, tau, K, seed in REDUCTION_CONFIGS:
            suite = make_quadratic_suite(**kwargs)
            gt = solve_ground_truth(suite, alpha)
            a = run_fo_maml(suite, None, alpha, beta, tau, K, seed=seed, x_star=gt.x_star)
            b = run_fo_muml(suite, None, alpha, beta, tau, K,
                            inner=InnerSolverSpec("fixed_point", s=1), seed=seed,
                            x_star=gt.x_star)
            if not _traj_equal(a, b):
                return False, f"fo-muml(fixed_point,1) != fo-maml on {kwargs}"
            c = run_fo_muml(suite, None, alpha, beta, suite.n, K,
                            inner=InnerSolverSpec("exact"), seed=seed, x_star=gt.x_star)
            d = run_full_gd(suite, None, alpha, beta, K, x_star=gt.x_star)
            if not _traj_equal(c, d):
                return False, f"fo-muml(exact, tau=n) != full-gd on {kwargs}"
        return True, f"{len(REDUCTION_CONFIGS)} seeded configs bitwise identical"

    return _timed("reductions", body)


# --- counterexample certification ---------------------------------------------

def check_counterexample_threshold() -> CheckResult:
    """Nonconvexity verdict flips exactly at alpha = 75/2249."""

    def body():
        failures = []
        if verify_nonconvexity(0.1).verdict != "NONCONVEX":
            failures.append("alpha=0.1 not certified NONCONVEX")
        if verify_nonconvexity(0.02).verdict == "NONCONVEX":
            failures.append("alpha=0.02 spuriously certified NONCONVEX")
        thr = NONCONVEXITY_THRESHOLD
        if verify_nonconvexity(thr * (1 + 2e-6)).verdict != "NONCONVEX":
            failures.append("just above the threshold: not NONCONVEX")
        if verify_nonconvexity(thr * (1 - 2e-6)).verdict == "NONCONVEX":
            failures.append("just below the threshold: NONCONVEX")
        lo, hi = 0.02, 0.1
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if verify_nonconvexity(mid).verdict == "NONCONVEX":
                hi = mid
            else:
                lo = mid
        flip = 0.5 * (lo + hi)
        if abs(flip - thr) > 1e-6:
            failures.append(f"sign flip localized at {flip:.8f}, expected {thr:.8f}")
        x0 = nonconvexity_witness(0.1)
        closed = phi_second_piecewise(0.1, x0)
        w = 1.0 / (1.0 + 0.1 / 75.0)
        hand = -2 * 0.1 / 5.0 * w**3 + w * w / 75.0
        if abs(closed - hand) > 1e-15:
            failures.append("witness curvature disagrees with the hand formula")
        return not failures, "; ".join(failures) if failures else (
            f"flip at {flip:.8f} (= 75/2249 to 1e-6); phi''(x0; 0.1) = {closed:.5f}")

    return _timed("counterexample-threshold", body)


def check_counterexample_fd(which: str) -> CheckResult:
    """Closed-form curvature vs second differences of phi(x) = f(z(x)).

    Agreement is required to 1e-4 relative wherever |phi''| >= 1e-3, for
    alpha in {0.05, 0.1, 0.5, 1} over a 50-point grid per alpha.
    """

    def body():
        worst = 0.0
        checked = 0
        bad = 0
        for alpha in (0.05, 0.1, 0.5, 1.0):
            if which == "quadratic_cosine":
                fn = quadratic_cosine()
                zs = np.linspace(0.5, 10.5 * math.pi, 50)
                xs = [(1 + alpha) * z - alpha * math.sin(z) for z in zs]
                closed_at = lambda x: phi_second_cosine(alpha, x)  # noqa: E731
            else:
                fn = piecewise_quartic()
                x0 = nonconvexity_witness(alpha)
                xs = np.linspace(x0 - 0.35, x0 + 0.35, 50)
                closed_at = lambda x: phi_second_piecewise(alpha, x)  # noqa: E731
            for x in xs:
                closed = closed_at(float(x))
                fd = phi_second_fd(fn, alpha, float(x))
                if abs(closed) < 1e-3 and abs(fd) < 1e-3:
                    continue
                checked += 1
                rel = abs(closed - fd) / max(abs(closed), abs(fd))
                worst = max(worst, rel)
                if rel > 1e-4:
                    bad += 1
        ok = bad == 0
        return ok, (f"{which}: {checked} grid points with |phi''| >= 1e-3, "
                    f"{bad} disagreements, worst relative gap {worst:.3g}")

    return _timed(f"counterexample-fd-{which}", body)


def check_nonsmoothness_growth() -> CheckResult:
    """max |phi''| strictly increases along z_m = (2m + 1/2) pi at alpha = 1."""

    def body():
        report = verify_nonsmoothness(1.0)
        mags = [abs(r[2]) for r in report.grid]
        increasing = all(b > a for a, b in zip(mags, mags[1:]))
        if not increasing:
            return False, "certified |phi''| not strictly increasing along the peaks"
        if report.closed_matches_fd is False:
            return False, "cosine closed form disagrees with finite differences"
        return True, (f"|phi''| grows {mags[0]:.3f} -> {mags[-1]:.3f} over m=1..10; "
                      "finite differences agree")

    return _timed("counterexample-nonsmooth", body)


CHECKS = {
    "lemma4": check_lemma4,
    "remarkA1": check_remark_a1,
    "envelope": check_envelope,
    "thm41": check_thm41,
    "thm42": check_thm42,
    "thm54": check_thm54,
    "thm56": check_thm56,
}


def run_check(name: str) -> CheckResult:
    if name not in CHECKS:
        raise ValueError(f"unknown check {name!r}; expected one of {sorted(CHECKS)}")
    return CHECKS[name]()

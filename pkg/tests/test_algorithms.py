import math

import numpy as np
import pytest

from envmeta.algorithms import (
    DivergenceError,
    OuterSpec,
    run_exact_prox_sgd,
    run_fo_maml,
    run_fo_muml,
    run_full_gd,
    sample_batch_sequence,
)
from envmeta.envelope import InnerSolverSpec
from envmeta.harness.ground_truth import bias_fixed_point, solve_ground_truth
from envmeta.tasks import make_explicit_quadratic_suite, make_quadratic_suite


def traj_equal(a, b):
    return (np.array_equal(a.x_final, b.x_final)
            and np.array_equal(a.dist_sq, b.dist_sq, equal_nan=True)
            and np.array_equal(a.f_val, b.f_val)
            and np.array_equal(a.grad_norm_sq, b.grad_norm_sq)
            and np.array_equal(a.mean_cert_err, b.mean_cert_err, equal_nan=True))


class TestFoMaml:
    def test_hand_iteration(self):
        # n=1, f(z)=z^2/2, alpha=beta=0.1, x0=1: z0 = 0.9, x1 = 1 - 0.1*0.9 = 0.91.
        suite = make_explicit_quadratic_suite([[[1.0]]], [[0.0]])
        traj = run_fo_maml(suite, np.array([1.0]), alpha=0.1, beta=0.1, tau=1, K=1, seed=0)
        assert traj.x_final[0] == pytest.approx(0.91, abs=1e-15)

    def test_stationary_at_shared_minimizer(self):
        suite = make_quadratic_suite(n=3, d=2, mu=0.5, L=2.0, center_spread=0.0, seed=8)
        c = suite.tasks[0].quadratic.c
        traj = run_fo_maml(suite, c, alpha=0.2, beta=0.4, tau=3, K=25, seed=1)
        assert np.allclose(traj.x_final, c, atol=1e-14)

    def test_full_batch_converges_to_biased_fixed_point(self, pair_suite):
        # Closed-form oracle: x_inf = 4.8/2.5 = 1.92 at alpha=0.1, while the
        # envelope optimum is x* = 5/(85/33) = 33/17.
        gt = solve_ground_truth(pair_suite, 0.1)
        x_inf = bias_fixed_point(pair_suite, 0.1, 0.5)
        assert x_inf[0] == pytest.approx(1.92, abs=1e-14)
        assert gt.x_star[0] == pytest.approx(33 / 17, abs=1e-14)
        traj = run_fo_maml(pair_suite, None, alpha=0.1, beta=0.5, tau=2, K=120, seed=0,
                           x_star=gt.x_star)
        assert abs(traj.x_final[0] - 1.92) <= 1e-10
        assert traj.dist_sq[-1] == pytest.approx((1.92 - 33 / 17) ** 2, rel=1e-8)

    def test_warns_outside_contraction_regime(self, pair_suite):
        with pytest.warns(UserWarning, match="alpha\\*L"):
            run_fo_maml(pair_suite, None, alpha=0.6, beta=0.01, tau=2, K=1, seed=0)

    def test_divergence_raises(self, pair_suite):
        with pytest.raises(DivergenceError):
            import warnings
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                run_fo_maml(pair_suite, None, alpha=0.1, beta=150.0, tau=2, K=400, seed=0)


class TestReductions:
    @pytest.mark.parametrize("tau,K,seed", [(2, 40, 17), (1, 60, 23), (4, 30, 31)])
    def test_single_step_muml_is_fo_maml_bitwise(self, tau, K, seed):
        suite = make_quadratic_suite(n=4, d=3, mu=0.1, L=1.0, center_spread=1.0, seed=5)
        gt = solve_ground_truth(suite, 0.2)
        a = run_fo_maml(suite, None, 0.2, 0.3, tau, K, seed=seed, x_star=gt.x_star)
        b = run_fo_muml(suite, None, 0.2, 0.3, tau, K,
                        inner=InnerSolverSpec("fixed_point", s=1), seed=seed,
                        x_star=gt.x_star)
        assert traj_equal(a, b)

    @pytest.mark.parametrize("seed", [17, 23, 31])
    def test_exact_full_batch_muml_is_full_gd_bitwise(self, seed):
        suite = make_quadratic_suite(n=4, d=3, mu=0.1, L=1.0, center_spread=1.0, seed=5)
        gt = solve_ground_truth(suite, 0.2)
        a = run_fo_muml(suite, None, 0.2, 0.3, suite.n, 50,
                        inner=InnerSolverSpec("exact"), seed=seed, x_star=gt.x_star)
        b = run_full_gd(suite, None, 0.2, 0.3, 50, x_star=gt.x_star)
        assert traj_equal(a, b)

    def test_exact_prox_sgd_full_batch_is_full_gd(self):
        suite = make_quadratic_suite(n=3, d=2, mu=0.2, L=1.0, center_spread=1.0, seed=9)
        a = run_exact_prox_sgd(suite, None, 0.3, 0.5, suite.n, 40, seed=4)
        b = run_full_gd(suite, None, 0.3, 0.5, 40)
        assert traj_equal(a, b)


class TestExactProxSgd:
    def test_first_step_unbiased_against_full_gd(self):
        # Mean over seeds of x^1 equals the deterministic step within 3 SE.
        suite = make_quadratic_suite(n=6, d=3, mu=0.2, L=1.0, center_spread=1.0, seed=12)
        beta = 0.4
        full = run_full_gd(suite, None, 0.3, beta, 1)
        finals = np.stack([
            run_exact_prox_sgd(suite, None, 0.3, beta, 1, 1, seed=s).x_final
            for s in range(100)
        ])
        mean = finals.mean(axis=0)
        se = finals.std(axis=0, ddof=1) / math.sqrt(len(finals))
        assert np.all(np.abs(mean - full.x_final) <= 3 * se + 1e-12)

    def test_zero_spread_converges_to_common_minimizer(self):
        suite = make_quadratic_suite(n=4, d=2, mu=0.5, L=1.0, center_spread=0.0, seed=13)
        gt = solve_ground_truth(suite, 0.2)
        traj = run_exact_prox_sgd(suite, None, 0.2, 0.8, 1, 600, seed=3, x_star=gt.x_star)
        assert traj.dist_sq[-1] <= 1e-16

    def test_requires_closed_form(self):
        from envmeta.tasks import make_logistic_suite
        suite = make_logistic_suite(n=2, d=2, samples_per_task=10, reg=0.01, seed=0)
        with pytest.raises(ValueError, match="closed-form"):
            run_exact_prox_sgd(suite, None, 0.1, 0.1, 1, 5, seed=0)


class TestFullGd:
    def test_zero_steps_and_zero_motion(self, small_suite):
        gt = solve_ground_truth(small_suite, 0.25)
        traj = run_full_gd(small_suite, gt.x_star, 0.25, 0.5, 30, x_star=gt.x_star)
        assert np.all(traj.dist_sq <= 1e-18)

    def test_linear_contraction_bounded_by_spectrum(self):
        # Per-step squared-distance contraction of GD on a quadratic envelope
        # is at most max(|1 - beta mu_F|, |1 - beta L_F|)^2.
        suite = make_quadratic_suite(n=3, d=3, mu=0.25, L=1.0, center_spread=1.0, seed=14)
        alpha, beta = 0.3, 0.7
        gt = solve_ground_truth(suite, alpha)
        traj = run_full_gd(suite, None, alpha, beta, 60, x_star=gt.x_star)
        rate = max(abs(1 - beta * gt.mu_F), abs(1 - beta * gt.L_F)) ** 2
        ratios = traj.dist_sq[1:] / traj.dist_sq[:-1]
        assert np.all(ratios <= rate + 1e-10)

    def test_monotone_descent_with_safe_stepsize(self, small_suite):
        gt = solve_ground_truth(small_suite, 0.3)
        traj = run_full_gd(small_suite, None, 0.3, 1.0 / gt.L_F, 200, x_star=gt.x_star)
        assert np.all(np.diff(traj.f_val) <= 1e-12)


class TestTrajectory:
    def test_record_count_and_fields(self, small_suite):
        gt = solve_ground_truth(small_suite, 0.2)
        traj = run_fo_maml(small_suite, None, 0.2, 0.3, 2, 17, seed=1, x_star=gt.x_star)
        assert len(traj) == 18
        assert np.all(np.isfinite(traj.dist_sq))
        assert np.all(np.isfinite(traj.f_val))
        assert np.all(np.isfinite(traj.grad_norm_sq))
        # Row 0 describes x^0 before any batch: no certificate there.
        assert np.isnan(traj.mean_cert_err[0])
        assert np.all(np.isfinite(traj.mean_cert_err[1:]))
        assert np.all(traj.wall_ns == 0)

    def test_multistep_certificates_respect_geometric_bound(self, small_suite):
        # s=3 at alpha L = 0.5: used-gradient error is at most (1/2)^4.
        gt = solve_ground_truth(small_suite, 0.5)
        traj = run_fo_muml(small_suite, None, 0.5, 0.3, 2, 40,
                           inner=InnerSolverSpec("fixed_point", s=3), seed=2,
                           x_star=gt.x_star)
        assert np.nanmax(traj.mean_cert_err) <= 0.5 ** 4 + 1e-12

    def test_snapshots_follow_stride(self, small_suite):
        traj = run_fo_maml(small_suite, None, 0.2, 0.3, 2, 10, seed=1, snapshot_stride=4)
        assert [k for k, _ in traj.snapshots] == [0, 4, 8]

    def test_deterministic_in_seed(self, small_suite):
        a = run_fo_maml(small_suite, None, 0.2, 0.3, 2, 25, seed=6)
        b = run_fo_maml(small_suite, None, 0.2, 0.3, 2, 25, seed=6)
        assert traj_equal(a, b)
        c = run_fo_maml(small_suite, None, 0.2, 0.3, 2, 25, seed=7)
        assert not np.array_equal(a.x_final, c.x_final)


class TestBatchSampling:
    def test_uniform_without_replacement(self):
        batches = sample_batch_sequence(n=6, tau=3, K=500, seed=99)
        for batch in batches:
            assert len(set(batch.tolist())) == 3
            assert np.all(np.diff(batch) > 0)  # sorted, averaging order fixed
        counts = np.bincount(np.concatenate(batches), minlength=6)
        # Uniform marginal: each of 6 tasks appears in ~K*tau/n = 250 batches.
        assert np.all(np.abs(counts - 250) < 60)

    def test_tau_must_fit(self, small_suite):
        with pytest.raises(ValueError, match="tau"):
            run_fo_maml(small_suite, None, 0.2, 0.3, tau=9, K=3, seed=0)

    def test_outer_spec_validation(self):
        with pytest.raises(ValueError, match="method"):
            OuterSpec(method="adam", beta=0.1, tau=1, K=1)
        with pytest.raises(ValueError, match="beta"):
            OuterSpec(method="fo-maml", beta=0.0, tau=1, K=1)

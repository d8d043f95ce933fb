import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from envmeta.envelope import (
    CertificationError,
    InnerSolverSpec,
    envelope_grad,
    envelope_value,
    prox_exact_quadratic,
    prox_fixed_point,
    prox_to_delta,
    virtual_iterate,
)
from envmeta.tasks import make_logistic_suite, make_quadratic_suite, quadratic_task

EXACT = InnerSolverSpec("exact")


def exact_env_grad(task, x, alpha):
    return (x - prox_exact_quadratic(task, x, alpha)) / alpha


class TestExactProx:
    def test_one_dimensional_hand_solve(self):
        # f(z)=z^2/2 (L=1), alpha=1, x=2: z = x/(1+alpha L) = 1.
        task = quadratic_task([[1.0]], [0.0])
        z = prox_exact_quadratic(task, np.array([2.0]), 1.0)
        assert z[0] == pytest.approx(1.0, abs=1e-14)

    def test_prox_of_minimizer_is_minimizer(self, small_suite):
        for task in small_suite.tasks:
            for alpha in (0.05, 0.3, 2.0):
                z = prox_exact_quadratic(task, task.quadratic.c, alpha)
                assert np.allclose(z, task.quadratic.c, atol=1e-12)

    def test_stationarity_residual(self, rng):
        suite = make_quadratic_suite(n=6, d=5, mu=0.1, L=10.0, center_spread=1.0, seed=15)
        for task in suite.tasks:
            x = rng.standard_normal(5) * 3
            z = prox_exact_quadratic(task, x, 0.07)
            residual = np.linalg.norm(task.grad(z) + (z - x) / 0.07)
            assert residual <= 1e-10 * max(1.0, np.linalg.norm(x))

    def test_requires_quadratic_descriptor(self):
        task = make_logistic_suite(n=1, d=2, samples_per_task=10, reg=0.0, seed=0).tasks[0]
        with pytest.raises(ValueError, match="closed form"):
            prox_exact_quadratic(task, np.zeros(2), 0.1)


class TestFixedPoint:
    def test_single_step_is_one_gradient_step(self, small_suite, rng):
        # z_1 = x - alpha grad f(x): exactly the one-step inner update.
        task = small_suite.tasks[0]
        x = rng.standard_normal(3)
        z1 = prox_fixed_point(task, x, 0.2, s=1)
        assert np.array_equal(z1, x - 0.2 * task.grad(x))

    def test_minimizer_is_a_fixed_point(self, small_suite):
        task = small_suite.tasks[1]
        c = task.quadratic.c
        for s in (1, 3, 7):
            assert np.array_equal(prox_fixed_point(task, c, 0.3, s), c)

    @pytest.mark.parametrize("alpha", [0.1, 0.25, 0.5])
    @pytest.mark.parametrize("s", [0, 1, 2, 3, 4, 5])
    def test_one_dimensional_error_is_exactly_geometric(self, alpha, s):
        # For f(z) = L z^2 / 2 the inner error is exactly (alpha L)^{s+1} |grad F(x)|
        # with grad F(x) = L x / (1 + alpha L).
        L, x0 = 1.0, 1.0
        task = quadratic_task([[L]], [0.0])
        x = np.array([x0])
        z = x if s == 0 else prox_fixed_point(task, x, alpha, s)
        grad_F = L * x0 / (1 + alpha * L)
        err = abs(task.grad(z)[0] - grad_F)
        assert err == pytest.approx((alpha * L) ** (s + 1) * abs(grad_F), abs=1e-12)

    def test_geometric_bound_on_random_suites(self, rng):
        for d in (1, 5):
            suite = make_quadratic_suite(n=10, d=d, mu=0.1, L=1.0, center_spread=1.0,
                                         seed=60 + d)
            for task in suite.tasks:
                x = rng.standard_normal(d)
                for alpha in (0.1, 0.25, 0.5):
                    ref = exact_env_grad(task, x, alpha)
                    for s in range(6):
                        z = x if s == 0 else prox_fixed_point(task, x, alpha, s)
                        err = np.linalg.norm(task.grad(z) - ref)
                        assert err <= alpha ** (s + 1) * np.linalg.norm(ref) + 1e-12

    def test_mismatched_stepsize_bound(self, rng):
        # ||(z_s - (x - gamma grad F(x)))/gamma|| <= ((gamma L)^s + |a-g| L) ||grad F(x)||
        for d in (1, 5):
            suite = make_quadratic_suite(n=10, d=d, mu=0.1, L=1.0, center_spread=1.0,
                                         seed=70 + d)
            for task in suite.tasks:
                x = rng.standard_normal(d)
                for alpha in (0.1, 0.25, 0.5):
                    for gamma in (alpha / 2, 2 * alpha):
                        if gamma >= 1.0:
                            continue
                        ref = exact_env_grad(task, x, alpha)
                        target = x - gamma * ref
                        for s in range(1, 6):
                            z = prox_fixed_point(task, x, alpha, s, gamma=gamma)
                            lhs = np.linalg.norm(z - target) / gamma
                            rhs = (gamma ** s + abs(alpha - gamma)) * np.linalg.norm(ref)
                            assert lhs <= rhs + 1e-12

    def test_noncontractive_stepsize_warns(self):
        task = quadratic_task([[2.0]], [0.0])
        with pytest.warns(UserWarning, match="may not contract"):
            prox_fixed_point(task, np.array([1.0]), 0.6, s=2)


class TestToDelta:
    def test_delta_zero_routes_to_exact(self, small_suite, rng):
        task = small_suite.tasks[0]
        x = rng.standard_normal(3)
        res = prox_to_delta(task, x, 0.3, delta=0.0, delta_ref=1e-14)
        assert np.allclose(res.z, prox_exact_quadratic(task, x, 0.3), atol=1e-10)
        assert res.certified_rel_err <= 1e-10

    def test_delta_zero_without_closed_form_fails(self):
        task = make_logistic_suite(n=1, d=2, samples_per_task=10, reg=0.0, seed=0).tasks[0]
        with pytest.raises(CertificationError):
            prox_to_delta(task, np.zeros(2), 0.1, delta=0.0, delta_ref=1e-14)

    def test_one_step_accuracy_certifies_quickly(self, rng):
        # delta = alpha L is realized by a single anchored step.
        suite = make_quadratic_suite(n=5, d=4, mu=0.2, L=1.0, center_spread=1.0, seed=80)
        alpha = 0.25
        for task in suite.tasks:
            x = rng.standard_normal(4)
            res = prox_to_delta(task, x, alpha, delta=alpha * 1.0, delta_ref=alpha / 1000)
            assert res.certified_rel_err <= alpha

    @pytest.mark.parametrize("s", [1, 2, 3])
    def test_geometric_delta_certified(self, s, rng):
        suite = make_quadratic_suite(n=5, d=4, mu=0.2, L=1.0, center_spread=1.0, seed=81)
        alpha = 0.5
        delta = alpha ** (s + 1)
        for task in suite.tasks:
            x = rng.standard_normal(4)
            res = prox_to_delta(task, x, alpha, delta=delta, delta_ref=delta / 1000)
            assert res.certified_rel_err <= delta

    def test_certificate_reference_is_exact_for_quadratics(self, small_suite, rng):
        task = small_suite.tasks[2]
        x = rng.standard_normal(3)
        alpha = 0.4
        res = prox_to_delta(task, x, alpha, delta=0.1, delta_ref=1e-6)
        ref = exact_env_grad(task, x, alpha)
        measured = np.linalg.norm((x - res.z) / alpha - ref) / np.linalg.norm(ref)
        assert res.certified_rel_err == pytest.approx(measured, rel=1e-12)

    def test_at_task_minimizer_certifies_immediately(self, small_suite):
        task = small_suite.tasks[0]
        res = prox_to_delta(task, task.quadratic.c, 0.3, delta=0.01, delta_ref=1e-5)
        assert np.allclose(res.z, task.quadratic.c, atol=1e-12)
        assert res.certified_rel_err == 0.0

    def test_mismatch_floor_blocks_certification(self):
        # With gamma != alpha the oracle error cannot be driven to zero: it
        # converges to |a-g|L/(1+gL).  The alternating iterate can transiently
        # cancel part of the mismatch (for a=0.25, g=0.5 the dip bottoms out
        # at exactly 1/16 at s=3), so the refusal demonstration targets a
        # delta below every transient dip as well as the asymptotic floor.
        task = quadratic_task([[1.0]], [0.0])
        x = np.array([2.0])
        alpha = 0.25
        for gamma in (alpha / 2, 2 * alpha):
            delta = 0.2 * abs(alpha - gamma)
            with pytest.raises(CertificationError):
                prox_to_delta(task, x, alpha, delta, delta_ref=delta / 1000, gamma=gamma)


class TestEnvelopeValueAndGrad:
    def test_hand_values_one_dimensional(self):
        # f(z)=z^2/2, alpha=1, x=2: z=1, F(x) = 1/2 + 1/2 = 1, grad F(x) = 1.
        task = quadratic_task([[1.0]], [0.0])
        x = np.array([2.0])
        assert envelope_value(task, x, 1.0, EXACT) == pytest.approx(1.0, abs=1e-12)
        assert envelope_grad(task, x, 1.0, EXACT)[0] == pytest.approx(1.0, abs=1e-12)

    def test_grad_zero_and_value_f_at_minimizer(self, small_suite):
        task = small_suite.tasks[0]
        c = task.quadratic.c
        assert np.linalg.norm(envelope_grad(task, c, 0.5, EXACT)) <= 1e-12
        assert envelope_value(task, c, 0.5, EXACT) == pytest.approx(task.value(c), abs=1e-14)

    def test_two_formula_identity(self, rng):
        suite = make_quadratic_suite(n=8, d=5, mu=0.1, L=10.0, center_spread=1.0, seed=90)
        for task in suite.tasks:
            x = rng.standard_normal(5) * 2
            z = prox_exact_quadratic(task, x, 0.05)
            lhs = (x - z) / 0.05
            rhs = task.grad(z)
            assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1.0, np.linalg.norm(rhs))

    def test_envelope_below_loss(self, small_suite, rng):
        # z = x is feasible in the inner minimization, so F(x) <= f(x).
        for task in small_suite.tasks:
            for _ in range(5):
                x = rng.standard_normal(3)
                assert envelope_value(task, x, 0.3, EXACT) <= task.value(x) + 1e-12

    def test_finite_difference_gradient(self, small_suite):
        task = small_suite.tasks[1]
        x = np.array([0.4, -0.2, 1.1])
        g = envelope_grad(task, x, 0.3, EXACT)
        h = 1e-5
        for j in range(3):
            e = np.zeros(3)
            e[j] = h
            fd = (envelope_value(task, x + e, 0.3, EXACT)
                  - envelope_value(task, x - e, 0.3, EXACT)) / (2 * h)
            assert fd == pytest.approx(g[j], rel=1e-5, abs=1e-8)

    @pytest.mark.parametrize("alpha", [0.05, 0.3])
    def test_envelope_smoothness_and_monotonicity(self, alpha, rng):
        suite = make_quadratic_suite(n=6, d=4, mu=0.5, L=5.0, center_spread=1.0, seed=91)
        L_F = 5.0 / (1 + alpha * 5.0)
        mu_F = 0.5 / (1 + alpha * 0.5)
        for task in suite.tasks:
            for _ in range(50):
                x, y = rng.standard_normal(4), rng.standard_normal(4)
                gx, gy = exact_env_grad(task, x, alpha), exact_env_grad(task, y, alpha)
                assert np.linalg.norm(gx - gy) <= L_F * np.linalg.norm(x - y) * (1 + 1e-8)
                assert np.dot(gx - gy, x - y) >= mu_F * np.dot(x - y, x - y) * (1 - 1e-8)


class TestVirtualIterate:
    def test_minimizer_maps_to_itself(self, small_suite):
        task = small_suite.tasks[0]
        c = task.quadratic.c
        assert np.allclose(virtual_iterate(task, c, 0.7), c, atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(alpha=st.floats(0.01, 2.0), scale=st.floats(-3, 3))
    def test_prox_round_trip(self, alpha, scale):
        # The exact prox of y = z + alpha grad f(z) recovers z.
        suite = make_quadratic_suite(n=2, d=3, mu=0.3, L=3.0, center_spread=1.0, seed=92)
        task = suite.tasks[0]
        z = np.array([scale, -0.5 * scale, 0.25])
        y = virtual_iterate(task, z, alpha)
        back = prox_exact_quadratic(task, y, alpha)
        assert np.linalg.norm(back - z) <= 1e-9 * max(1.0, np.linalg.norm(z))

    def test_gradient_transport(self, small_suite, rng):
        # grad F(y) at the virtual iterate equals grad f(z).
        task = small_suite.tasks[2]
        z = rng.standard_normal(3)
        y = virtual_iterate(task, z, 0.4)
        assert np.linalg.norm(exact_env_grad(task, y, 0.4) - task.grad(z)) <= 1e-9


class TestInnerSpecValidation:
    def test_delta_ref_must_be_small(self):
        with pytest.raises(ValueError, match="delta_ref"):
            InnerSolverSpec("to_delta", delta=0.1, delta_ref=0.01)

    def test_fixed_point_needs_steps(self):
        with pytest.raises(ValueError, match="s >= 1"):
            InnerSolverSpec("fixed_point", s=0)

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="kind"):
            InnerSolverSpec("newton")

    def test_hyphenated_aliases(self):
        assert InnerSolverSpec("exact-closed-form").kind == "exact"
        assert InnerSolverSpec("fixed-point", s=2).kind == "fixed_point"
        assert InnerSolverSpec("to-delta", delta=0.1, delta_ref=1e-4).kind == "to_delta"

    def test_envelope_spec_pairs_alpha_with_inner(self):
        from envmeta.envelope import EnvelopeSpec
        spec = EnvelopeSpec(alpha=0.2, inner=InnerSolverSpec("exact"))
        assert spec.alpha == 0.2
        with pytest.raises(ValueError, match="alpha"):
            EnvelopeSpec(alpha=0.0, inner=InnerSolverSpec("exact"))

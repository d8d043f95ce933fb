"""Acceptance gate: every top-level guarantee exercised at its stated tolerance.

Each test prints one pass/fail line (visible with `pytest -rA` or `-s`) and
asserts both the outcome and the runtime budget.

Known honest failure: criterion 8's finite-difference agreement clause for
the piecewise-quartic landscape.  The certified closed form (sign flip at
alpha = 75/2249, required by the same criterion) is the chain expression with
a unit weight on the implicit second-derivative term, which is not the second
derivative of phi(x) = f(z(x)) that the finite differences measure: at
alpha = 0.1 the certified value at the witness is -0.02654 while the measured
curvature is +0.01181 (the full chain rule carries the factor f'(z0) = 0.03733
that the certified form replaces by 1).  Both clauses cannot hold at once; the
test is kept faithful rather than weakened.  The quadratic-cosine half of the
clause holds, since there the certified formula is the exact second derivative.
"""

import pytest

from envmeta.harness import verify


def _report(result, budget_s):
    print(result.line)
    assert result.elapsed_s < budget_s, f"runtime {result.elapsed_s:.1f}s over budget {budget_s}s"
    assert result.passed, result.detail


def test_criterion_1_inner_error_bound():
    _report(verify.check_lemma4(), budget_s=5.0)


def test_criterion_2_mismatched_stepsize():
    _report(verify.check_remark_a1(), budget_s=5.0)


def test_criterion_3_envelope_identities_and_constants():
    _report(verify.check_envelope(), budget_s=10.0)


def test_criterion_4_improved_rate_deterministic():
    _report(verify.check_thm54(K=2000), budget_s=30.0)


def test_criterion_5_delta_oracle_rate_stochastic():
    _report(verify.check_thm42(n_seeds=200), budget_s=120.0)


def test_criterion_6_one_step_bias_scaling():
    _report(verify.check_bias(), budget_s=10.0)


def test_criterion_7_gradient_norm_rate():
    _report(verify.check_thm56(), budget_s=60.0)


def test_criterion_8a_nonconvexity_threshold():
    _report(verify.check_counterexample_threshold(), budget_s=5.0)


@pytest.mark.parametrize("which", ["quadratic_cosine", "piecewise_quartic"])
def test_criterion_8b_curvature_fd_agreement(which):
    # piecewise_quartic fails by design of the certified closed form; kept
    # faithful to the stated clause rather than weakened.  See module docstring.
    _report(verify.check_counterexample_fd(which), budget_s=5.0)


def test_criterion_8c_nonsmoothness_growth():
    _report(verify.check_nonsmoothness_growth(), budget_s=5.0)


def test_criterion_9_reduction_identities():
    _report(verify.check_reductions(), budget_s=5.0)

"""envmeta: first-order meta-optimization of sums of Moreau envelopes.

Library layout:

    tasks            task-loss oracles and synthetic suite generators
    envelope         prox points, envelope values/gradients, inner solvers
    algorithms       FO-MAML / FO-MuML / exact-prox SGD / full GD outer loops
    theory           envelope constants, error bounds, convergence rates
    counterexamples  1-D implicit meta-objective curvature analysis
    harness          configs, ground truth, rate fitting, experiments, CLI
"""

from .algorithms import (
    DivergenceError,
    OuterSpec,
    Trajectory,
    run_exact_prox_sgd,
    run_fo_maml,
    run_fo_muml,
    run_full_gd,
)
from .envelope import (
    CertificationError,
    EnvelopeSpec,
    InnerResult,
    InnerSolverSpec,
    envelope_grad,
    envelope_value,
    inner_solve,
    prox_exact_quadratic,
    prox_fixed_point,
    prox_to_delta,
    virtual_iterate,
)
from .tasks import (
    SuiteDescriptor,
    TaskLoss,
    TaskSuite,
    build_suite,
    eval_grad,
    eval_value,
    make_explicit_quadratic_suite,
    make_logistic_suite,
    make_quadratic_suite,
    quadratic_task,
)
from .theory import (
    build_theory_report,
    envelope_constants,
    inner_error_bound,
    mismatched_step_bound,
    rate_thm41,
    rate_thm42,
    rate_thm54,
    rate_thm56,
)

__version__ = "0.1.0"

"""Zeroth-order stochastic convex optimization under stochastic oracle noise.

Two-point gradient estimators with l1/l2 sphere randomization, their
closed-form variance/bias constants, noise thresholds, a projected-SGD
driver, and Monte Carlo checks for all of it.
"""

from .errors import ConfigError, DomainError, EvaluationError
from .estimators import (
    EstimatorConfig,
    batch_grad,
    grad_est_l1,
    grad_est_l2,
    kappa,
    smoothed_value_mc,
    smoothing_bias_bound,
    smoothing_lipschitz_grad,
    variance_bound,
)
from .optimizer import (
    RunConfig,
    Trace,
    gamma_for_target,
    max_noise_level,
    project,
    run,
    step_size,
)
from .oracle import NoiseSpec, Oracle, draw_noise, query, reset_counter
from .problems import ProblemSpec, make_problem, true_gap
from .sampling import RngStream, sample_ball, sample_sphere_l1, sample_sphere_l2
from .sets import FeasibleSet
from .stats import StatSummary, mc_summary
from .verifier import CheckReport, check_sandwich, check_unbiasedness, check_variance_bound

__version__ = "0.1.0"

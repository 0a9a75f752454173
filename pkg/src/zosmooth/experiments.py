"""Noise-threshold sweeps and oracle-complexity measurements."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimators import EstimatorConfig, variance_bound
from .optimizer import (
    HARNESS_C,
    RunConfig,
    gamma_for_target,
    harness_iterations,
    max_noise_level,
    run,
)
from .oracle import NoiseSpec
from .problems import ProblemSpec

SWEEP_COLUMNS = ("run_id", "scheme", "d", "epsilon", "gamma", "delta", "final_gap", "oracle_calls")
DEFAULT_MULTIPLIERS = (0.0, 1.0, 10.0, 100.0)


@dataclass(frozen=True)
class Threshold:
    """γ, Δ_max and the harness iteration budget for one (problem, scheme, ε)."""

    gamma: float
    delta_max: float
    N: int
    sigma2: float


def threshold_setup(problem: ProblemSpec, scheme: str, epsilon: float, batch: int = 1,
                    gamma: float = None, c: float = HARNESS_C) -> Threshold:
    """N is sized for noise exactly at Δ_max and then held fixed across a sweep."""
    const = problem.L if problem.setting == "smooth" else problem.M2
    if gamma is None:
        gamma = gamma_for_target(scheme, problem.setting, epsilon, const, problem.d)
    dmax = max_noise_level(scheme, problem.setting, problem.M2, gamma, problem.d, epsilon)
    sigma2 = variance_bound(scheme, 2, problem.d, problem.M2, dmax, gamma) / batch
    return Threshold(gamma, dmax, harness_iterations(sigma2, problem.R, epsilon, c), sigma2)


def threshold_sweep(problem: ProblemSpec, scheme: str, epsilon: float,
                    multipliers=DEFAULT_MULTIPLIERS, seeds=range(10), batch: int = 1,
                    noise_kind: str = "uniform", N: int = None, gamma: float = None,
                    step_rule: str = "decreasing_R_sigma") -> list[dict]:
    """One row per (multiplier, seed), in that order."""
    th = threshold_setup(problem, scheme, epsilon, batch, gamma)
    N = th.N if N is None else N
    ecfg = EstimatorConfig(scheme, th.gamma, batch)
    rows = []
    for i, mult in enumerate(multipliers):
        delta = float(mult) * th.delta_max
        noise = NoiseSpec(noise_kind if delta > 0 else "none", delta)
        for seed in seeds:
            tr = run(problem, RunConfig(epsilon, N, step_rule, int(seed)), ecfg, noise)
            rows.append({
                "run_id": f"m{i}_s{seed}",
                "scheme": scheme,
                "d": problem.d,
                "epsilon": epsilon,
                "gamma": th.gamma,
                "delta": delta,
                "final_gap": tr.final_gap,
                "oracle_calls": tr.oracle_calls,
            })
    return rows


def median_ci(values) -> tuple[float, float]:
    """Median and its 95% half-width from the normal-theory SE of the median."""
    v = np.asarray(values, dtype=float)
    se = math.sqrt(math.pi / 2.0) * v.std(ddof=1) / math.sqrt(v.size) if v.size > 1 else 0.0
    return float(np.median(v)), 1.96 * se


def calls_to_reach(problem: ProblemSpec, scheme: str, epsilon: float, seed: int, batch: int = 1,
                   noise: NoiseSpec = NoiseSpec()) -> int:
    """Oracle calls until the averaged iterate's gap first drops to <= ε.

    Runs with the harness budget sized for the given noise level; returns
    None if ε is never reached within it.
    """
    const = problem.L if problem.setting == "smooth" else problem.M2
    gamma = gamma_for_target(scheme, problem.setting, epsilon, const, problem.d)
    sigma2 = variance_bound(scheme, 2, problem.d, problem.M2, noise.delta, gamma) / batch
    N = harness_iterations(sigma2, problem.R, epsilon)
    tr = run(problem, RunConfig(epsilon, N, seed=seed), EstimatorConfig(scheme, gamma, batch), noise)
    return tr.first_hit(epsilon)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])

"""Zeroth-order projected SGD with iterate averaging, plus noise thresholds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .estimators import (
    SETTINGS,
    EstimatorConfig,
    SQRT2_1_SQ,
    _check_scheme,
    draw_randomness,
    estimates_from,
    smoothing_lipschitz_grad,
    variance_bound,
)
from .oracle import NoiseSpec
from .problems import ProblemSpec, true_gap
from .sampling import RngStream
from .sets import FeasibleSet, project  # noqa: F401  (re-exported)

STEP_RULES = ("constant_inv_L", "decreasing_R_sigma")
HARNESS_C = 4.0
# iterations per randomness draw; part of the stream layout, so changing it
# changes sample paths for a given seed
BLOCK = 4096


def _check_setting(setting):
    if setting not in SETTINGS:
        raise ConfigError("setting", f"unknown setting {setting!r}; expected one of {SETTINGS}")


def gamma_for_target(scheme: str, setting: str, epsilon: float, M2_or_L: float, d: int) -> float:
    """Smoothing radius that keeps the smoothing bias at ε/2.

    nonsmooth: √d·ε/(2M₂) for L1, ε/(2M₂) for L2.
    smooth: √(dε)/(2L) for L1, √(ε/2)/L for L2.
    """
    _check_scheme(scheme)
    _check_setting(setting)
    if not epsilon > 0:
        raise ConfigError("epsilon", f"must be > 0, got {epsilon!r}")
    if not M2_or_L > 0:
        raise ConfigError("M2", f"Lipschitz constant must be > 0, got {M2_or_L!r}")
    if setting == "nonsmooth":
        g = epsilon / (2.0 * M2_or_L)
        return math.sqrt(d) * g if scheme == "L1" else g
    if scheme == "L1":
        return math.sqrt(d * epsilon) / (2.0 * M2_or_L)
    return math.sqrt(epsilon / 2.0) / M2_or_L


def max_noise_level(scheme: str, setting: str, M2: float, gamma: float, d: int,
                    epsilon: float = None) -> float:
    """Largest Δ whose noise term does not dominate the second-moment bound.

    nonsmooth L1: solves M₂² = d²Δ²/(12(1+√2)²γ²), i.e. √12(1+√2)M₂γ/d.
    nonsmooth L2: solves dM₂² = d²Δ²/(√2γ²), i.e. 2^(1/4)M₂γ/√d.
    smooth: √(ε/d); only the scaling is known, the constant is taken as 1.
    """
    _check_scheme(scheme)
    _check_setting(setting)
    if setting == "smooth":
        if epsilon is None or not epsilon > 0:
            raise ConfigError("epsilon", "smooth threshold needs epsilon > 0")
        return math.sqrt(epsilon / d)
    if gamma < 0:
        raise ConfigError("gamma", f"must be >= 0, got {gamma!r}")
    if scheme == "L1":
        return math.sqrt(12.0 * SQRT2_1_SQ) * M2 * gamma / d
    return 2.0 ** 0.25 * M2 * gamma / math.sqrt(d)


def step_size(rule: str, L_fgamma: float = None, sigma2_bound: float = None, R: float = None,
              N: int = None, k: int = 0) -> float:
    """Step length for iteration ``k``.

    ``constant_inv_L`` returns 1/L_fγ. ``decreasing_R_sigma`` returns
    R/(σ√N) for every k: the constant horizon-tuned step of averaged SGD.
    """
    if rule == "constant_inv_L":
        if L_fgamma is None or not L_fgamma > 0:
            raise ConfigError("L_fgamma", "needs a positive gradient Lipschitz constant")
        return 1.0 / L_fgamma
    if rule == "decreasing_R_sigma":
        if N is None or N < 1:
            raise ConfigError("N", "decreasing_R_sigma needs N >= 1")
        if sigma2_bound is None or not sigma2_bound > 0:
            raise ConfigError("sigma2_bound", "needs a positive second-moment bound")
        if R is None or R < 0:
            raise ConfigError("R", "needs R >= 0")
        return R / (math.sqrt(sigma2_bound) * math.sqrt(N))
    raise ConfigError("step_rule", f"unknown step rule {rule!r}; expected one of {STEP_RULES}")


def harness_iterations(sigma2: float, R: float, epsilon: float, c: float = HARNESS_C) -> int:
    """N = ceil(c·σ²R²/ε²).

    With the R/(σ√N) step, averaged SGD has expected smoothed gap at most
    Rσ/√N = ε/√c; c = 4 leaves the other ε/2 for the smoothing bias.
    """
    if not epsilon > 0:
        raise ConfigError("epsilon", "must be > 0")
    return int(math.ceil(c * sigma2 * R * R / (epsilon * epsilon)))


@dataclass(frozen=True)
class RunConfig:
    epsilon: float
    N: int
    step_rule: str = "decreasing_R_sigma"
    seed: int = 0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError("epsilon", f"must be > 0, got {self.epsilon!r}")
        if int(self.N) != self.N or self.N < 0:
            raise ConfigError("N", f"iteration budget must be a non-negative integer, got {self.N!r}")
        if self.step_rule not in STEP_RULES:
            raise ConfigError("step_rule", f"unknown step rule {self.step_rule!r}")


@dataclass
class Trace:
    """Run record.

    ``gaps[k]`` is the gap of the running average of x_1..x_k (x⁰ at k = 0),
    ``iterate_gaps[k]`` the gap of x_k itself, ``calls[k]`` the cumulative
    oracle calls after k iterations, ``iterates[k]`` is x_k.
    """

    gaps: np.ndarray
    iterate_gaps: np.ndarray
    calls: np.ndarray
    x_avg: np.ndarray
    x_last: np.ndarray
    gamma: float
    delta: float
    step: float
    iterates: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @property
    def final_gap(self) -> float:
        return float(self.gaps[-1])

    @property
    def oracle_calls(self) -> int:
        return int(self.calls[-1])

    def first_hit(self, epsilon: float):
        """Oracle calls when the averaged gap first drops to <= ε, or None."""
        idx = np.flatnonzero(self.gaps <= epsilon)
        return None if idx.size == 0 else int(self.calls[idx[0]])


def resolve_gamma(problem: ProblemSpec, ecfg: EstimatorConfig, epsilon: float) -> float:
    if ecfg.gamma is not None:
        return float(ecfg.gamma)
    const = problem.L if problem.setting == "smooth" else problem.M2
    return gamma_for_target(ecfg.scheme, problem.setting, epsilon, const, problem.d)


def run(problem: ProblemSpec, rcfg: RunConfig, ecfg: EstimatorConfig,
        noise: NoiseSpec = NoiseSpec()) -> Trace:
    """Projected SGD on batched smoothed-gradient estimates, with averaging.

    x_{k+1} = Π_Q(x_k - η·ĝ(x_k)); the returned solution is the average of
    x_1..x_N. γ defaults to ``gamma_for_target`` for the problem's setting.
    The σ² fed to ``decreasing_R_sigma`` is the single-estimate bound at the
    actual noise level divided by the batch size.
    """
    gamma = resolve_gamma(problem, ecfg, rcfg.epsilon)
    cfg = ecfg.with_gamma(gamma)
    d, B, N = problem.d, int(cfg.batch), int(rcfg.N)
    oracle = problem.oracle(noise, gamma=gamma, p=cfg.p)
    rng = RngStream(rcfg.seed)

    if rcfg.step_rule == "constant_inv_L":
        eta = step_size("constant_inv_L", L_fgamma=smoothing_lipschitz_grad(cfg.scheme, problem.M, gamma, d))
    elif N == 0:
        eta = 0.0
    else:
        # Euclidean steps: the l2 (p = q = 2) bound applies
        sigma2 = variance_bound(cfg.scheme, 2, d, problem.M2, noise.delta, gamma) / B
        eta = step_size("decreasing_R_sigma", sigma2_bound=sigma2, R=problem.R, N=N)

    Q = problem.Q
    x = Q.project(problem.x0)
    xs = np.empty((N + 1, d))
    xs[0] = x
    calls = np.empty(N + 1, dtype=np.int64)
    calls[0] = 0
    k = 0
    while k < N:
        m = min(BLOCK, N - k)
        E, xi_p, xi_m, d_p, d_m = draw_randomness(oracle, cfg, d, m * B, rng)
        for j in range(m):
            s = slice(j * B, (j + 1) * B)
            g = estimates_from(oracle, x, cfg.scheme, gamma, E[s],
                               None if xi_p is None else xi_p[s],
                               None if xi_m is None else xi_m[s],
                               d_p[s], d_m[s]).mean(axis=0)
            x = Q.project(x - eta * g)
            k += 1
            xs[k] = x
            calls[k] = oracle.calls
    avgs = xs.copy()
    if N > 0:
        avgs[1:] = np.cumsum(xs[1:], axis=0) / np.arange(1, N + 1)[:, None]
    gaps = problem.mean_value(avgs) - problem.f_star
    it_gaps = problem.mean_value(xs) - problem.f_star
    return Trace(gaps=gaps, iterate_gaps=it_gaps, calls=calls, x_avg=avgs[-1], x_last=x,
                 gamma=gamma, delta=noise.delta, step=eta, iterates=xs,
                 meta={"scheme": cfg.scheme, "batch": B, "N": N, "seed": rcfg.seed})

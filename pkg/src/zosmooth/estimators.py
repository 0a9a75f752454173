"""Randomized-smoothing gradient estimators and their closed-form constants.

Two smoothing schemes are supported:

* ``L1``: e uniform on the unit l1 sphere,
  g = d/(2γ) · (f_δ₁(x + γe, ξ) - f_δ₂(x - γe, ξ)) · sign(e)
* ``L2``: e uniform on the unit l2 sphere,
  g = d/(2γ) · (f_δ₁(x + γe, ξ) - f_δ₂(x - γe, ξ)) · e

Both are unbiased for the gradient of the function smoothed over the
matching unit ball, as long as the noise does not depend on e.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .oracle import Oracle, draw_noise
from .sampling import DIRECTION, NOISE, NORMS, sample_ball, sample_sphere
from .stats import CHUNK, Accumulator, StatSummary

SETTINGS = ("nonsmooth", "smooth")
SQRT2_1_SQ = (1.0 + math.sqrt(2.0)) ** 2


def _check_scheme(scheme):
    if scheme not in NORMS:
        raise ConfigError("scheme", f"unknown scheme {scheme!r}; expected one of {NORMS}")


def _check_p(p):
    if p not in (1, 2):
        raise ConfigError("p", f"unsupported norm exponent {p!r}; expected 1 or 2")


def dual_exponent(p: float) -> float:
    _check_p(p)
    return math.inf if p == 1 else 2.0


@dataclass(frozen=True)
class EstimatorConfig:
    scheme: str = "L2"
    gamma: Optional[float] = None
    batch: int = 1
    p: int = 2
    common_xi: bool = True

    def __post_init__(self):
        _check_scheme(self.scheme)
        _check_p(self.p)
        if self.gamma is not None and not self.gamma > 0:
            raise ConfigError("gamma", f"smoothing parameter must be > 0, got {self.gamma!r}")
        if int(self.batch) != self.batch or self.batch < 1:
            raise ConfigError("batch", f"batch must be a positive integer, got {self.batch!r}")

    @property
    def q(self) -> float:
        return dual_exponent(self.p)

    def with_gamma(self, gamma: float) -> "EstimatorConfig":
        return EstimatorConfig(self.scheme, gamma, self.batch, self.p, self.common_xi)


def _require_gamma(cfg: EstimatorConfig) -> float:
    if cfg.gamma is None or not cfg.gamma > 0:
        raise ConfigError("gamma", "estimator needs a positive smoothing parameter")
    return float(cfg.gamma)


def draw_randomness(oracle: Oracle, cfg: EstimatorConfig, d: int, n: int, rng):
    """Directions, ξ and noise for ``n`` two-point estimates.

    Directions come from the ``DIRECTION`` sub-stream of ``rng``; ξ and δ
    from the oracle's own sub-streams, so honest noise never sees the
    direction bits. Returns ``(E, xi_plus, xi_minus, delta_plus, delta_minus)``.
    """
    E = sample_sphere(cfg.scheme, d, rng.child(DIRECTION), n)
    return (E,) + _draw_rest(oracle, cfg, E, rng)


def _draw_rest(oracle, cfg, E, rng):
    n = E.shape[0]
    xi_p = oracle.sample_xi(rng, n)
    xi_m = xi_p if cfg.common_xi else oracle.sample_xi(rng, n)
    noise_rng = rng.child(NOISE)
    d_p = draw_noise(oracle.noise, noise_rng, n, direction=E)
    d_m = d_p if oracle.noise.shared else draw_noise(oracle.noise, noise_rng, n, direction=-E)
    return xi_p, xi_m, d_p, d_m


def estimates_from(oracle: Oracle, x, scheme: str, gamma: float, E, xi_p, xi_m, d_p, d_m,
                   rng=None) -> np.ndarray:
    """Two-point estimates for pre-drawn randomness; one metered batch of 2n calls."""
    n, d = E.shape
    step = gamma * E
    X = np.concatenate([x + step, x - step])
    xi = None if xi_p is None else np.concatenate([xi_p, xi_m])
    f = oracle.query_batch(X, rng, xi=xi, delta=np.concatenate([d_p, d_m]))
    factor = np.sign(E) if scheme == "L1" else E
    return (d / (2.0 * gamma) * (f[:n] - f[n:]))[:, None] * factor


def sample_estimates(oracle: Oracle, x, cfg: EstimatorConfig, n: int, rng,
                     directions=None) -> np.ndarray:
    """``n`` independent two-point estimates at ``x`` as an ``(n, d)`` array.

    Consumes exactly ``2n`` oracle calls. ``directions`` pins e (shape
    ``(n, d)``); otherwise e is drawn uniformly on the scheme's unit sphere.
    """
    gamma = _require_gamma(cfg)
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    if directions is None:
        E = sample_sphere(cfg.scheme, d, rng.child(DIRECTION), n)
    else:
        E = np.atleast_2d(np.asarray(directions, dtype=float))
        if E.shape != (n, d):
            raise ConfigError("directions", f"expected shape {(n, d)}, got {E.shape}")
    return estimates_from(oracle, x, cfg.scheme, gamma, E, *_draw_rest(oracle, cfg, E, rng), rng=rng)


def _single(oracle, x, cfg, rng, direction, scheme):
    if cfg.scheme != scheme:
        raise ConfigError("scheme", f"expected scheme {scheme}, got {cfg.scheme}")
    dirs = None if direction is None else np.asarray(direction, dtype=float)[None, :]
    return sample_estimates(oracle, x, cfg, 1, rng, dirs)[0]


def grad_est_l1(oracle: Oracle, x, cfg: EstimatorConfig, rng, direction=None) -> np.ndarray:
    """One l1-randomized estimate (2 oracle calls). ``direction`` pins e."""
    return _single(oracle, x, cfg, rng, direction, "L1")


def grad_est_l2(oracle: Oracle, x, cfg: EstimatorConfig, rng, direction=None) -> np.ndarray:
    """One l2-randomized estimate (2 oracle calls). ``direction`` pins e."""
    return _single(oracle, x, cfg, rng, direction, "L2")


def grad_est(oracle: Oracle, x, cfg: EstimatorConfig, rng) -> np.ndarray:
    return sample_estimates(oracle, x, cfg, 1, rng)[0]


def batch_grad(oracle: Oracle, x, cfg: EstimatorConfig, rng) -> np.ndarray:
    """Mean of ``cfg.batch`` independent estimates; 2·batch oracle calls."""
    return sample_estimates(oracle, x, cfg, int(cfg.batch), rng).mean(axis=0)


def estimate_summary(oracle: Oracle, x, cfg: EstimatorConfig, n: int, rng,
                     chunk: int = CHUNK) -> StatSummary:
    """Monte Carlo summary of ``n`` single estimates (second moment in the q-norm)."""
    if n < 2:
        raise ConfigError("n", f"need n >= 2, got {n!r}")
    acc = Accumulator(cfg.q)
    done = 0
    while done < n:
        k = min(chunk, n - done)
        acc.add(sample_estimates(oracle, x, cfg, k, rng))
        done += k
    return acc.summary()


def smoothed_value_mc(objective: Callable, x, gamma: float, scheme: str, n: int, rng,
                      chunk: int = CHUNK, baseline: bool = False) -> StatSummary:
    """Monte Carlo estimate of E[f(x + γẽ)], ẽ uniform on the unit ball.

    ``objective(X)`` is the noiseless mean objective, evaluated row-wise.
    With ``baseline=True`` the samples are f(x + γẽ) - f(x), i.e. the
    summary describes the smoothing gap directly.
    """
    _check_scheme(scheme)
    if n < 2:
        raise ConfigError("n", f"need n >= 2, got {n!r}")
    if gamma < 0:
        raise ConfigError("gamma", f"smoothing parameter must be >= 0, got {gamma!r}")
    x = np.asarray(x, dtype=float)
    d = x.shape[0]
    f0 = float(np.asarray(objective(x[None, :])).reshape(-1)[0]) if baseline else 0.0
    gen = rng.child(DIRECTION)
    acc = Accumulator()
    done = 0
    while done < n:
        k = min(chunk, n - done)
        if gamma == 0:
            pts = np.broadcast_to(x, (k, d))
        else:
            pts = x + gamma * sample_ball(scheme, d, gen, k)
        acc.add(np.asarray(objective(pts), dtype=float).reshape(k) - f0)
        done += k
    return acc.summary()


def kappa(scheme: str, p: int, d: int) -> float:
    """Dimension constant of the second-moment bound.

    L1: 48(1+√2)² d^(2-2/p).  L2: √2 · min{q, ln d} · d^(1-2/p).
    """
    _check_scheme(scheme)
    _check_p(p)
    if d < 1:
        raise ConfigError("d", "dimension must be >= 1")
    if scheme == "L1":
        return 48.0 * SQRT2_1_SQ * d ** (2.0 - 2.0 / p)
    q = dual_exponent(p)
    return math.sqrt(2.0) * min(q, math.log(d)) * d ** (1.0 - 2.0 / p)


def variance_bound(scheme: str, p: int, d: int, M2: float, Delta: float, gamma: float) -> float:
    """Upper bound on E‖g‖_q² for a single estimate under noise level Delta."""
    if M2 < 0:
        raise ConfigError("M2", "Lipschitz constant must be >= 0")
    if Delta < 0:
        raise ConfigError("delta", "noise level must be >= 0")
    k = kappa(scheme, p, d)
    if Delta == 0:
        noise = 0.0
    else:
        if not gamma > 0:
            raise ConfigError("gamma", "bound diverges for gamma <= 0 with noise")
        noise = d * d * Delta * Delta / gamma ** 2
    if scheme == "L1":
        return k * (M2 * M2 + noise / (12.0 * SQRT2_1_SQ))
    return k * (d * M2 * M2 + noise / math.sqrt(2.0))


def smoothing_bias_bound(scheme: str, setting: str, M2_or_L: float, gamma: float, d: int) -> float:
    """Upper bound on f_γ(x) - f(x).

    nonsmooth: 2γM₂/√d (L1), γM₂ (L2); smooth: (2/d)γ²L² (L1), γ²L² (L2).
    """
    _check_scheme(scheme)
    if setting not in SETTINGS:
        raise ConfigError("setting", f"unknown setting {setting!r}")
    if gamma < 0:
        raise ConfigError("gamma", "smoothing parameter must be >= 0")
    c = M2_or_L
    if setting == "nonsmooth":
        return 2.0 * gamma * c / math.sqrt(d) if scheme == "L1" else gamma * c
    return 2.0 / d * gamma ** 2 * c ** 2 if scheme == "L1" else gamma ** 2 * c ** 2


def smoothing_lipschitz_grad(scheme: str, M: float, gamma: float, d: int) -> float:
    """Lipschitz constant of ∇f_γ: dM/γ (L1) or √d·M/γ (L2)."""
    _check_scheme(scheme)
    if not gamma > 0:
        raise ConfigError("gamma", "smoothing parameter must be > 0")
    return d * M / gamma if scheme == "L1" else math.sqrt(d) * M / gamma

"""Noisy zeroth-order oracle: returns f(x, ξ) + δ and meters every call."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DomainError, EvaluationError
from .sampling import NOISE, XI, as_generator

NOISE_KINDS = ("none", "uniform", "gaussian", "rademacher", "constant_bias")
# Violates independence from the direction; used only as a negative control.
BROKEN_KINDS = ("e_correlated",)


@dataclass(frozen=True)
class NoiseSpec:
    """Noise law for the oracle outputs.

    Every honest kind satisfies E[δ²] <= delta²:

    * ``uniform``: U[-√3Δ, √3Δ], so E[δ²] = Δ²
    * ``gaussian``: N(0, Δ²)
    * ``rademacher``: ±Δ
    * ``constant_bias``: δ = Δ on every call (nonzero mean)

    ``shared=True`` reuses a single draw for both points of a two-point
    estimate (δ₁ = δ₂); the default draws them independently.

    ``e_correlated`` sets δ = Δ·sign(v₁) where v is the signed offset of the
    query from the base point. It depends on the direction and exists to
    show that the unbiasedness check can fail.
    """

    kind: str = "none"
    delta: float = 0.0
    shared: bool = False

    def __post_init__(self):
        if self.kind not in NOISE_KINDS + BROKEN_KINDS:
            raise ConfigError("noise", f"unknown noise kind {self.kind!r}")
        if not (self.delta >= 0) or not math.isfinite(self.delta):
            raise ConfigError("delta", f"noise level must be finite and >= 0, got {self.delta!r}")

    @property
    def independent_of_direction(self) -> bool:
        return self.kind not in BROKEN_KINDS


def draw_noise(spec: NoiseSpec, rng, size=None, direction=None):
    """Draw δ according to ``spec``; a float when ``size`` is None."""
    if spec.delta < 0:
        raise ConfigError("delta", "noise level must be >= 0")
    n = 1 if size is None else int(size)
    delta = spec.delta
    if spec.kind == "none" or delta == 0.0:
        out = np.zeros(n)
    elif spec.kind == "uniform":
        h = math.sqrt(3.0) * delta
        out = as_generator(rng).uniform(-h, h, n)
    elif spec.kind == "gaussian":
        out = delta * as_generator(rng).standard_normal(n)
    elif spec.kind == "rademacher":
        out = delta * (2.0 * as_generator(rng).integers(0, 2, n) - 1.0)
    elif spec.kind == "constant_bias":
        out = np.full(n, delta)
    elif spec.kind == "e_correlated":
        if direction is None:
            raise ConfigError("noise", "e_correlated noise needs the query direction")
        direction = np.atleast_2d(direction)
        out = delta * np.sign(direction[:, 0])
    else:  # pragma: no cover - guarded by NoiseSpec
        raise ConfigError("noise", f"unknown noise kind {spec.kind!r}")
    return float(out[0]) if size is None else out


class Oracle:
    """Gradient-free oracle f_δ(x, ξ) = f(x, ξ) + δ.

    Parameters
    ----------
    fn : callable
        ``fn(X, xi) -> values`` evaluated row-wise on an ``(n, d)`` array.
        ``xi`` is whatever ``xi_sampler`` returns for ``n`` draws, or None for
        a deterministic objective.
    noise : NoiseSpec
    xi_sampler : callable, optional
        ``xi_sampler(generator, n)``; draws n independent ξ.
    domain : callable, optional
        ``domain(X) -> bool array``; a False row raises DomainError.
    """

    def __init__(
        self,
        fn: Callable,
        noise: NoiseSpec = NoiseSpec(),
        xi_sampler: Optional[Callable] = None,
        domain: Optional[Callable] = None,
    ):
        self.fn = fn
        self.noise = noise
        self.xi_sampler = xi_sampler
        self.domain = domain
        self._calls = 0
        self._lock = threading.Lock()

    @property
    def calls(self) -> int:
        return self._calls

    def reset_counter(self):
        with self._lock:
            self._calls = 0

    def sample_xi(self, rng, n):
        if self.xi_sampler is None:
            return None
        return self.xi_sampler(as_generator(rng.child(XI)), n)

    def query_batch(self, X, rng, xi=None, delta=None, direction=None) -> np.ndarray:
        """Evaluate n points at once; counts as n oracle calls.

        ``xi`` and ``delta`` may be supplied to share randomness across calls;
        otherwise fresh draws come from ``rng``'s ξ and noise sub-streams.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n = X.shape[0]
        if self.domain is not None:
            ok = np.asarray(self.domain(X))
            if not ok.all():
                raise DomainError(X[np.argmin(ok)])
        if xi is None:
            xi = self.sample_xi(rng, n)
        values = np.asarray(self.fn(X, xi), dtype=float).reshape(n)
        bad = ~np.isfinite(values)
        if bad.any():
            i = int(np.argmax(bad))
            raise EvaluationError(X[i], values[i])
        if delta is None:
            delta = draw_noise(self.noise, rng.child(NOISE), n, direction=direction)
        with self._lock:
            self._calls += n
        return values + delta

    def query(self, x, rng) -> float:
        """One call: f(x, ξ) + δ with fresh ξ and δ."""
        return float(self.query_batch(np.asarray(x, dtype=float)[None, :], rng)[0])


def query(oracle: Oracle, x, rng) -> float:
    return oracle.query(x, rng)


def reset_counter(oracle: Oracle) -> None:
    oracle.reset_counter()

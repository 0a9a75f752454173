"""Monte Carlo summaries with 95% confidence half-widths."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import ConfigError

Z95 = 1.96
CHUNK = 1 << 16


def qnorm(v: np.ndarray, q: float) -> np.ndarray:
    """Row-wise q-norm of a (n, d) array; q = inf is the max-norm."""
    v = np.atleast_2d(v)
    if q == 2:
        return np.sqrt(np.einsum("ij,ij->i", v, v))
    return np.linalg.norm(v, ord=q, axis=1)


@dataclass
class StatSummary:
    """Sample summary.

    ``mean``, ``std`` and ``ci_halfwidth`` are per-coordinate for vector
    samples. ``second_moment`` is the mean squared q-norm (plain E[x²] for
    scalars) and ``second_moment_ci`` its own half-width, computed from the
    sample variance of the squared norms.
    """

    n: int
    mean: Union[float, np.ndarray]
    std: Union[float, np.ndarray]
    second_moment: float
    second_moment_ci: float

    @property
    def stderr(self):
        return self.std / np.sqrt(self.n)

    @property
    def ci_halfwidth(self):
        return Z95 * self.stderr

    @property
    def variance(self):
        return self.std ** 2


class Accumulator:
    """Streaming mean/variance via pairwise (Chan) merges of chunk moments."""

    def __init__(self, q: float = 2):
        self.q = q
        self.n = 0
        self.mean = None
        self.m2 = None
        self.sq_n = 0
        self.sq_mean = 0.0
        self.sq_m2 = 0.0
        self.vector = None

    @staticmethod
    def _merge(n_a, mean_a, m2_a, n_b, mean_b, m2_b):
        n = n_a + n_b
        delta = mean_b - mean_a
        mean = mean_a + delta * (n_b / n)
        m2 = m2_a + m2_b + delta ** 2 * (n_a * n_b / n)
        return n, mean, m2

    def add(self, samples):
        x = np.asarray(samples, dtype=float)
        if self.vector is None:
            self.vector = x.ndim == 2
        if self.vector:
            x = np.atleast_2d(x)
            sq = qnorm(x, self.q) ** 2
        else:
            x = x.reshape(-1)
            sq = x ** 2
        k = x.shape[0]
        if k == 0:
            return
        cm = x.mean(axis=0)
        cm2 = ((x - cm) ** 2).sum(axis=0)
        sm = sq.mean()
        sm2 = float(((sq - sm) ** 2).sum())
        if self.n == 0:
            self.n, self.mean, self.m2 = k, cm, cm2
            self.sq_n, self.sq_mean, self.sq_m2 = k, sm, sm2
        else:
            self.n, self.mean, self.m2 = self._merge(self.n, self.mean, self.m2, k, cm, cm2)
            self.sq_n, self.sq_mean, self.sq_m2 = self._merge(
                self.sq_n, self.sq_mean, self.sq_m2, k, sm, sm2
            )

    def summary(self) -> StatSummary:
        if self.n < 2:
            raise ConfigError("n", "need at least two samples")
        std = np.sqrt(self.m2 / (self.n - 1))
        sq_std = np.sqrt(self.sq_m2 / (self.sq_n - 1))
        mean = self.mean if self.vector else float(self.mean)
        std = std if self.vector else float(std)
        return StatSummary(
            n=self.n,
            mean=mean,
            std=std,
            second_moment=float(self.sq_mean),
            second_moment_ci=float(Z95 * sq_std / np.sqrt(self.sq_n)),
        )


def mc_summary(sampler: Union[Callable, np.ndarray], n: int = None, rng=None, q: float = 2,
               chunk: int = CHUNK) -> StatSummary:
    """Summarize ``n`` draws of ``sampler(rng, k)`` (or a precomputed sample array).

    The sampler is called with chunk sizes of at most ``chunk`` rows, in a
    fixed order, so the result is deterministic for a fixed ``rng``.
    """
    acc = Accumulator(q)
    if callable(sampler):
        if n is None or n < 2:
            raise ConfigError("n", f"need n >= 2, got {n!r}")
        done = 0
        while done < n:
            k = min(chunk, n - done)
            acc.add(sampler(rng, k))
            done += k
    else:
        arr = np.asarray(sampler, dtype=float)
        if arr.shape[0] < 2:
            raise ConfigError("n", "need at least two samples")
        acc.add(arr)
    return acc.summary()

"""Stochastic convex test objectives with known constants and minimizers.

Every kind is f(x, ξ) = h(x) + <ξ, x> (or a shifted quadratic) with ξ
uniform on [-b, b]^d / √d, so ‖ξ‖₂ <= b and E[ξ] = 0. The mean objective
h is therefore available in closed form and the optimality gap is exact.

Kinds
-----
nonsmooth_norm
    f(x, ξ) = ‖x - x*‖₂ + <ξ, x>;  M₂ = 1 + b, f* = 0.
smooth_quadratic
    f(x, ξ) = ½‖x - x* - ξ‖₂²;  L = 1, M₂ = diam(Q) + b, f* = E‖ξ‖²/2 = b²/6.
piecewise_max
    f(x, ξ) = max_i <a_i, x - x*> + <ξ, x>; rows of ``a`` must contain the
    origin in their convex hull so that x* minimizes; M₂ = max‖a_i‖₂ + b.
linear
    f(x, ξ) = <c + ξ, x> on the ball; x* = center - r·c/‖c‖, M₂ = ‖c‖ + b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from .errors import ConfigError
from .oracle import NoiseSpec, Oracle
from .sets import FeasibleSet

PROBLEM_KINDS = ("nonsmooth_norm", "smooth_quadratic", "piecewise_max", "linear")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    kind: str
    d: int
    x_star: np.ndarray
    f_star: float
    M2: float
    M: float
    Q: FeasibleSet
    x0: np.ndarray
    b: float = 0.5
    L: Optional[float] = None
    params: dict = field(default_factory=dict)

    @property
    def R(self) -> float:
        """‖x⁰ - x*‖₂."""
        return float(np.linalg.norm(self.x0 - self.x_star))

    @property
    def setting(self) -> str:
        return "smooth" if self.L is not None else "nonsmooth"

    def sample_xi(self, gen: np.random.Generator, n: int) -> np.ndarray:
        if self.b == 0:
            return np.zeros((n, self.d))
        return gen.uniform(-self.b, self.b, (n, self.d)) / math.sqrt(self.d)

    def _h(self, X):
        if self.kind == "nonsmooth_norm":
            D = X - self.x_star
            return np.sqrt(np.einsum("ij,ij->i", D, D))
        if self.kind == "piecewise_max":
            return ((X - self.x_star) @ self.params["a"].T).max(axis=1)
        if self.kind == "linear":
            return X @ self.params["c"]
        raise AssertionError(self.kind)

    def value(self, X, xi) -> np.ndarray:
        """f(x, ξ) row-wise; ``xi`` of None means ξ = 0."""
        X = np.atleast_2d(X)
        if self.kind == "smooth_quadratic":
            r = X - self.x_star if xi is None else X - self.x_star - xi
            return 0.5 * np.einsum("ij,ij->i", r, r)
        out = self._h(X)
        if xi is not None:
            out = out + np.einsum("ij,ij->i", X, xi)
        return out

    def mean_value(self, X) -> np.ndarray:
        """f(x) = E_ξ f(x, ξ), row-wise."""
        X = np.atleast_2d(X)
        if self.kind == "smooth_quadratic":
            r = X - self.x_star
            return 0.5 * np.einsum("ij,ij->i", r, r) + self.b ** 2 / 6.0
        return self._h(X)

    def lipschitz_of(self, xi) -> np.ndarray:
        """M(ξ) in the l2 norm, valid on Q inflated by up to the radius of Q."""
        xi = np.atleast_2d(xi)
        nxi = np.linalg.norm(xi, axis=1)
        if self.kind == "nonsmooth_norm":
            return 1.0 + nxi
        if self.kind == "piecewise_max":
            return np.linalg.norm(self.params["a"], axis=1).max() + nxi
        if self.kind == "linear":
            return np.linalg.norm(self.params["c"]) + nxi
        return self.Q.diameter + nxi

    def smoothed_gradient(self, x, gamma: float, scheme: str) -> Optional[np.ndarray]:
        """Closed-form ∇f_γ(x) where one exists (quadratic, linear); else None."""
        x = np.asarray(x, dtype=float)
        if self.kind == "smooth_quadratic":
            return x - self.x_star
        if self.kind == "linear":
            return self.params["c"].copy()
        return None

    def domain(self, gamma: float, p: float = 2):
        """Membership test for the inflated set Q_γ."""
        return lambda X: self.Q.contains(X, inflate=gamma, p=p)

    def oracle(self, noise: NoiseSpec = NoiseSpec(), gamma: Optional[float] = None,
               p: float = 2) -> Oracle:
        dom = None if gamma is None else self.domain(gamma, p)
        return Oracle(self.value, noise, xi_sampler=self.sample_xi, domain=dom)


def _zero_in_hull(a: np.ndarray) -> bool:
    m = a.shape[0]
    res = linprog(
        np.zeros(m),
        A_eq=np.vstack([a.T, np.ones((1, m))]),
        b_eq=np.concatenate([np.zeros(a.shape[1]), [1.0]]),
        bounds=[(0, None)] * m,
        method="highs",
    )
    return res.status == 0


def make_problem(kind: str, d: int, b: float = 0.5, radius: float = 2.0, x_star=None,
                 x0=None, start_distance: float = 1.0, a=None, c=None) -> ProblemSpec:
    """Build a test problem.

    Q is the l2 ball of ``radius`` around x* (around the origin for
    ``linear``). The default start is x* + start_distance·(1,…,1)/√d.
    """
    if kind not in PROBLEM_KINDS:
        raise ConfigError("problem", f"unknown problem kind {kind!r}")
    if int(d) != d or d < 1:
        raise ConfigError("d", f"dimension must be a positive integer, got {d!r}")
    d = int(d)
    if b < 0:
        raise ConfigError("b", "noise half-width must be >= 0")
    if not radius > 0:
        raise ConfigError("radius", "radius must be > 0")
    params = {}
    L = None
    if kind == "linear":
        c = np.ones(d) / math.sqrt(d) if c is None else np.asarray(c, dtype=float)
        nc = float(np.linalg.norm(c))
        if c.shape != (d,) or nc == 0:
            raise ConfigError("c", "linear coefficient must be a nonzero d-vector")
        params["c"] = c
        center = np.zeros(d) if x_star is None else np.asarray(x_star, dtype=float)
        Q = FeasibleSet.ball(center, radius)
        xs = center - radius * c / nc
        f_star = float(xs @ c)
        M2 = nc + b
        start = center if x0 is None else np.asarray(x0, dtype=float)
    else:
        xs = np.zeros(d) if x_star is None else np.asarray(x_star, dtype=float)
        if xs.shape != (d,):
            raise ConfigError("x_star", f"expected length {d}")
        Q = FeasibleSet.ball(xs, radius)
        if kind == "nonsmooth_norm":
            M2, f_star = 1.0 + b, 0.0
        elif kind == "smooth_quadratic":
            M2, f_star, L = Q.diameter + b, b * b / 6.0, 1.0
        else:
            a = np.vstack([np.eye(d), -np.eye(d)]) if a is None else np.asarray(a, dtype=float)
            if a.ndim != 2 or a.shape[1] != d:
                raise ConfigError("a", f"expected an (m, {d}) array")
            if not _zero_in_hull(a):
                raise ConfigError("a", "origin must lie in the convex hull of the rows")
            params["a"] = a
            M2, f_star = float(np.linalg.norm(a, axis=1).max()) + b, 0.0
        start = xs + start_distance * np.ones(d) / math.sqrt(d) if x0 is None else np.asarray(x0, dtype=float)
    if start.shape != (d,):
        raise ConfigError("x0", f"expected length {d}")
    if not Q.contains(start[None, :])[0]:
        raise ConfigError("x0", "start point must lie in Q")
    return ProblemSpec(kind=kind, d=d, x_star=xs, f_star=f_star, M2=M2, M=M2, Q=Q, x0=start,
                       b=b, L=L, params=params)


def true_gap(problem: ProblemSpec, x) -> float:
    """f(x) - f* from the closed-form mean objective."""
    x = np.asarray(x, dtype=float)
    return float(problem.mean_value(x[None, :])[0] - problem.f_star)

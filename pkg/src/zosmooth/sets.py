"""Convex compact feasible sets with Euclidean projection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError

SET_KINDS = ("l2_ball", "box")


@dataclass(frozen=True, eq=False)
class FeasibleSet:
    """Either an l2 ball (``center``, ``radius``) or a box (``lower``, ``upper``)."""

    kind: str
    center: Optional[np.ndarray] = None
    radius: float = 1.0
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "l2_ball":
            if self.center is None or not self.radius > 0:
                raise ConfigError("Q", "l2 ball needs a center and a positive radius")
            object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        elif self.kind == "box":
            if self.lower is None or self.upper is None:
                raise ConfigError("Q", "box needs lower and upper bounds")
            lo = np.asarray(self.lower, dtype=float)
            hi = np.asarray(self.upper, dtype=float)
            if lo.shape != hi.shape or np.any(lo > hi):
                raise ConfigError("Q", "box bounds must have equal shape and lower <= upper")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        else:
            raise ConfigError("Q", f"unknown set kind {self.kind!r}")

    @classmethod
    def ball(cls, center, radius):
        return cls("l2_ball", center=center, radius=radius)

    @classmethod
    def box(cls, lower, upper):
        return cls("box", lower=lower, upper=upper)

    @property
    def dim(self) -> int:
        return (self.center if self.kind == "l2_ball" else self.lower).shape[0]

    @property
    def diameter(self) -> float:
        if self.kind == "l2_ball":
            return 2.0 * self.radius
        return float(np.linalg.norm(self.upper - self.lower))

    def project(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "box":
            return np.clip(x, self.lower, self.upper)
        off = x - self.center
        r = math.sqrt(off @ off)
        if r <= self.radius:
            return x.copy()
        return self.center + off * (self.radius / r)

    def excess(self, X, p: float = 2) -> np.ndarray:
        """Row-wise distance from X to the set, measured in the p-norm.

        Exact for boxes. For balls the l2 distance is returned for any p; it
        lower-bounds the l1 distance, so ``contains(X, γ, 1)`` is a relaxation.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.kind == "box":
            v = np.maximum(np.maximum(self.lower - X, X - self.upper), 0.0)
            return np.linalg.norm(v, ord=p, axis=1)
        D = X - self.center
        r = np.sqrt(np.einsum("ij,ij->i", D, D))
        return np.maximum(r - self.radius, 0.0)

    def contains(self, X, inflate: float = 0.0, p: float = 2, tol: float = 1e-12) -> np.ndarray:
        """Membership in Q + B_p(inflate), row-wise."""
        return self.excess(X, p) <= inflate + tol


def project(Q: FeasibleSet, x) -> np.ndarray:
    return Q.project(x)

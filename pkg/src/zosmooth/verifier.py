"""Monte Carlo pass/fail checks for the estimator and smoothing bounds.

Every check draws from ``RngStream(seed, stream_id)`` with ``stream_id``
derived from the check name, so a report row is enough to regenerate its
statistic. Slack is four standard errors throughout.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError
from .estimators import (
    EstimatorConfig,
    estimate_summary,
    smoothed_value_mc,
    smoothing_bias_bound,
    variance_bound,
)
from .optimizer import max_noise_level
from .oracle import NoiseSpec
from .problems import ProblemSpec, make_problem
from .sampling import DIRECTION, RngStream, sample_ball
from .stats import Accumulator, StatSummary, mc_summary  # noqa: F401  (re-exported)

SLACK = 4.0


@dataclass
class CheckReport:
    """``passed`` is the raw statistical verdict; ``ok`` folds in the role."""

    name: str
    passed: bool
    observed: float
    bound: float
    ci_halfwidth: float
    n: int
    seed: int
    stream_id: int = 0
    role: str = "positive"
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.passed if self.role == "positive" else not self.passed


def stream_for(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def _rng(name, seed):
    sid = stream_for(name)
    return RngStream(seed, sid), sid


def check_unbiasedness(problem: ProblemSpec, scheme: str, x, gamma: float, noise: NoiseSpec,
                       n: int, seed: int = 0, name: str = None, role: str = "positive") -> CheckReport:
    """Passes iff every coordinate of the mean estimate is within 4 SE of ∇f_γ(x).

    ``observed`` is the largest |z| over coordinates and ``bound`` is 4.
    """
    target = problem.smoothed_gradient(x, gamma, scheme)
    if target is None:
        raise ConfigError("problem", f"no closed-form smoothed gradient for {problem.kind!r}")
    name = name or f"unbiased/{scheme}/{noise.kind}"
    rng, sid = _rng(name, seed)
    oracle = problem.oracle(noise, gamma=gamma)
    s = estimate_summary(oracle, x, EstimatorConfig(scheme, gamma), n, rng)
    se = np.asarray(s.stderr)
    z = np.abs(s.mean - target) / np.where(se > 0, se, np.inf)
    exact = np.all(np.where(se > 0, True, s.mean == target))
    zmax = float(np.max(z))
    return CheckReport(name, bool(zmax <= SLACK and exact), zmax, SLACK,
                       float(np.max(s.ci_halfwidth)), n, seed, sid, role,
                       {"mean": s.mean, "target": target, "stderr": se, "calls": oracle.calls})


def check_variance_bound(problem: ProblemSpec, scheme: str, p: int, x, gamma: float,
                         noise: NoiseSpec, n: int, seed: int = 0, bound_delta: float = None,
                         name: str = None, role: str = "positive") -> CheckReport:
    """Passes iff mean ‖g‖_q² <= variance_bound + 4 SE.

    ``bound_delta`` evaluates the bound at a different noise level than the
    one injected (used by the negative control).
    """
    name = name or f"variance/{scheme}/p{p}/d{problem.d}/delta{noise.delta:.6g}"
    rng, sid = _rng(name, seed)
    oracle = problem.oracle(noise, gamma=gamma, p=p)
    s = estimate_summary(oracle, x, EstimatorConfig(scheme, gamma, p=p), n, rng)
    dl = noise.delta if bound_delta is None else bound_delta
    bound = variance_bound(scheme, p, problem.d, problem.M2, dl, gamma)
    se = s.second_moment_ci / 1.96
    return CheckReport(name, bool(s.second_moment <= bound + SLACK * se), s.second_moment, bound,
                       s.second_moment_ci, n, seed, sid, role, {"bound_delta": dl})


def check_sandwich(problem: ProblemSpec, scheme: str, setting: str, x, gamma: float, n: int,
                   seed: int = 0, name: str = None, role: str = "positive") -> CheckReport:
    """Passes iff the Monte Carlo smoothing gap lies in [-ci, bias_bound + ci]."""
    name = name or f"sandwich/{scheme}/{setting}/d{problem.d}"
    rng, sid = _rng(name, seed)
    const = problem.L if setting == "smooth" else problem.M2
    if const is None:
        raise ConfigError("setting", "smooth sandwich needs a problem with a gradient Lipschitz constant")
    bound = smoothing_bias_bound(scheme, setting, const, gamma, problem.d)
    s = smoothed_value_mc(problem.mean_value, x, gamma, scheme, n, rng, baseline=True)
    ci = float(s.ci_halfwidth)
    ok = -ci <= s.mean <= bound + ci
    return CheckReport(name, bool(ok), float(s.mean), bound, ci, n, seed, sid, role)


def check_smoothed_lipschitz(problem: ProblemSpec, scheme: str, x, y, gamma: float, n: int,
                             p: int = 2, seed: int = 0, name: str = None,
                             role: str = "positive") -> CheckReport:
    """Passes iff |f_γ(y) - f_γ(x)| <= M‖y - x‖_p + ci (common ball draws)."""
    name = name or f"lipschitz/{scheme}/d{problem.d}"
    rng, sid = _rng(name, seed)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gen = rng.child(DIRECTION)

    def diffs(_, k):
        u = gamma * sample_ball(scheme, problem.d, gen, k)
        return problem.mean_value(y + u) - problem.mean_value(x + u)

    s = mc_summary(diffs, n, rng)
    bound = problem.M * float(np.linalg.norm(y - x, ord=p))
    ci = float(s.ci_halfwidth)
    return CheckReport(name, bool(abs(s.mean) <= bound + ci), abs(float(s.mean)), bound, ci,
                       n, seed, sid, role)


# -- suites ---------------------------------------------------------------

DEFAULT_N = {"unbiasedness": 1_000_000, "variance": 100_000, "sandwich": 100_000, "lipschitz": 100_000,
             "negative": 100_000}
UNBIASED_KINDS = ("none", "uniform", "gaussian", "constant_bias")


@dataclass
class Check:
    name: str
    role: str
    run: Callable[[int], CheckReport]


def _unbiased_point(d):
    # fixed point inside the radius-2 ball around the origin
    base = np.array([0.5, -0.5, 0.25, 0.0, 0.75, -0.25, 0.1, -0.6])
    return np.resize(base, d)


def build_suite(n: Optional[dict] = None, b: float = 0.5) -> list[Check]:
    """The full verification suite: positive checks and negative controls."""
    n = {**DEFAULT_N, **(n or {})}
    checks: list[Check] = []

    quad = make_problem("smooth_quadratic", 8, b=b)
    xq = _unbiased_point(8)
    gq = 0.1
    for scheme in ("L1", "L2"):
        dmax = max_noise_level(scheme, "nonsmooth", quad.M2, gq, quad.d)
        for kind in UNBIASED_KINDS:
            nm = f"unbiased/{scheme}/{kind}"
            noise = NoiseSpec(kind, 0.0 if kind == "none" else dmax)
            checks.append(Check(nm, "positive", lambda seed, nm=nm, scheme=scheme, noise=noise:
                                check_unbiasedness(quad, scheme, xq, gq, noise, n["unbiasedness"], seed, nm)))
        nm = f"neg/unbiased/{scheme}/e_correlated"
        noise = NoiseSpec("e_correlated", dmax)
        checks.append(Check(nm, "negative", lambda seed, nm=nm, scheme=scheme, noise=noise:
                            check_unbiasedness(quad, scheme, xq, gq, noise, n["negative"], seed, nm,
                                               role="negative")))

    gv = 0.1
    for scheme in ("L1", "L2"):
        for d in (2, 8, 32):
            prob = make_problem("nonsmooth_norm", d, b=b)
            dmax = max_noise_level(scheme, "nonsmooth", prob.M2, gv, d)
            for label, dl in (("0", 0.0), ("max", dmax)):
                nm = f"variance/{scheme}/d{d}/delta_{label}"
                noise = NoiseSpec("uniform", dl)
                checks.append(Check(nm, "positive", lambda seed, nm=nm, scheme=scheme, prob=prob, noise=noise:
                                    check_variance_bound(prob, scheme, 2, prob.x0, gv, noise,
                                                         n["variance"], seed, name=nm)))
        prob = make_problem("nonsmooth_norm", 4, b=b)
        dl = 10.0 * max_noise_level(scheme, "nonsmooth", prob.M2, gv, 4)
        nm = f"neg/variance/{scheme}/understated_delta"
        checks.append(Check(nm, "negative", lambda seed, nm=nm, scheme=scheme, prob=prob, dl=dl:
                            check_variance_bound(prob, scheme, 2, prob.x0, gv, NoiseSpec("uniform", dl),
                                                 n["negative"], seed, bound_delta=dl / 100.0, name=nm,
                                                 role="negative")))

    gs = 0.1
    for d in (2, 16):
        norm = make_problem("nonsmooth_norm", d, b=b)
        quad_d = make_problem("smooth_quadratic", d, b=b)
        for scheme in ("L1", "L2"):
            for where, x in (("x0", norm.x0), ("xstar", norm.x_star)):
                nm = f"sandwich/{scheme}/nonsmooth/d{d}/{where}"
                checks.append(Check(nm, "positive", lambda seed, nm=nm, scheme=scheme, prob=norm, x=x:
                                    check_sandwich(prob, scheme, "nonsmooth", x, gs, n["sandwich"], seed, nm)))
            nm = f"sandwich/{scheme}/smooth/d{d}"
            checks.append(Check(nm, "positive", lambda seed, nm=nm, scheme=scheme, prob=quad_d:
                                check_sandwich(prob, scheme, "smooth", prob.x0, 2 * gs, n["sandwich"],
                                               seed, nm)))

    lip = make_problem("nonsmooth_norm", 4, b=b)
    for scheme in ("L1", "L2"):
        nm = f"lipschitz/{scheme}/d4"
        y = lip.x_star + np.array([0.3, -0.1, 0.0, 0.2])
        checks.append(Check(nm, "positive", lambda seed, nm=nm, scheme=scheme, y=y:
                            check_smoothed_lipschitz(lip, scheme, lip.x0, y, 0.1, n["lipschitz"],
                                                     seed=seed, name=nm)))
    return checks


def select(checks: list[Check], names=None, suite: str = "full") -> list[Check]:
    """Filter a suite by explicit ``names`` or by ``suite`` ("full", "negative")."""
    if names is not None:
        known = {c.name: c for c in checks}
        missing = [nm for nm in names if nm not in known]
        if missing:
            raise ConfigError("checks", f"unknown check names {missing}")
        return [known[nm] for nm in names]
    if suite == "full":
        return list(checks)
    if suite == "negative":
        # negative controls asserted as ordinary checks: every one should fail
        return [Check(c.name, "positive", c.run) for c in checks if c.role == "negative"]
    raise ConfigError("suite", f"unknown suite {suite!r}")


def run_suite(checks: list[Check], seed: int = 0) -> list[CheckReport]:
    reports = []
    for c in checks:
        r = c.run(seed)
        r.role = c.role
        reports.append(r)
    return reports

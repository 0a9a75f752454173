import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from conftest import within_se
from zosmooth.errors import ConfigError
from zosmooth.estimators import (
    EstimatorConfig,
    batch_grad,
    estimate_summary,
    grad_est_l1,
    grad_est_l2,
    kappa,
    sample_estimates,
    smoothed_value_mc,
    smoothing_bias_bound,
    smoothing_lipschitz_grad,
    variance_bound,
)
from zosmooth.oracle import NoiseSpec, Oracle
from zosmooth.sampling import DIRECTION, RngStream


def linear(c):
    c = np.asarray(c, dtype=float)
    return Oracle(lambda X, xi: X @ c)


def half_sq(noise=NoiseSpec()):
    return Oracle(lambda X, xi: 0.5 * np.einsum("ij,ij->i", X, X), noise)


def constant(noise=NoiseSpec()):
    return Oracle(lambda X, xi: np.full(X.shape[0], 7.0), noise)


# -- hand-evaluated single estimates ---------------------------------------

def test_l1_estimate_by_hand(rng):
    o = linear([1.0, 2.0])
    g = grad_est_l1(o, np.zeros(2), EstimatorConfig("L1", 0.3), rng, direction=[0.5, -0.5])
    # d<c,e> sign(e) = 2 * (-0.5) * (1, -1)
    np.testing.assert_allclose(g, [-1.0, 1.0], rtol=1e-12)
    assert o.calls == 2


def test_l2_estimate_by_hand(rng):
    o = linear([1.0, 0.0])
    g = grad_est_l2(o, np.array([0.2, -0.4]), EstimatorConfig("L2", 0.5), rng, direction=[1.0, 0.0])
    np.testing.assert_allclose(g, [2.0, 0.0], rtol=1e-12)
    assert o.calls == 2


def test_sign_of_zero_is_zero(rng):
    o = linear([1.0, 2.0, 3.0])
    g = grad_est_l1(o, np.zeros(3), EstimatorConfig("L1", 0.1), rng, direction=[1.0, 0.0, 0.0])
    assert g[1] == 0.0 and g[2] == 0.0


@pytest.mark.parametrize("scheme,fn", [("L1", grad_est_l1), ("L2", grad_est_l2)])
def test_constant_objective_gives_zero(scheme, fn, rng):
    o = constant()
    for _ in range(20):
        np.testing.assert_array_equal(fn(o, np.ones(5), EstimatorConfig(scheme, 0.2), rng), 0.0)
    assert o.calls == 40
    cfg = EstimatorConfig(scheme, 0.2, batch=7)
    np.testing.assert_array_equal(batch_grad(o, np.ones(5), cfg, rng), 0.0)
    assert o.calls == 54


def test_scheme_mismatch_rejected(rng):
    with pytest.raises(ConfigError):
        grad_est_l1(linear([1.0]), np.zeros(1), EstimatorConfig("L2", 0.1), rng)


@pytest.mark.parametrize("gamma", [0.0, -1.0])
def test_nonpositive_gamma_rejected(gamma):
    with pytest.raises(ConfigError):
        EstimatorConfig("L1", gamma)


def test_missing_gamma_rejected(rng):
    with pytest.raises(ConfigError):
        grad_est_l2(linear([1.0]), np.zeros(1), EstimatorConfig("L2"), rng)


def test_config_validation():
    with pytest.raises(ConfigError):
        EstimatorConfig("L3", 0.1)
    with pytest.raises(ConfigError):
        EstimatorConfig("L1", 0.1, batch=0)
    with pytest.raises(ConfigError):
        EstimatorConfig("L1", 0.1, p=3)
    assert EstimatorConfig("L1", 0.1, p=1).q == math.inf
    assert EstimatorConfig("L1", 0.1, p=2).q == 2


# -- batching --------------------------------------------------------------

def test_batch_of_one_matches_single_draw():
    o = half_sq()
    x = np.array([1.0, -2.0, 0.5])
    a = grad_est_l2(o, x, EstimatorConfig("L2", 0.1), RngStream(9))
    b = batch_grad(o, x, EstimatorConfig("L2", 0.1, batch=1), RngStream(9))
    np.testing.assert_array_equal(a, b)


@given(B=st.integers(1, 40), scheme=st.sampled_from(["L1", "L2"]))
@settings(max_examples=25, deadline=None)
def test_batch_consumes_exactly_2B_calls(B, scheme):
    o = half_sq(NoiseSpec("gaussian", 0.1))
    batch_grad(o, np.ones(3), EstimatorConfig(scheme, 0.1, batch=B), RngStream(0))
    assert o.calls == 2 * B


@pytest.mark.parametrize("scheme", ["L1", "L2"])
def test_batch_mean_variance_shrinks_by_batch_size(scheme):
    # i.i.d. averaging: Var(mean of 16) = Var(single) / 16
    x = np.array([1.0, -2.0, 0.0, 3.0])
    reps = 10_000
    rng = RngStream(77)
    o = half_sq()
    singles = np.array([batch_grad(o, x, EstimatorConfig(scheme, 0.1, batch=1), rng) for _ in range(reps)])
    batched = np.array([batch_grad(o, x, EstimatorConfig(scheme, 0.1, batch=16), rng) for _ in range(reps)])
    ratio = batched.var(axis=0, ddof=1).sum() / singles.var(axis=0, ddof=1).sum()
    assert 1 / (16 * 1.5) <= ratio <= 1.5 / 16


# -- unbiasedness ----------------------------------------------------------

X_HAT = np.array([1.0, -2.0, 0.0, 3.0])


@pytest.mark.parametrize("noise", [NoiseSpec(), NoiseSpec("constant_bias", 0.5)])
@pytest.mark.parametrize("scheme", ["L1", "L2"])
def test_quadratic_mean_estimate_is_gradient(scheme, noise):
    # symmetric smoothing of ½‖x‖² leaves the gradient at x̂ unchanged
    o = half_sq(noise)
    s = estimate_summary(o, X_HAT, EstimatorConfig(scheme, 0.1), 1_000_000, RngStream(1))
    assert o.calls == 2_000_000
    assert np.all(np.abs(s.mean - X_HAT) <= 4 * s.stderr)


def test_constant_bias_does_not_move_the_mean():
    cfg = EstimatorConfig("L1", 0.1)
    clean = estimate_summary(half_sq(), X_HAT, cfg, 1_000_000, RngStream(2))
    biased = estimate_summary(half_sq(NoiseSpec("constant_bias", 0.5)), X_HAT, cfg, 1_000_000, RngStream(3))
    assert np.all(np.abs(clean.mean - biased.mean) <= clean.ci_halfwidth + biased.ci_halfwidth)


def test_constant_bias_with_same_stream_is_exactly_noise_free():
    # δ₁ = δ₂ = Δ cancels in the difference; directions are untouched by noise
    cfg = EstimatorConfig("L2", 0.1)
    a = sample_estimates(half_sq(), X_HAT, cfg, 1000, RngStream(4))
    b = sample_estimates(half_sq(NoiseSpec("constant_bias", 0.5)), X_HAT, cfg, 1000, RngStream(4))
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-9)


def test_l2_linear_mean_is_c():
    c = np.array([1.0, -0.5, 2.0, 0.0, 0.3, -1.2, 0.7, 0.1])
    s = estimate_summary(linear(c), np.zeros(8), EstimatorConfig("L2", 0.1), 1_000_000, RngStream(5))
    assert np.all(np.abs(s.mean - c) <= 4 * s.stderr)


def test_both_schemes_agree_on_linear_objective():
    c = np.array([0.5, -1.0, 2.0])
    s1 = estimate_summary(linear(c), np.zeros(3), EstimatorConfig("L1", 0.2), 200_000, RngStream(6))
    s2 = estimate_summary(linear(c), np.zeros(3), EstimatorConfig("L2", 0.2), 200_000, RngStream(7))
    assert np.all(np.abs(s1.mean - s2.mean) <= s1.ci_halfwidth + s2.ci_halfwidth)
    assert np.all(np.abs(s1.mean - c) <= 4 * s1.stderr)


def test_directions_do_not_depend_on_noise():
    seen = {}
    for spec in (NoiseSpec(), NoiseSpec("uniform", 3.0), NoiseSpec("gaussian", 1.0, shared=True)):
        r = RngStream(11)
        sample_estimates(half_sq(spec), X_HAT, EstimatorConfig("L1", 0.1), 50, r)
        seen[spec.kind] = r.child(DIRECTION).generator.random(3)
    vals = list(seen.values())
    np.testing.assert_array_equal(vals[0], vals[1])
    np.testing.assert_array_equal(vals[0], vals[2])


def test_shared_noise_cancels(rng):
    o = half_sq(NoiseSpec("gaussian", 5.0, shared=True))
    clean = half_sq()
    a = sample_estimates(o, X_HAT, EstimatorConfig("L2", 0.1), 100, RngStream(8))
    b = sample_estimates(clean, X_HAT, EstimatorConfig("L2", 0.1), 100, RngStream(8))
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_independent_xi_option():
    # ξ shifts a linear objective: f(x, ξ) = <c + ξ, x>
    c = np.array([1.0, 2.0])
    o = Oracle(lambda X, xi: np.einsum("ij,ij->i", X, c + xi), xi_sampler=lambda g, n: g.standard_normal((n, 2)))
    common = sample_estimates(o, np.array([0.3, 0.3]), EstimatorConfig("L2", 0.1), 20_000, RngStream(1))
    indep = sample_estimates(o, np.array([0.3, 0.3]), EstimatorConfig("L2", 0.1, common_xi=False),
                             20_000, RngStream(1))
    # independent ξ leaves <ξ₁ - ξ₂, x> in the difference; its second moment
    # adds d²/(4γ²)·2‖x‖² = 36 to E‖g‖²
    extra = (indep ** 2).sum(axis=1).mean() - (common ** 2).sum(axis=1).mean()
    assert abs(extra - 36.0) < 3.0
    assert within_se(common, c)


# -- smoothed value --------------------------------------------------------

def test_smoothed_linear_value_equals_value():
    c = np.array([1.0, -2.0, 0.5])
    s = smoothed_value_mc(lambda X: X @ c, np.ones(3), 0.5, "L1", 100_000, RngStream(1), baseline=True)
    assert abs(s.mean) <= s.ci_halfwidth


def test_gamma_zero_is_exact():
    f = lambda X: np.linalg.norm(X, axis=1)  # noqa: E731
    s = smoothed_value_mc(f, np.array([3.0, 4.0]), 0.0, "L2", 10, RngStream(1))
    assert s.mean == 5.0 and s.std == 0.0


def test_smoothed_quadratic_gap_matches_radial_moment():
    d, gamma = 3, 0.2
    # oracle: E‖ẽ‖² over the uniform ball = ∫₀¹ r² · d r^(d-1) dr
    radial, _ = quad(lambda r: r * r * d * r ** (d - 1), 0, 1)
    expected = gamma ** 2 / 2 * radial
    assert abs(expected - 0.012) < 1e-12
    f = lambda X: 0.5 * np.einsum("ij,ij->i", X, X)  # noqa: E731
    s = smoothed_value_mc(f, np.array([0.5, -1.0, 0.2]), gamma, "L2", 200_000, RngStream(3), baseline=True)
    assert abs(s.mean - expected) <= s.ci_halfwidth * 4 / 1.96


def test_smoothed_value_needs_two_samples():
    with pytest.raises(ConfigError):
        smoothed_value_mc(lambda X: X[:, 0], np.zeros(1), 0.1, "L1", 1, RngStream(0))


# -- closed forms ----------------------------------------------------------

C1 = 48 * (1 + math.sqrt(2)) ** 2


def test_kappa_values():
    assert kappa("L1", 2, 16) == pytest.approx(C1 * 16, rel=1e-12)
    assert kappa("L1", 2, 16) == pytest.approx(4476.23, abs=0.01)
    for d in (1, 5, 100):
        assert kappa("L1", 1, d) == pytest.approx(C1, rel=1e-12)
    assert C1 == pytest.approx(279.76, abs=0.01)
    assert kappa("L2", 2, 3) == pytest.approx(math.sqrt(2) * math.log(3), rel=1e-12)
    assert kappa("L2", 2, 3) == pytest.approx(1.5537, abs=1e-4)
    assert kappa("L2", 2, 100) == pytest.approx(2 * math.sqrt(2), rel=1e-12)
    # p = 1: min{inf, ln d} = ln d, times d^-1
    assert kappa("L2", 1, 10) == pytest.approx(math.sqrt(2) * math.log(10) / 10, rel=1e-12)
    with pytest.raises(ConfigError):
        kappa("L1", 3, 4)


def test_variance_bound_values():
    assert variance_bound("L1", 2, 4, 1.0, 0.0, 0.1) == pytest.approx(C1 * 4, rel=1e-12)
    assert variance_bound("L1", 2, 4, 1.0, 0.0, 0.1) == pytest.approx(1119.06, abs=0.01)
    assert variance_bound("L2", 2, 10, 1.0, 0.0, 0.1) == pytest.approx(20 * math.sqrt(2), rel=1e-12)
    assert variance_bound("L2", 2, 10, 1.0, 0.0, 0.1) == pytest.approx(28.284, abs=1e-3)
    # noise terms spelled out
    d, M2, D, g = 6, 1.3, 0.2, 0.05
    assert variance_bound("L1", 2, d, M2, D, g) == pytest.approx(
        C1 * d * (M2 ** 2 + d * d * D * D / (12 * (1 + math.sqrt(2)) ** 2 * g * g)), rel=1e-12)
    assert variance_bound("L2", 2, d, M2, D, g) == pytest.approx(
        math.sqrt(2) * math.log(d) * (d * M2 ** 2 + d * d * D * D / (math.sqrt(2) * g * g)), rel=1e-12)


@given(gamma=st.floats(1e-3, 10), scheme=st.sampled_from(["L1", "L2"]), d=st.integers(2, 64))
def test_noise_free_bound_ignores_gamma(gamma, scheme, d):
    assert variance_bound(scheme, 2, d, 1.7, 0.0, gamma) == variance_bound(scheme, 2, d, 1.7, 0.0, 1.0)


@given(D1=st.floats(0, 5), D2=st.floats(0, 5), scheme=st.sampled_from(["L1", "L2"]))
def test_bound_increases_with_noise(D1, D2, scheme):
    lo, hi = sorted((D1, D2))
    assert variance_bound(scheme, 2, 8, 1.0, lo, 0.1) <= variance_bound(scheme, 2, 8, 1.0, hi, 0.1)


def test_variance_bound_needs_gamma_with_noise():
    with pytest.raises(ConfigError):
        variance_bound("L2", 2, 4, 1.0, 0.1, 0.0)


def test_smoothing_bias_bound_values():
    assert smoothing_bias_bound("L1", "nonsmooth", 1.0, 0.1, 4) == pytest.approx(0.1, rel=1e-12)
    assert smoothing_bias_bound("L2", "nonsmooth", 1.0, 0.1, 4) == pytest.approx(0.1, rel=1e-12)
    assert smoothing_bias_bound("L2", "smooth", 2.0, 0.1, 4) == pytest.approx(0.04, rel=1e-12)
    assert smoothing_bias_bound("L1", "smooth", 2.0, 0.1, 4) == pytest.approx(0.02, rel=1e-12)
    assert smoothing_bias_bound("L1", "nonsmooth", 1.0, 0.0, 4) == 0.0


def test_lipschitz_grad_values():
    assert smoothing_lipschitz_grad("L1", 1.0, 0.1, 4) == pytest.approx(40.0, rel=1e-12)
    assert smoothing_lipschitz_grad("L2", 1.0, 0.1, 4) == pytest.approx(20.0, rel=1e-12)
    assert smoothing_lipschitz_grad("L1", 0.0, 0.1, 4) == 0.0
    assert smoothing_lipschitz_grad("L2", 0.0, 0.1, 4) == 0.0
    with pytest.raises(ConfigError):
        smoothing_lipschitz_grad("L2", 1.0, 0.0, 4)

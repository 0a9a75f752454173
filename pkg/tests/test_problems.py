import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zosmooth.errors import ConfigError, DomainError
from zosmooth.oracle import NoiseSpec
from zosmooth.problems import PROBLEM_KINDS, make_problem, true_gap
from zosmooth.sampling import RngStream, sample_ball


def points_in(problem, n, gen, inflate=0.0):
    r = problem.Q.radius + inflate
    return problem.Q.center + r * sample_ball("L2", problem.d, gen, n)


@pytest.mark.parametrize("kind", PROBLEM_KINDS)
@pytest.mark.parametrize("d", [1, 3, 12])
def test_lipschitz_in_xi_on_inflated_set(kind, d):
    p = make_problem(kind, d)
    gen = np.random.default_rng(0)
    X = points_in(p, 2000, gen, inflate=0.5)
    Y = points_in(p, 2000, gen, inflate=0.5)
    xi = p.sample_xi(gen, 2000)
    lhs = np.abs(p.value(X, xi) - p.value(Y, xi))
    rhs = p.lipschitz_of(xi) * np.linalg.norm(X - Y, axis=1)
    assert np.all(lhs <= rhs + 1e-12)


@pytest.mark.parametrize("kind", PROBLEM_KINDS)
def test_second_moment_of_lipschitz_constant(kind):
    p = make_problem(kind, 6)
    xi = p.sample_xi(np.random.default_rng(1), 100_000)
    assert np.mean(p.lipschitz_of(xi) ** 2) <= p.M2 ** 2
    assert p.M == p.M2


@pytest.mark.parametrize("kind", PROBLEM_KINDS)
def test_convex_along_segments(kind):
    p = make_problem(kind, 5)
    gen = np.random.default_rng(2)
    X, Y = points_in(p, 500, gen), points_in(p, 500, gen)
    xi = p.sample_xi(gen, 500)
    for t in (0.1, 0.5, 0.9):
        mid = p.value(t * X + (1 - t) * Y, xi)
        assert np.all(mid <= t * p.value(X, xi) + (1 - t) * p.value(Y, xi) + 1e-12)


@pytest.mark.parametrize("kind", PROBLEM_KINDS)
def test_mean_value_matches_sample_average(kind):
    p = make_problem(kind, 4)
    x = p.x0
    xi = p.sample_xi(np.random.default_rng(3), 400_000)
    vals = p.value(np.broadcast_to(x, xi.shape), xi)
    se = vals.std() / math.sqrt(vals.size)
    assert abs(vals.mean() - p.mean_value(x)[0]) <= 4 * se + 1e-12


@pytest.mark.parametrize("kind", PROBLEM_KINDS)
def test_x_star_is_minimal_on_Q(kind):
    p = make_problem(kind, 4)
    X = points_in(p, 20_000, np.random.default_rng(4))
    assert true_gap(p, p.x_star) == pytest.approx(0.0, abs=1e-12)
    assert np.all(p.mean_value(X) - p.f_star >= -1e-12)


def test_true_gap_examples():
    norm = make_problem("nonsmooth_norm", 4)
    assert true_gap(norm, [0.6, 0.0, 0.8, 0.0]) == pytest.approx(1.0)
    quad = make_problem("smooth_quadratic", 2, b=0.5)
    assert quad.f_star == pytest.approx(0.25 / 6)
    assert true_gap(quad, [1.0, 1.0]) == pytest.approx(1.0)
    lin = make_problem("linear", 2, c=[3.0, 4.0], radius=1.0)
    np.testing.assert_allclose(lin.x_star, [-0.6, -0.8])
    assert lin.f_star == pytest.approx(-5.0)
    assert true_gap(lin, [0.0, 0.0]) == pytest.approx(5.0)
    pm = make_problem("piecewise_max", 3)
    assert true_gap(pm, [0.2, -0.7, 0.1]) == pytest.approx(0.7)


def test_default_start_distance():
    for kind in ("nonsmooth_norm", "smooth_quadratic", "piecewise_max"):
        p = make_problem(kind, 9, start_distance=1.5)
        assert p.R == pytest.approx(1.5)
    assert make_problem("linear", 3, radius=2.0).R == pytest.approx(2.0)


def test_smoothed_gradients():
    q = make_problem("smooth_quadratic", 3, x_star=[1.0, 0.0, -1.0])
    np.testing.assert_allclose(q.smoothed_gradient([2.0, 2.0, 2.0], 0.1, "L1"), [1.0, 2.0, 3.0])
    lin = make_problem("linear", 2, c=[1.0, -1.0])
    np.testing.assert_allclose(lin.smoothed_gradient([0.3, 0.2], 0.5, "L2"), [1.0, -1.0])
    assert make_problem("nonsmooth_norm", 2).smoothed_gradient([0.0, 0.0], 0.1, "L2") is None


def test_settings():
    assert make_problem("smooth_quadratic", 2).setting == "smooth"
    assert make_problem("nonsmooth_norm", 2).setting == "nonsmooth"


def test_piecewise_max_requires_origin_in_hull():
    with pytest.raises(ConfigError) as e:
        make_problem("piecewise_max", 2, a=[[1.0, 0.0], [0.0, 1.0]])
    assert e.value.key == "a"
    ok = make_problem("piecewise_max", 2, a=[[1.0, 0.0], [-1.0, 1.0], [0.0, -1.0]])
    assert ok.M2 == pytest.approx(math.sqrt(2) + 0.5)


@pytest.mark.parametrize("kwargs,key", [
    ({"kind": "bogus", "d": 2}, "problem"),
    ({"kind": "linear", "d": 0}, "d"),
    ({"kind": "linear", "d": 2.5}, "d"),
    ({"kind": "linear", "d": 2, "b": -1}, "b"),
    ({"kind": "linear", "d": 2, "radius": 0}, "radius"),
    ({"kind": "linear", "d": 2, "c": [0.0, 0.0]}, "c"),
    ({"kind": "nonsmooth_norm", "d": 2, "x0": [5.0, 0.0]}, "x0"),
    ({"kind": "nonsmooth_norm", "d": 2, "x_star": [0.0]}, "x_star"),
])
def test_invalid_problems(kwargs, key):
    with pytest.raises(ConfigError) as e:
        make_problem(**kwargs)
    assert e.value.key == key


def test_oracle_enforces_inflated_domain():
    p = make_problem("nonsmooth_norm", 2, radius=1.0)
    o = p.oracle(NoiseSpec(), gamma=0.1)
    o.query(np.array([1.05, 0.0]), RngStream(0))
    with pytest.raises(DomainError):
        o.query(np.array([1.2, 0.0]), RngStream(0))
    # no γ, no domain check
    p.oracle().query(np.array([50.0, 0.0]), RngStream(0))


@given(st.integers(1, 20), st.floats(0.0, 2.0))
@settings(max_examples=30, deadline=None)
def test_xi_norm_bounded_and_centered(d, b):
    p = make_problem("nonsmooth_norm", d, b=b)
    xi = p.sample_xi(np.random.default_rng(d), 2000)
    assert np.all(np.linalg.norm(xi, axis=1) <= b + 1e-12)

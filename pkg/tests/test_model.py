"""Throughput curve, utility, and the marginal-balance gradient."""

import math

import numpy as np
import pytest

from rachsim.model import (
    RachConfig,
    throughput,
    utility,
    utility_gradient,
    utility_of_load,
)
from rachsim.optimizer import optimal_subframes_closed_form, stationary_alpha_limit


def test_throughput_zero_load():
    assert throughput(0, 2, 64) == 0.0


def test_throughput_peak_value_and_location():
    # sweep oracle: the integer argmax of the curve sits at N = n_s * n_p
    values = {n: throughput(n, 2, 64) for n in range(0, 513)}
    best = max(values, key=values.get)
    assert best == 128
    assert values[128] == pytest.approx(128 / math.e, rel=1e-12)


def test_throughput_direct_evaluation():
    assert throughput(300, 2, 64) == pytest.approx(300 * math.exp(-2.34375), rel=1e-12)
    assert throughput(300, 2, 64) == pytest.approx(28.79, abs=0.01)


def test_throughput_bounded_by_peak():
    for n_s, n_p in [(1, 64), (2, 64), (8, 64), (3, 10)]:
        cap = n_s * n_p / math.e
        for n in range(0, 4 * n_s * n_p, 7):
            assert throughput(n, n_s, n_p) <= cap + 1e-9


def test_throughput_monotone_up_then_down():
    pairs = 128
    vals = [throughput(n, 2, 64) for n in range(0, 3 * pairs)]
    for n in range(1, pairs):
        assert vals[n] > vals[n - 1]
    for n in range(pairs + 1, 3 * pairs - 1):
        assert vals[n + 1] < vals[n]


def test_throughput_domain_errors():
    with pytest.raises(ValueError):
        throughput(10, 0, 64)
    with pytest.raises(ValueError):
        throughput(10, 2, 0)
    with pytest.raises(ValueError):
        throughput(-1, 2, 64)


def test_utility_arithmetic():
    assert utility(47.0874, 0.0, 8) == 47.0874
    assert utility(28.79, 25.0, 2) == pytest.approx(-21.21)
    assert utility(0.0, 25.0, 2) == -50.0


def test_utility_of_load_values():
    cfg = RachConfig(alpha=2.0)
    assert utility_of_load(70, 6, cfg) == pytest.approx(70 * math.exp(-70 / 384) - 12, rel=1e-12)
    assert utility_of_load(70, 6, cfg) == pytest.approx(46.335, abs=1e-3)
    assert utility_of_load(70, 2, cfg) == pytest.approx(36.513, abs=1e-3)
    assert utility_of_load(0, 2, RachConfig(alpha=25.0)) == -50.0


def test_utility_of_load_consistency_with_throughput():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = float(rng.uniform(0, 2000))
        n_s = int(rng.integers(1, 11))
        alpha = float(rng.uniform(0, 100))
        cfg = RachConfig(n_s_min=1, n_s_max=10, alpha=alpha)
        u = utility_of_load(n, n_s, cfg)
        t = throughput(n, n_s, 64)
        assert abs((u + alpha * n_s) - t) <= 1e-12 * max(1.0, abs(t))


def test_gradient_trivial_and_direct():
    cfg = RachConfig(alpha=25.0)
    assert utility_gradient(0, 3.0, cfg) == 25.0
    cfg0 = RachConfig(alpha=0.0)
    assert utility_gradient(128, 2.0, cfg0) == pytest.approx(-64 / math.e, rel=1e-12)


def test_gradient_is_negated_finite_difference():
    # utility_gradient returns alpha - collision_term, the negative of
    # d(utility)/d(n_s); central differences of utility_of_load confirm
    # the magnitude and the flipped sign.
    rng = np.random.default_rng(11)
    h = 1e-5
    checked = 0
    for _ in range(100):
        n = float(rng.uniform(1, 2000))
        n_s = float(rng.uniform(1, 10))
        alpha = float(rng.uniform(0, 100))
        cfg = RachConfig(n_s_min=1, n_s_max=10, alpha=alpha)

        def u_at(s):
            return n * math.exp(-n / (s * 64)) - alpha * s

        fd = (u_at(n_s + h) - u_at(n_s - h)) / (2 * h)
        g = utility_gradient(n, n_s, cfg)
        assert g == pytest.approx(-fd, rel=1e-6, abs=1e-6)
        checked += 1
    assert checked == 100


def test_gradient_zero_at_stationary_point():
    cfg = RachConfig(alpha=2.0)
    n_s_opt = optimal_subframes_closed_form(70, cfg)
    assert abs(utility_gradient(70, n_s_opt, cfg)) < 1e-8


def test_gradient_collision_term_bound():
    # the collision term never exceeds n_p * 4 * exp(-2), so above that
    # alpha the returned balance stays positive at every load
    limit = stationary_alpha_limit(64)
    assert limit == pytest.approx(64 * 4 * math.exp(-2), rel=1e-12)
    cfg = RachConfig(alpha=0.0)
    worst = max(
        -utility_gradient(n, n_s, cfg)
        for n in range(1, 3000, 13)
        for n_s in [1.0, 2.0, 3.5, 8.0, 10.0]
    )
    assert worst <= limit + 1e-9
    cfg_hi = RachConfig(alpha=35.0)
    assert all(
        utility_gradient(n, n_s, cfg_hi) > 0
        for n in range(0, 3000, 13)
        for n_s in [1.0, 2.0, 3.5, 8.0, 10.0]
    )


def test_gradient_domain_error():
    with pytest.raises(ValueError):
        utility_gradient(10, 0.0, RachConfig())
    with pytest.raises(ValueError):
        utility_gradient(10, -1.0, RachConfig())


def test_config_validation():
    with pytest.raises(ValueError):
        RachConfig(n_s_min=0)
    with pytest.raises(ValueError):
        RachConfig(n_s_min=5, n_s_max=3)
    with pytest.raises(ValueError):
        RachConfig(n_s_max=11)
    with pytest.raises(ValueError):
        RachConfig(n_preambles=0)
    with pytest.raises(ValueError):
        RachConfig(alpha=-0.1)
    assert list(RachConfig().subframe_range) == [2, 3, 4, 5, 6, 7, 8]

import numpy as np
import pytest

from bellsim import angles


def test_normalize_is_idempotent():
    x = np.array([-1.0, 0.0, 3.5, 7.0, 12.0])
    once = angles.normalize_angle(x)
    assert np.all((once >= 0.0) & (once < 2.0 * np.pi))
    assert np.array_equal(angles.normalize_angle(once), once)


def test_fold_distance_basic():
    assert angles.fold_distance(0.1, np.pi) == pytest.approx(0.1)
    assert angles.fold_distance(np.pi - 0.1, np.pi) == pytest.approx(0.1)
    assert angles.fold_distance(np.pi / 4, np.pi / 2) == pytest.approx(np.pi / 4)
    assert angles.fold_distance(-0.2, np.pi) == pytest.approx(0.2)


def test_signed_delta_range():
    rng = np.random.default_rng(5)
    x = rng.uniform(0, 2 * np.pi, 1000)
    y = rng.uniform(0, 2 * np.pi, 1000)
    d = angles.signed_delta(x, y)
    assert np.all(d > -np.pi) and np.all(d <= np.pi)
    # adding the delta back recovers x on the circle
    assert np.allclose(angles.normalize_angle(y + d), angles.normalize_angle(x))


def test_circular_stddev_matches_wrapped_normal_sigma():
    rng = np.random.default_rng(11)
    sigma = np.pi / 16.80
    draws = angles.sample_wrapped_normal(rng, 1.3, sigma, 1_000_000)
    assert angles.circular_stddev(draws) == pytest.approx(sigma, rel=0.01)


def test_sample_wrapped_normal_zero_sigma():
    rng = np.random.default_rng(0)
    draws = angles.sample_wrapped_normal(rng, 0.4, 0.0, 100)
    assert np.all(draws == 0.4)


def test_circular_mean_wraps():
    vals = np.array([2 * np.pi - 0.1, 0.1])
    assert angles.circular_mean(vals) == pytest.approx(0.0, abs=1e-12)

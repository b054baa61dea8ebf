"""Circle arithmetic and wrapped-normal helpers.

Polarization angles live on [0, 2*pi) but the channel geometry is
pi-periodic, so most reductions here take an explicit period.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi
HALF_PI = 0.5 * np.pi
QUARTER_PI = 0.25 * np.pi


def normalize_angle(x):
    """Map an angle (scalar or array) onto [0, 2*pi). Idempotent."""
    return np.mod(x, TWO_PI)


def fold_distance(x, period):
    """Distance from ``x`` to the nearest integer multiple of ``period``."""
    m = np.mod(x, period)
    return np.minimum(m, period - m)


def signed_delta(x, y, period=TWO_PI):
    """Signed difference ``x - y`` folded into (-period/2, period/2]."""
    d = np.mod(x - y, period)
    return np.where(d > 0.5 * period, d - period, d)


def sample_wrapped_normal(rng, mu, sigma, size=None):
    """Draw from N(mu, sigma) and wrap onto [0, 2*pi).

    ``sigma = 0`` is allowed and still consumes the same number of draws
    from ``rng``, so switching sigma does not shift the rest of a stream.
    """
    return normalize_angle(rng.normal(mu, sigma, size))


def circular_mean(angles):
    """Direction of the mean resultant vector, in [0, 2*pi)."""
    angles = np.asarray(angles, dtype=float)
    return float(normalize_angle(np.arctan2(np.sin(angles).mean(), np.cos(angles).mean())))


def circular_stddev(angles):
    """Circular standard deviation sqrt(-2 ln R).

    For a wrapped normal this equals the wrapping sigma exactly, which is
    what makes it the right estimator for checking calibration draws.
    """
    angles = np.asarray(angles, dtype=float)
    r = np.hypot(np.sin(angles).mean(), np.cos(angles).mean())
    if r <= 0.0:
        return float("inf")
    return float(np.sqrt(-2.0 * np.log(r)))

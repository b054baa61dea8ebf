"""Hidden-variable polarization model.

Each photon carries a polarization angle lambda. A polarizing beamsplitter
oriented along phi sorts photons by the relative angle lambda - phi:
near 0 (mod pi) exits the +1 channel, near pi/2 (mod pi) exits the -1
channel, and photons within ``shaky_width/2`` of an odd multiple of pi/4
are not detected at all. That last band is what makes the sampling
setting-dependent; an optional per-photon loss that ignores both lambda
and phi provides the setting-independent control.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .angles import HALF_PI, QUARTER_PI, normalize_angle, sample_wrapped_normal

# Channel tags. Integer codes so classification stays vectorizable.
PLUS = 1
MINUS = -1
UNDETECTED = 0

# Calibration used throughout unless a caller overrides it.
DEFAULT_SHAKY_WIDTH = np.pi / 13.39
DEFAULT_MISALIGNMENT_SIGMA = np.pi / 16.80
DEFAULT_COLLAPSE_SIGMA = np.pi / 9.0

ENTANGLED_UNIFORM = "entangled_uniform"
CONTROLLED = "controlled"


def _check_sigma(name, value):
    if value < 0.0:
        raise ValueError(f"{name} must be >= 0, got {value}")


@dataclass(frozen=True)
class AnalyzerSpec:
    """One polarizing beamsplitter: orientation plus the full width of each
    undetected band around the odd multiples of pi/4."""

    phi: float
    shaky_width: float = DEFAULT_SHAKY_WIDTH

    def __post_init__(self):
        if not 0.0 <= self.shaky_width < QUARTER_PI:
            # Wider bands would merge the four regions pairwise.
            raise ValueError(
                f"shaky_width must lie in [0, pi/4), got {self.shaky_width}"
            )
        object.__setattr__(self, "phi", float(normalize_angle(self.phi)))


@dataclass(frozen=True)
class SourceSpec:
    """Pair source.

    ``entangled_uniform`` draws a common polarization uniformly on [0, 2*pi)
    and offsets the second photon by N(0, misalignment_sigma).
    ``controlled`` is the collapsed output of the active test's control
    stage: both photons drawn independently around ``control_theta`` with
    spread ``collapse_sigma``.
    """

    kind: str
    misalignment_sigma: float = 0.0
    control_theta: float = 0.0
    collapse_sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in (ENTANGLED_UNIFORM, CONTROLLED):
            raise ValueError(f"unknown source kind {self.kind!r}")
        _check_sigma("misalignment_sigma", self.misalignment_sigma)
        _check_sigma("collapse_sigma", self.collapse_sigma)
        object.__setattr__(self, "control_theta", float(normalize_angle(self.control_theta)))

    @classmethod
    def entangled_uniform(cls, misalignment_sigma=DEFAULT_MISALIGNMENT_SIGMA):
        return cls(kind=ENTANGLED_UNIFORM, misalignment_sigma=misalignment_sigma)

    @classmethod
    def controlled(cls, theta, collapse_sigma=DEFAULT_COLLAPSE_SIGMA):
        return cls(kind=CONTROLLED, control_theta=theta, collapse_sigma=collapse_sigma)


@dataclass(frozen=True)
class ModelParams:
    """Full model calibration for one run.

    ``fair_loss_prob = 0`` is the pure setting-dependent model;
    ``shaky_width = 0`` with ``fair_loss_prob > 0`` is the pure
    setting-independent control.
    """

    shaky_width: float = DEFAULT_SHAKY_WIDTH
    fair_loss_prob: float = 0.0
    misalignment_sigma: float = DEFAULT_MISALIGNMENT_SIGMA
    collapse_sigma: float = DEFAULT_COLLAPSE_SIGMA

    def __post_init__(self):
        if not 0.0 <= self.shaky_width < QUARTER_PI:
            raise ValueError(
                f"shaky_width must lie in [0, pi/4), got {self.shaky_width}"
            )
        if not 0.0 <= self.fair_loss_prob <= 1.0:
            raise ValueError(
                f"fair_loss_prob must lie in [0, 1], got {self.fair_loss_prob}"
            )
        _check_sigma("misalignment_sigma", self.misalignment_sigma)
        _check_sigma("collapse_sigma", self.collapse_sigma)

    def analyzer(self, phi):
        return AnalyzerSpec(phi=phi, shaky_width=self.shaky_width)

    def pair_source(self):
        return SourceSpec.entangled_uniform(self.misalignment_sigma)


@dataclass(frozen=True)
class PhotonPair:
    """Hidden polarizations of emitted pairs; fields may be scalars or
    equally shaped arrays (struct-of-arrays for vectorized runs)."""

    lambda1: np.ndarray
    lambda2: np.ndarray


def sample_pair(source, rng, size=None):
    """Draw one pair (``size=None``) or a batch of pairs from ``source``."""
    if source.kind == ENTANGLED_UNIFORM:
        lam1 = normalize_angle(rng.uniform(0.0, 2.0 * np.pi, size))
        lam2 = sample_wrapped_normal(rng, lam1, source.misalignment_sigma, size)
    else:
        # Collapsed-state shortcut: both photons independent around theta.
        lam1 = sample_wrapped_normal(rng, source.control_theta, source.collapse_sigma, size)
        lam2 = sample_wrapped_normal(rng, source.control_theta, source.collapse_sigma, size)
    return PhotonPair(lambda1=lam1, lambda2=lam2)


def classify(lam, analyzer):
    """Channel taken by a photon of polarization ``lam`` at ``analyzer``.

    Returns PLUS, MINUS or UNDETECTED (int scalar, or int array for array
    input). Undetected means the relative angle falls strictly inside a
    width-``shaky_width`` band centered on an odd multiple of pi/4; the
    band edge itself still counts as detected.
    """
    rel = np.asarray(lam, dtype=float) - analyzer.phi
    shaky = np.abs(np.mod(rel, HALF_PI) - QUARTER_PI) < 0.5 * analyzer.shaky_width
    m = np.mod(rel, np.pi)
    plus = (m < QUARTER_PI) | (m > 3.0 * QUARTER_PI)
    out = np.where(shaky, UNDETECTED, np.where(plus, PLUS, MINUS))
    return out if out.ndim else int(out)


def collapse_plus_channel(lambda_in, control, collapse_sigma, rng):
    """Send photons through a control beamsplitter and keep its +1 output.

    Photons that do not exit the +1 channel are removed from the beam.
    Survivors lose their incoming polarization: each is re-drawn around
    ``control.phi`` with spread ``collapse_sigma``.

    Scalar input returns the new polarization or ``None``. Array input
    returns ``(passed, collapsed)`` where ``collapsed[i]`` is meaningful
    only where ``passed[i]`` is True.
    """
    _check_sigma("collapse_sigma", collapse_sigma)
    outcome = classify(lambda_in, control)
    scalar = np.ndim(lambda_in) == 0
    passed = np.asarray(outcome) == PLUS
    collapsed = sample_wrapped_normal(rng, control.phi, collapse_sigma, np.shape(lambda_in))
    if scalar:
        return float(collapsed) if passed else None
    return passed, collapsed


def apply_fair_loss(outcome, fair_loss_prob, rng):
    """Replace outcomes by UNDETECTED with a probability that ignores both
    the photon's polarization and the analyzer setting."""
    if not 0.0 <= fair_loss_prob <= 1.0:
        raise ValueError(f"fair_loss_prob must lie in [0, 1], got {fair_loss_prob}")
    if fair_loss_prob == 0.0:
        return outcome
    lost = rng.random(np.shape(outcome)) < fair_loss_prob
    out = np.where(lost, UNDETECTED, outcome)
    return out if out.ndim else int(out)

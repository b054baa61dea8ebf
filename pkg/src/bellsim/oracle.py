"""Exact outcome probabilities for the polarization model.

The Monte Carlo side of the package never feeds this module: probabilities
are obtained by integrating the channel indicator sets directly. For the
uniform pair source the second photon's channel probability given the
first photon's polarization is a wrapped-normal mass over the channel
arcs (a sum of normal CDF terms), and the remaining one-dimensional
integral over the first polarization is done with composite
Gauss-Legendre panels laid inside the pieces where the integrand is
smooth. Piece boundaries are the channel-arc edges of both analyzers, so
the integrand never has a jump inside a panel and doubling the node
budget moves nothing beyond roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .angles import QUARTER_PI, fold_distance
from .errors import ConvergenceError
from .experiment import (
    KIND_ACTIVE,
    KIND_CORRELATION,
    KIND_MALUS,
    KIND_PASSIVE,
    SweepSeries,
)
from .model import CONTROLLED, ENTANGLED_UNIFORM, MINUS, PLUS, UNDETECTED

DEFAULT_NODES = 4096
MIN_NODES = 256
CONVERGENCE_TOL = 1e-6

# Wrapped-normal tail handling: summing shifted CDF terms out to 9 sigma
# leaves less than 1e-12 of unaccounted mass.
_TAIL_SIGMAS = 9.0

_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)

_CHANNELS = (PLUS, MINUS, UNDETECTED)


def channel_arcs(shaky_width):
    """Channel membership arcs on the fundamental domain [0, pi).

    Keys are the channel tags; values are lists of (lo, hi) intervals for
    the relative angle lambda - phi folded mod pi.
    """
    h = 0.5 * shaky_width
    arcs = {
        PLUS: [(0.0, QUARTER_PI - h), (3.0 * QUARTER_PI + h, np.pi)],
        MINUS: [(QUARTER_PI + h, 3.0 * QUARTER_PI - h)],
        UNDETECTED: [],
    }
    if shaky_width > 0.0:
        arcs[UNDETECTED] = [
            (QUARTER_PI - h, QUARTER_PI + h),
            (3.0 * QUARTER_PI - h, 3.0 * QUARTER_PI + h),
        ]
    return arcs


def arc_boundaries(shaky_width):
    """Interior jump points of the channel indicators on [0, pi)."""
    h = 0.5 * shaky_width
    if shaky_width > 0.0:
        pts = (QUARTER_PI - h, QUARTER_PI + h, 3.0 * QUARTER_PI - h, 3.0 * QUARTER_PI + h)
    else:
        pts = (QUARTER_PI, 3.0 * QUARTER_PI)
    return np.array(pts)


def normal_arc_mass(arcs, mu, sigma):
    """Mass of N(mu, sigma), wrapped with period pi, on the given arcs.

    ``mu`` may be an array. ``sigma = 0`` degenerates to arc membership of
    ``mu mod pi`` (half-open at the arc edges).
    """
    mu = np.asarray(mu, dtype=float)
    if sigma == 0.0:
        m = np.mod(mu, np.pi)
        out = np.zeros(mu.shape)
        for lo, hi in arcs:
            out += ((m >= lo) & (m < hi)).astype(float)
        return out
    span = _TAIL_SIGMAS * sigma
    k_lo = int(np.floor((float(mu.min()) - span) / np.pi)) - 1
    k_hi = int(np.ceil((float(mu.max()) + span) / np.pi)) + 1
    total = np.zeros(mu.shape)
    inv = 1.0 / sigma
    for k in range(k_lo, k_hi + 1):
        off = k * np.pi
        for lo, hi in arcs:
            total += ndtr((hi + off - mu) * inv) - ndtr((lo + off - mu) * inv)
    return total


def _subdivide(arcs, cuts):
    """Split arcs at every cut point that falls strictly inside one."""
    pieces = []
    for lo, hi in arcs:
        inner = sorted(c for c in cuts if lo < c < hi)
        edges = [lo, *inner, hi]
        pieces.extend(
            (a, b) for a, b in zip(edges[:-1], edges[1:]) if b - a > 1e-15
        )
    return pieces


def _panel_quadrature(pieces, n_panels):
    """Composite Gauss-Legendre nodes and weights over smooth pieces."""
    lengths = np.array([hi - lo for lo, hi in pieces])
    total = float(lengths.sum())
    nodes, weights = [], []
    for (lo, hi), ln in zip(pieces, lengths):
        n = max(1, int(round(n_panels * ln / total)))
        edges = np.linspace(lo, hi, n + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes.append((mid[:, None] + half[:, None] * _GL_NODES).ravel())
        weights.append((half[:, None] * _GL_WEIGHTS).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


def _cells_uniform(delta_phi, shaky_width, pair_sigma, nodes):
    """Joint channel probabilities (no fair loss) for the uniform source."""
    arcs = channel_arcs(shaky_width)
    # Jumps of analyzer B's indicators, expressed in analyzer A's frame.
    cuts = np.mod(arc_boundaries(shaky_width) + delta_phi, np.pi)
    budget = max(1, nodes // _GL_ORDER)
    cells = {}
    for x in _CHANNELS:
        pieces = _subdivide(arcs[x], cuts)
        if not pieces:
            for y in _CHANNELS:
                cells[x, y] = 0.0
            continue
        length = sum(hi - lo for lo, hi in pieces)
        u, wt = _panel_quadrature(pieces, max(len(pieces), int(round(budget * length / np.pi))))
        for y in _CHANNELS:
            w_y = normal_arc_mass(arcs[y], u - delta_phi, pair_sigma)
            cells[x, y] = float(np.dot(wt, w_y) / np.pi)
    return cells


def _cells_controlled(source, phi_a, phi_b, shaky_width):
    """Joint probabilities for two independent collapsed photons."""
    arcs = channel_arcs(shaky_width)
    mass_a = {
        x: float(
            normal_arc_mass(
                arcs[x], np.array(source.control_theta - phi_a), source.collapse_sigma
            )
        )
        for x in _CHANNELS
    }
    mass_b = {
        y: float(
            normal_arc_mass(
                arcs[y], np.array(source.control_theta - phi_b), source.collapse_sigma
            )
        )
        for y in _CHANNELS
    }
    return {(x, y): mass_a[x] * mass_b[y] for x in _CHANNELS for y in _CHANNELS}


@dataclass(frozen=True)
class OracleDistribution:
    """Exact joint outcome probabilities for one setting pair."""

    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float
    p_rejected: float
    phi_a: float
    phi_b: float
    params: object
    quadrature_nodes: int

    def __post_init__(self):
        total = self.p_pp + self.p_pm + self.p_mp + self.p_mm + self.p_rejected
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @property
    def settings(self):
        return (self.phi_a, self.phi_b)

    @property
    def p_detected(self):
        return self.p_pp + self.p_pm + self.p_mp + self.p_mm

    @property
    def correlation(self):
        return (self.p_pp - self.p_pm - self.p_mp + self.p_mm) / self.p_detected

    def cell(self, name):
        return getattr(self, "p_" + name)


def _raw_cells(source, phi_a, phi_b, shaky_width, nodes):
    if source.kind == ENTANGLED_UNIFORM:
        return _cells_uniform(phi_b - phi_a, shaky_width, source.misalignment_sigma, nodes)
    return _cells_controlled(source, phi_a, phi_b, shaky_width)


def joint_probabilities(source, phi_a, phi_b, params, quadrature_nodes=DEFAULT_NODES):
    """Exact joint outcome probabilities, with fair loss folded in
    analytically: both photons survive it with probability
    (1 - fair_loss_prob)^2.

    Raises ConvergenceError if doubling the node budget moves any cell by
    more than 1e-6, which would mean the piece layout failed to isolate
    an indicator jump.
    """
    if quadrature_nodes < MIN_NODES:
        raise ValueError(f"quadrature_nodes must be >= {MIN_NODES}")
    cells = _raw_cells(source, phi_a, phi_b, params.shaky_width, quadrature_nodes)
    refined = _raw_cells(source, phi_a, phi_b, params.shaky_width, 2 * quadrature_nodes)
    drift = max(abs(cells[k] - refined[k]) for k in cells)
    if drift > CONVERGENCE_TOL:
        raise ConvergenceError(
            f"doubling {quadrature_nodes} nodes moved a cell by {drift:.3e}"
        )
    keep = (1.0 - params.fair_loss_prob) ** 2
    detected = {
        (x, y): cells[x, y] * keep for x in (PLUS, MINUS) for y in (PLUS, MINUS)
    }
    p_det = sum(detected.values())
    return OracleDistribution(
        p_pp=detected[PLUS, PLUS],
        p_pm=detected[PLUS, MINUS],
        p_mp=detected[MINUS, PLUS],
        p_mm=detected[MINUS, MINUS],
        p_rejected=1.0 - p_det,
        phi_a=float(phi_a),
        phi_b=float(phi_b),
        params=params,
        quadrature_nodes=quadrature_nodes,
    )


def malus_plus_fraction(chi, collapse_sigma, params):
    """Expected +1 fraction among detected photons for a collapsed beam
    meeting an analyzer rotated by ``chi`` from the beam's center."""
    arcs = channel_arcs(params.shaky_width)
    mu = np.asarray(-np.asarray(chi, dtype=float))
    m_plus = normal_arc_mass(arcs[PLUS], mu, collapse_sigma)
    m_minus = normal_arc_mass(arcs[MINUS], mu, collapse_sigma)
    return m_plus / (m_plus + m_minus)


def malus_deviation_envelope(chi_grid, collapse_sigma, params):
    """Largest absolute gap between the model's transmission curve and
    cos^2(chi) over the grid."""
    chi_grid = np.asarray(chi_grid, dtype=float)
    frac = malus_plus_fraction(chi_grid, collapse_sigma, params)
    return float(np.max(np.abs(frac - np.cos(chi_grid) ** 2)))


def sharp_pair_rejection_probability(delta_phi, shaky_width):
    """Closed-form pair rejection probability for perfectly aligned pairs.

    Each analyzer rejects an arc of width ``shaky_width`` on the pi/2
    circle; the pair is rejected when the shared polarization falls in
    either arc, and the two arcs overlap by ``max(0, w - t)`` where ``t``
    is the circular distance between band centers. Independent of the
    quadrature machinery on purpose: this is its cross-check.
    """
    t = fold_distance(np.asarray(delta_phi, dtype=float), 0.5 * np.pi)
    overlap = np.maximum(0.0, shaky_width - t)
    return (2.0 / np.pi) * (2.0 * shaky_width - overlap)


def sawtooth_correlation(delta_phi):
    """E(delta_phi) for the loss-free sharp model: the saw-tooth
    1 - 4*delta/pi on [0, pi/2], continued by symmetry."""
    t = fold_distance(np.asarray(delta_phi, dtype=float), np.pi)
    return 1.0 - 4.0 * t / np.pi


def expected_sweep(kind, grid, source, params, quadrature_nodes=DEFAULT_NODES):
    """Noiseless reference curve of the requested kind over ``grid``.

    CorrelationVsDelta and PassiveRate expect the uniform source with the
    grid as the relative analyzer angle. ActiveRate expects a controlled
    source and reads the common measurement angle off the grid.
    MalusTransmission expects a controlled source and reads the analyzer
    offset chi off the grid.
    """
    grid = np.asarray(grid, dtype=float)
    if kind in (KIND_CORRELATION, KIND_PASSIVE):
        if source.kind != ENTANGLED_UNIFORM:
            raise ValueError(f"{kind} reference needs the uniform pair source")
        dists = [
            joint_probabilities(source, 0.0, d, params, quadrature_nodes) for d in grid
        ]
        if kind == KIND_CORRELATION:
            values = np.array([d.correlation for d in dists])
        else:
            values = np.array([d.p_detected for d in dists])
    elif kind == KIND_ACTIVE:
        if source.kind != CONTROLLED:
            raise ValueError("ActiveRate reference needs a controlled source")
        values = np.array(
            [
                joint_probabilities(source, phi, phi, params, quadrature_nodes).p_detected
                for phi in grid
            ]
        )
    elif kind == KIND_MALUS:
        if source.kind != CONTROLLED:
            raise ValueError("MalusTransmission reference needs a controlled source")
        values = np.asarray(malus_plus_fraction(grid, source.collapse_sigma, params))
    else:
        raise ValueError(f"unknown sweep kind {kind!r}")
    return SweepSeries(
        kind=kind,
        settings=grid,
        values=values,
        stderrs=np.zeros_like(grid),
        params=params,
        n_per_point=0,
        seed=0,
    )

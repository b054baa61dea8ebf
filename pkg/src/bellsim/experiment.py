"""Coincidence experiments over setting grids.

Every sweep point is an independent work unit whose random stream is
derived from ``(seed, point_index)``, so results are bit-identical for
any worker count and any scheduling order.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCountsError, FitFailureError, StarvedSourceError
from .model import (
    ENTANGLED_UNIFORM,
    MINUS,
    PLUS,
    UNDETECTED,
    ModelParams,
    SourceSpec,
    apply_fair_loss,
    classify,
    collapse_plus_channel,
    sample_pair,
)

KIND_CORRELATION = "CorrelationVsDelta"
KIND_PASSIVE = "PassiveRate"
KIND_ACTIVE = "ActiveRate"
KIND_MALUS = "MalusTransmission"

SWEEP_KINDS = (KIND_CORRELATION, KIND_PASSIVE, KIND_ACTIVE, KIND_MALUS)

# Below this many control-stage survivors a sweep point is meaningless.
MIN_CONTROL_PAIRS = 100


@dataclass(frozen=True)
class CoincidenceCounts:
    """Tallies for one setting pair. ``n_rejected`` counts pairs with at
    least one undetected photon; the five tallies partition ``n_total``."""

    n_pp: int
    n_pm: int
    n_mp: int
    n_mm: int
    n_rejected: int
    n_total: int

    def __post_init__(self):
        parts = (self.n_pp, self.n_pm, self.n_mp, self.n_mm, self.n_rejected)
        if any(n < 0 for n in parts) or self.n_total < 0:
            raise ValueError("counts must be non-negative")
        if sum(parts) != self.n_total:
            raise ValueError("coincidence tallies must sum to n_total")

    @property
    def n_detected(self):
        return self.n_pp + self.n_pm + self.n_mp + self.n_mm

    @property
    def rate_fraction(self):
        return self.n_detected / self.n_total if self.n_total else 0.0


@dataclass(frozen=True)
class CorrelationPoint:
    delta_phi: float
    e_value: float
    rate_fraction: float
    counts: CoincidenceCounts


@dataclass(frozen=True)
class ChshResult:
    """Four correlation estimates and their CHSH combination."""

    settings: tuple
    e_values: tuple
    e_stderrs: tuple
    s_value: float
    s_stderr: float


@dataclass(frozen=True)
class SweepSeries:
    """Ordered (setting, value, stderr) points for one sweep."""

    kind: str
    settings: np.ndarray
    values: np.ndarray
    stderrs: np.ndarray
    params: ModelParams
    n_per_point: int
    seed: int
    aux: dict = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in SWEEP_KINDS:
            raise ValueError(f"unknown sweep kind {self.kind!r}")
        settings = np.asarray(self.settings, dtype=float)
        if settings.size == 0:
            raise ValueError("sweep grid must be non-empty")
        if np.any(np.diff(settings) <= 0.0):
            raise ValueError("sweep settings must be strictly increasing")
        object.__setattr__(self, "settings", settings)
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        object.__setattr__(self, "stderrs", np.asarray(self.stderrs, dtype=float))

    @property
    def points(self):
        return list(zip(self.settings, self.values, self.stderrs))


def point_rng(seed, index):
    """Random stream for sweep point ``index`` under master ``seed``."""
    return np.random.default_rng([int(seed), int(index)])


def _map_indexed(fn, n_points, n_workers):
    if n_workers <= 1:
        return [fn(i) for i in range(n_points)]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, range(n_points)))


def tally_outcomes(out_a, out_b):
    """Build CoincidenceCounts from per-photon channel arrays."""
    out_a = np.asarray(out_a)
    out_b = np.asarray(out_b)
    det = (out_a != UNDETECTED) & (out_b != UNDETECTED)
    n_total = out_a.size
    n_pp = int(np.count_nonzero(det & (out_a == PLUS) & (out_b == PLUS)))
    n_pm = int(np.count_nonzero(det & (out_a == PLUS) & (out_b == MINUS)))
    n_mp = int(np.count_nonzero(det & (out_a == MINUS) & (out_b == PLUS)))
    n_mm = int(np.count_nonzero(det & (out_a == MINUS) & (out_b == MINUS)))
    return CoincidenceCounts(
        n_pp=n_pp,
        n_pm=n_pm,
        n_mp=n_mp,
        n_mm=n_mm,
        n_rejected=n_total - (n_pp + n_pm + n_mp + n_mm),
        n_total=n_total,
    )


def run_point(source, analyzer_a, analyzer_b, params, n_pairs, rng):
    """Simulate ``n_pairs`` pairs at one setting pair.

    A pair with at least one undetected photon provides no correlation
    sample and is tallied as rejected.
    """
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    pair = sample_pair(source, rng, n_pairs)
    out_a = classify(pair.lambda1, analyzer_a)
    out_b = classify(pair.lambda2, analyzer_b)
    out_a = apply_fair_loss(out_a, params.fair_loss_prob, rng)
    out_b = apply_fair_loss(out_b, params.fair_loss_prob, rng)
    return tally_outcomes(out_a, out_b)


def correlation(counts):
    """(n_pp - n_pm - n_mp + n_mm) / n_detected."""
    n_d = counts.n_detected
    if n_d == 0:
        raise DegenerateCountsError("all pairs rejected, correlation undefined")
    return (counts.n_pp - counts.n_pm - counts.n_mp + counts.n_mm) / n_d


def correlation_stderr(counts):
    """Standard error of the correlation, treating it as the mean of
    +/-1 products over the detected pairs."""
    n_d = counts.n_detected
    if n_d == 0:
        raise DegenerateCountsError("all pairs rejected, correlation undefined")
    e = correlation(counts)
    return float(np.sqrt(max(0.0, 1.0 - e * e) / n_d))


def _rate_stderr(value, n):
    return float(np.sqrt(max(0.0, value * (1.0 - value)) / n)) if n else 0.0


def correlation_point(delta_phi, counts):
    return CorrelationPoint(
        delta_phi=float(delta_phi),
        e_value=correlation(counts),
        rate_fraction=counts.rate_fraction,
        counts=counts,
    )


def correlation_sweep(source, params, n_per_point, grid, seed, n_workers=1):
    """E(delta_phi) with analyzer A fixed at 0 and B at the grid value.

    For the rotationally invariant source only the difference matters, so
    the grid doubles as the relative-angle axis.
    """
    grid = np.asarray(grid, dtype=float)

    def one(i):
        rng = point_rng(seed, i)
        counts = run_point(
            source,
            params.analyzer(0.0),
            params.analyzer(grid[i]),
            params,
            n_per_point,
            rng,
        )
        return correlation(counts), correlation_stderr(counts)

    results = _map_indexed(one, grid.size, n_workers)
    values, errs = zip(*results)
    return SweepSeries(
        kind=KIND_CORRELATION,
        settings=grid,
        values=np.array(values),
        stderrs=np.array(errs),
        params=params,
        n_per_point=n_per_point,
        seed=seed,
    )


def qm_reference(grid):
    """The quantum-mechanical correlation curve cos(2 * delta_phi)."""
    return np.cos(2.0 * np.asarray(grid, dtype=float))


def chsh_s(e_ab, e_abp, e_apb, e_apbp):
    """CHSH combination |E(a,b) - E(a,b')| + |E(a',b) + E(a',b')|."""
    return abs(e_ab - e_abp) + abs(e_apb + e_apbp)


def chsh(source, params, angle_set, n_per_point, seed, n_workers=1):
    """Run the four CHSH setting pairs for ``angle_set = (a, a', b, b')``."""
    a, a_prime, b, b_prime = (float(x) for x in angle_set)
    pairs = ((a, b), (a, b_prime), (a_prime, b), (a_prime, b_prime))
    if len(set(pairs)) != 4:
        raise ValueError("angle_set must yield four distinct setting pairs")

    def one(i):
        rng = point_rng(seed, i)
        phi_a, phi_b = pairs[i]
        counts = run_point(
            source,
            params.analyzer(phi_a),
            params.analyzer(phi_b),
            params,
            n_per_point,
            rng,
        )
        return correlation(counts), correlation_stderr(counts)

    results = _map_indexed(one, 4, n_workers)
    e_values = tuple(r[0] for r in results)
    e_stderrs = tuple(r[1] for r in results)
    s_stderr = float(np.sqrt(sum(s * s for s in e_stderrs)))
    return ChshResult(
        settings=pairs,
        e_values=e_values,
        e_stderrs=e_stderrs,
        s_value=chsh_s(*e_values),
        s_stderr=s_stderr,
    )


def visibility_fit(series):
    """Least-squares amplitude of A*cos(2*delta_phi) through an E series."""
    if series.kind != KIND_CORRELATION:
        raise ValueError("visibility fit requires a CorrelationVsDelta series")
    if series.settings.size < 8:
        raise ValueError("visibility fit requires at least 8 points")
    values = series.values
    if np.ptp(values) == 0.0:
        if values[0] == 0.0:
            return 0.0
        raise FitFailureError("series is constant, cosine amplitude is not identified")
    c = np.cos(2.0 * series.settings)
    return float(np.dot(values, c) / np.dot(c, c))


def passive_sweep(source, params, n_per_point, grid, seed, n_workers=1):
    """Detected-pair fraction versus relative analyzer angle."""
    if source.kind != ENTANGLED_UNIFORM:
        raise ValueError("passive test is defined for the uniform pair source")
    grid = np.asarray(grid, dtype=float)

    def one(i):
        rng = point_rng(seed, i)
        counts = run_point(
            source,
            params.analyzer(0.0),
            params.analyzer(grid[i]),
            params,
            n_per_point,
            rng,
        )
        rate = counts.rate_fraction
        return rate, _rate_stderr(rate, counts.n_total)

    results = _map_indexed(one, grid.size, n_workers)
    values, errs = zip(*results)
    return SweepSeries(
        kind=KIND_PASSIVE,
        settings=grid,
        values=np.array(values),
        stderrs=np.array(errs),
        params=params,
        n_per_point=n_per_point,
        seed=seed,
    )


def active_sweep(theta, params, n_per_point, grid, seed, n_workers=1):
    """Detected-pair fraction after the controlled source, versus the common
    measurement angle phi.

    Each point sends ``n_per_point`` fresh pairs through control
    beamsplitters at ``theta`` on both arms; pairs failing either control
    stage never reach the measurement and are excluded from its total.
    """
    grid = np.asarray(grid, dtype=float)
    source = SourceSpec.entangled_uniform(params.misalignment_sigma)
    control = params.analyzer(theta)

    def one(i):
        rng = point_rng(seed, i)
        pair = sample_pair(source, rng, n_per_point)
        ok1, lam1 = collapse_plus_channel(pair.lambda1, control, params.collapse_sigma, rng)
        ok2, lam2 = collapse_plus_channel(pair.lambda2, control, params.collapse_sigma, rng)
        both = ok1 & ok2
        n_ctrl = int(np.count_nonzero(both))
        if n_ctrl < MIN_CONTROL_PAIRS:
            raise StarvedSourceError(
                f"control stage passed only {n_ctrl} pairs at phi={grid[i]:.6g}"
            )
        analyzer = params.analyzer(grid[i])
        out_a = apply_fair_loss(classify(lam1[both], analyzer), params.fair_loss_prob, rng)
        out_b = apply_fair_loss(classify(lam2[both], analyzer), params.fair_loss_prob, rng)
        counts = tally_outcomes(out_a, out_b)
        rate = counts.rate_fraction
        return rate, _rate_stderr(rate, n_ctrl)

    results = _map_indexed(one, grid.size, n_workers)
    values, errs = zip(*results)
    return SweepSeries(
        kind=KIND_ACTIVE,
        settings=grid,
        values=np.array(values),
        stderrs=np.array(errs),
        params=params,
        n_per_point=n_per_point,
        seed=seed,
    )


def malus_transmission(theta, chi_grid, collapse_sigma, params, n_per_point, seed, n_workers=1):
    """Single-photon check of the collapse calibration.

    Pipeline per grid point: uniform photons hit a control beamsplitter at
    ``theta`` (only the collapsed +1 output continues), then a second
    beamsplitter at ``theta + chi``. The series value is the fraction
    exiting +1 among detected photons, to be compared with cos^2(chi);
    the detected fraction itself is kept in ``aux["detected_fraction"]``.
    """
    chi_grid = np.asarray(chi_grid, dtype=float)
    control = params.analyzer(theta)

    def one(i):
        rng = point_rng(seed, i)
        photons = rng.uniform(0.0, 2.0 * np.pi, n_per_point)
        ok, lam = collapse_plus_channel(photons, control, collapse_sigma, rng)
        beam = lam[ok]
        out = apply_fair_loss(
            classify(beam, params.analyzer(theta + chi_grid[i])),
            params.fair_loss_prob,
            rng,
        )
        n_plus = int(np.count_nonzero(out == PLUS))
        n_minus = int(np.count_nonzero(out == MINUS))
        n_det = n_plus + n_minus
        if n_det == 0:
            raise DegenerateCountsError(
                f"no detected photons at chi={chi_grid[i]:.6g}"
            )
        frac = n_plus / n_det
        return frac, _rate_stderr(frac, n_det), n_det / beam.size

    results = _map_indexed(one, chi_grid.size, n_workers)
    values = np.array([r[0] for r in results])
    errs = np.array([r[1] for r in results])
    detected = np.array([r[2] for r in results])
    return SweepSeries(
        kind=KIND_MALUS,
        settings=chi_grid,
        values=values,
        stderrs=errs,
        params=params,
        n_per_point=n_per_point,
        seed=seed,
        aux={"detected_fraction": detected},
    )

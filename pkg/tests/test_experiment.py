import numpy as np
import pytest

import bellsim as bs
from bellsim import (
    ChshResult,
    CoincidenceCounts,
    DegenerateCountsError,
    FitFailureError,
    ModelParams,
    SourceSpec,
    StarvedSourceError,
)

W = np.pi / 13.39


def _counts(pp, pm, mp, mm, rej=0):
    return CoincidenceCounts(pp, pm, mp, mm, rej, pp + pm + mp + mm + rej)


class TestCounts:
    def test_tallies_must_sum(self):
        with pytest.raises(ValueError):
            CoincidenceCounts(1, 1, 1, 1, 1, 6)
        with pytest.raises(ValueError):
            CoincidenceCounts(-1, 0, 0, 0, 1, 0)

    def test_detected_and_rate(self):
        c = _counts(10, 5, 5, 10, rej=20)
        assert c.n_detected == 30
        assert c.rate_fraction == pytest.approx(0.6)

    def test_tally_outcomes_conserves_counts(self):
        rng = np.random.default_rng(1)
        a = rng.choice([1, -1, 0], 10_000)
        b = rng.choice([1, -1, 0], 10_000)
        c = bs.tally_outcomes(a, b)
        assert c.n_total == 10_000
        assert c.n_pp + c.n_pm + c.n_mp + c.n_mm + c.n_rejected == c.n_total
        assert c.n_rejected == np.count_nonzero((a == 0) | (b == 0))


class TestCorrelation:
    def test_perfect(self):
        assert bs.correlation(_counts(50, 0, 0, 50)) == pytest.approx(1.0)

    def test_flat(self):
        assert bs.correlation(_counts(25, 25, 25, 25)) == pytest.approx(0.0)

    def test_degenerate_raises(self):
        with pytest.raises(DegenerateCountsError):
            bs.correlation(_counts(0, 0, 0, 0, rej=10))

    def test_bounded(self):
        rng = np.random.default_rng(2)
        params = ModelParams()
        src = params.pair_source()
        for _ in range(10):
            phi_a, phi_b = rng.uniform(0, 2 * np.pi, 2)
            c = bs.run_point(src, params.analyzer(phi_a), params.analyzer(phi_b),
                             params, 2000, rng)
            assert -1.0 <= bs.correlation(c) <= 1.0

    def test_correlation_point_bundles_statistics(self):
        counts = _counts(40, 5, 5, 40, rej=10)
        point = bs.correlation_point(np.pi / 8, counts)
        assert point.delta_phi == pytest.approx(np.pi / 8)
        assert point.e_value == pytest.approx(bs.correlation(counts))
        assert point.rate_fraction == pytest.approx(0.9)
        assert point.counts is counts


class TestRunPoint:
    def test_sharp_aligned_has_no_rejection_and_full_correlation(self):
        params = ModelParams(shaky_width=0.0, fair_loss_prob=0.0, misalignment_sigma=0.0)
        c = bs.run_point(params.pair_source(), params.analyzer(0.0),
                         params.analyzer(0.0), params, 5000,
                         np.random.default_rng(3))
        assert c.n_rejected == 0
        assert c.n_pm == 0 and c.n_mp == 0
        assert bs.correlation(c) == pytest.approx(1.0)

    def test_realistic_rejection_below_30_percent(self):
        # The calibration keeps the model's rejection probability below 0.30
        # at every setting pair (the plateau sits at 4w/pi = 0.2987); the
        # Monte Carlo fraction must agree with that probability within noise.
        params = ModelParams()
        src = params.pair_source()
        rng = np.random.default_rng(4)
        for phi_a, phi_b in ((0.0, np.pi / 8), (0.3, 1.1), (2.0, 2.0)):
            p = bs.joint_probabilities(src, phi_a, phi_b, params).p_rejected
            assert p < 0.30
            c = bs.run_point(src, params.analyzer(phi_a), params.analyzer(phi_b),
                             params, 10_000, rng)
            sd = np.sqrt(p * (1 - p) / c.n_total)
            assert abs(c.n_rejected / c.n_total - p) <= 3 * sd

    def test_counts_match_oracle_within_3_sigma(self):
        params = ModelParams()
        src = params.pair_source()
        phi_a, phi_b = 0.4, 1.3
        n = 50_000
        c = bs.run_point(src, params.analyzer(phi_a), params.analyzer(phi_b),
                         params, n, np.random.default_rng(5))
        dist = bs.joint_probabilities(src, phi_a, phi_b, params)
        observed = {"pp": c.n_pp, "pm": c.n_pm, "mp": c.n_mp, "mm": c.n_mm,
                    "rejected": c.n_rejected}
        for name, count in observed.items():
            p = dist.cell(name)
            sd = np.sqrt(p * (1 - p) / n)
            assert abs(count / n - p) <= 3 * sd, name

    def test_e_at_zero_matches_reference_value(self):
        # Oracle E(0) = 0.96892 for the default calibration, quoted as 0.97.
        params = ModelParams()
        src = params.pair_source()
        c = bs.run_point(src, params.analyzer(0.0), params.analyzer(0.0),
                         params, 100_000, np.random.default_rng(6))
        e = bs.correlation(c)
        assert e == pytest.approx(0.96892, abs=3 * bs.correlation_stderr(c))
        assert e == pytest.approx(0.97, abs=0.01)

    def test_requires_at_least_one_pair(self):
        params = ModelParams()
        with pytest.raises(ValueError):
            bs.run_point(params.pair_source(), params.analyzer(0.0),
                         params.analyzer(0.0), params, 0, np.random.default_rng(0))


class TestChsh:
    def test_combination_arithmetic(self):
        assert bs.chsh_s(0.707, -0.707, 0.707, 0.707) == pytest.approx(2.828)

    def test_fair_baseline_is_classical(self):
        params = ModelParams(shaky_width=0.0, fair_loss_prob=0.0, misalignment_sigma=0.0)
        r = bs.chsh(params.pair_source(), params,
                    (0.0, np.pi / 4, np.pi / 8, 3 * np.pi / 8), 100_000, seed=2)
        # saw-tooth correlations are exactly +/-0.5 at these angles
        assert r.s_value == pytest.approx(2.0, abs=0.05)

    def test_bound_under_fair_sampling_random_angles(self):
        # No fair-sampling run may exceed 2 beyond statistical error.
        params = ModelParams(shaky_width=0.0, fair_loss_prob=0.15, misalignment_sigma=0.0)
        src = params.pair_source()
        rng = np.random.default_rng(30)
        for k in range(100):
            angles = rng.uniform(0, 2 * np.pi, 4)
            pairs = ((angles[0], angles[2]), (angles[0], angles[3]),
                     (angles[1], angles[2]), (angles[1], angles[3]))
            if len(set(pairs)) != 4:
                continue
            r = bs.chsh(src, params, angles, 4000, seed=100 + k)
            assert r.s_value <= 2.0 + 3.0 * r.s_stderr

    def test_distinct_pairs_required(self):
        params = ModelParams()
        with pytest.raises(ValueError):
            bs.chsh(params.pair_source(), params, (0.0, 0.0, 0.1, 0.1), 100, seed=0)

    def test_result_structure(self):
        params = ModelParams()
        r = bs.chsh(params.pair_source(), params,
                    (0.0, np.pi / 4, np.pi / 8, 3 * np.pi / 8), 2000, seed=0)
        assert isinstance(r, ChshResult)
        assert len(r.settings) == 4 and len(r.e_values) == 4
        assert 0.0 <= r.s_value <= 4.0


class TestVisibilityFit:
    def _series(self, values, grid=None):
        grid = np.linspace(0, np.pi, len(values)) if grid is None else grid
        return bs.SweepSeries(kind=bs.KIND_CORRELATION, settings=grid,
                              values=np.asarray(values, dtype=float),
                              stderrs=np.zeros(len(values)),
                              params=ModelParams(), n_per_point=1, seed=0)

    def test_exact_cosine_gives_unit_amplitude(self):
        grid = np.linspace(0, np.pi, 40)
        assert bs.visibility_fit(self._series(np.cos(2 * grid), grid)) == pytest.approx(1.0)

    def test_all_zero_gives_zero(self):
        assert bs.visibility_fit(self._series(np.zeros(20))) == 0.0

    def test_constant_nonzero_fails(self):
        with pytest.raises(FitFailureError):
            bs.visibility_fit(self._series(np.full(20, 0.5)))

    def test_needs_enough_points(self):
        with pytest.raises(ValueError):
            bs.visibility_fit(self._series(np.cos(2 * np.linspace(0, np.pi, 5)),
                                           np.linspace(0, np.pi, 5)))

    def test_requires_correlation_kind(self):
        series = bs.SweepSeries(kind=bs.KIND_PASSIVE,
                                settings=np.linspace(0, np.pi, 10),
                                values=np.ones(10), stderrs=np.zeros(10),
                                params=ModelParams(), n_per_point=1, seed=0)
        with pytest.raises(ValueError):
            bs.visibility_fit(series)


class TestSweeps:
    def test_sharp_correlation_plateau(self):
        # With identical pair polarizations every sign flip happens inside a
        # rejection band as long as the analyzers differ by less than w, so
        # E stays exactly +1 there (the sharp-edge plateau).
        params = ModelParams(misalignment_sigma=0.0)
        src = params.pair_source()
        grid = np.array([0.0, 0.4 * W, 0.9 * W])
        series = bs.correlation_sweep(src, params, 5000, grid, seed=1)
        assert np.all(series.values == 1.0)
        oracle = bs.expected_sweep(bs.KIND_CORRELATION, grid, src, params)
        assert np.all(np.abs(oracle.values - 1.0) < 1e-12)
        beyond = bs.expected_sweep(bs.KIND_CORRELATION, np.array([1.5 * W]), src, params)
        assert beyond.values[0] < 1.0 - 1e-6

    def test_fair_baseline_sawtooth(self):
        params = ModelParams(shaky_width=0.0, fair_loss_prob=0.1, misalignment_sigma=0.0)
        grid = np.linspace(0, np.pi, 21)
        series = bs.correlation_sweep(params.pair_source(), params, 20_000, grid, seed=3)
        saw = bs.sawtooth_correlation(grid)
        for value, err, expected in zip(series.values, series.stderrs, saw):
            if err == 0.0:
                assert value == pytest.approx(expected, abs=1e-12)
            else:
                assert abs(value - expected) <= 3 * err

    def test_passive_requires_uniform_source(self):
        params = ModelParams()
        with pytest.raises(ValueError):
            bs.passive_sweep(SourceSpec.controlled(0.0, 0.3), params, 100,
                             np.linspace(0, np.pi, 5), seed=0)

    def test_fair_passive_rate_is_loss_squared(self):
        params = ModelParams(shaky_width=0.0, fair_loss_prob=0.1, misalignment_sigma=0.0)
        grid = np.linspace(0, np.pi, 15)
        series = bs.passive_sweep(params.pair_source(), params, 20_000, grid, seed=5)
        for value, err in zip(series.values, series.stderrs):
            assert abs(value - 0.81) <= 3 * err

    def test_active_starves_on_tiny_batches(self):
        params = ModelParams()
        with pytest.raises(StarvedSourceError):
            bs.active_sweep(0.0, params, 150, np.linspace(0, np.pi, 3), seed=0)

    def test_degenerate_point_propagates(self):
        params = ModelParams(fair_loss_prob=1.0)
        with pytest.raises(DegenerateCountsError):
            bs.correlation_sweep(params.pair_source(), params, 100,
                                 np.linspace(0, np.pi, 3), seed=0)

    def test_grid_must_increase(self):
        params = ModelParams()
        with pytest.raises(ValueError):
            bs.SweepSeries(kind=bs.KIND_PASSIVE, settings=np.array([0.0, 0.0, 1.0]),
                           values=np.zeros(3), stderrs=np.zeros(3),
                           params=params, n_per_point=1, seed=0)

    def test_malus_endpoints(self):
        params = ModelParams()
        series = bs.malus_transmission(0.0, np.array([0.0, np.pi / 2]),
                                       params.collapse_sigma, params, 20_000, seed=7)
        assert series.values[0] > 0.95
        assert series.values[1] < 0.05
        assert "detected_fraction" in series.aux
        assert np.all(series.aux["detected_fraction"] > 0.5)


class TestStatisticalInvariances:
    def test_rotational_invariance_of_uniform_source(self):
        params = ModelParams()
        src = params.pair_source()
        n = 40_000
        rng = np.random.default_rng(40)
        delta = rng.uniform(0, 2 * np.pi)
        c1 = bs.run_point(src, params.analyzer(0.2), params.analyzer(1.0),
                          params, n, np.random.default_rng(41))
        c2 = bs.run_point(src, params.analyzer(0.2 + delta), params.analyzer(1.0 + delta),
                          params, n, np.random.default_rng(42))
        for name in ("n_pp", "n_pm", "n_mp", "n_mm", "n_rejected"):
            f1 = getattr(c1, name) / n
            f2 = getattr(c2, name) / n
            sd = np.sqrt((f1 * (1 - f1) + f2 * (1 - f2)) / n)
            assert abs(f1 - f2) <= 3 * max(sd, 1e-9), name

    def test_exchange_symmetry(self):
        params = ModelParams()
        src = params.pair_source()
        n = 50_000
        c1 = bs.run_point(src, params.analyzer(0.3), params.analyzer(1.2),
                          params, n, np.random.default_rng(50))
        c2 = bs.run_point(src, params.analyzer(1.2), params.analyzer(0.3),
                          params, n, np.random.default_rng(51))
        e1, e2 = bs.correlation(c1), bs.correlation(c2)
        sd = np.hypot(bs.correlation_stderr(c1), bs.correlation_stderr(c2))
        assert abs(e1 - e2) <= 3 * sd


class TestDeterminism:
    def test_same_seed_same_series(self):
        params = ModelParams()
        src = params.pair_source()
        grid = np.linspace(0, np.pi, 12)
        a = bs.correlation_sweep(src, params, 2000, grid, seed=9)
        b = bs.correlation_sweep(src, params, 2000, grid, seed=9)
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.stderrs, b.stderrs)

    def test_worker_count_never_changes_results(self):
        params = ModelParams()
        src = params.pair_source()
        grid = np.linspace(0, np.pi, 12)
        serial = bs.passive_sweep(src, params, 2000, grid, seed=9, n_workers=1)
        parallel = bs.passive_sweep(src, params, 2000, grid, seed=9, n_workers=8)
        assert np.array_equal(serial.values, parallel.values)
        assert np.array_equal(serial.stderrs, parallel.stderrs)

        a = bs.active_sweep(0.0, params, 4000, grid, seed=9, n_workers=1)
        b = bs.active_sweep(0.0, params, 4000, grid, seed=9, n_workers=8)
        assert np.array_equal(a.values, b.values)

    def test_different_seeds_differ(self):
        params = ModelParams()
        src = params.pair_source()
        grid = np.linspace(0, np.pi, 6)
        a = bs.correlation_sweep(src, params, 2000, grid, seed=1)
        b = bs.correlation_sweep(src, params, 2000, grid, seed=2)
        assert not np.array_equal(a.values, b.values)

import math

import numpy as np
import pytest

from hepbell import mesonlab
from hepbell.mesonlab import (
    BelowThreshold,
    DetectorModel,
    EventRecord,
    EventSample,
    InsufficientStatistics,
    KinematicsConfig,
    NoData,
    angular_density,
    ch_from_events,
    derive_kappa,
    effective_statistics,
    efficiency_threshold,
    estimate_probability,
    generate_events,
    read_events_csv,
    transverse_state,
    two_body_beta,
    write_events_csv,
)
from hepbell.qcore import Projector, born_probability

SQ2 = np.sqrt(2.0)
MAX_GAP = (SQ2 - 1.0) / 2.0
OPTIMAL = (0.0, 3 * np.pi / 4, 3 * np.pi / 8, np.pi / 8)
TWO_PI = 2.0 * np.pi


def signal_cdf(phi):
    return (2.0 * phi - np.sin(2.0 * phi)) / (4.0 * np.pi)


class TestTransverseState:
    def test_amplitude_pattern(self):
        state = transverse_state()
        assert np.allclose(state.amps, np.array([0, 1, -1, 0]) / SQ2)

    def test_same_direction_projection_vanishes(self, rng):
        state = transverse_state()
        for theta in rng.uniform(0, 2 * np.pi, 20):
            proj = Projector.onto([np.cos(theta), np.sin(theta)])
            assert born_probability(state, [proj, proj]) < 1e-12

    def test_joint_probability_matches_sine_law(self, rng):
        state = transverse_state()
        for _ in range(100):
            t1, t2 = rng.uniform(0, 2 * np.pi, 2)
            p = born_probability(
                state,
                [
                    Projector.onto([np.cos(t1), np.sin(t1)]),
                    Projector.onto([np.cos(t2), np.sin(t2)]),
                ],
            )
            assert abs(p - 0.5 * np.sin(t2 - t1) ** 2) < 1e-12


class TestAngularDensity:
    def test_peak_value(self):
        assert abs(angular_density(np.pi / 2) - 1 / np.pi) < 1e-12

    def test_zero_at_coplanar(self):
        assert angular_density(0.0) == 0.0

    def test_normalization(self):
        grid = np.linspace(0.0, TWO_PI, 20001)
        integral = np.trapezoid(angular_density(grid), grid)
        assert abs(integral - 1.0) < 1e-10

    def test_kappa_derived_from_state(self):
        assert abs(derive_kappa() - np.pi / 2) < 1e-12


class TestGenerateEvents:
    def test_window_fraction_matches_analytic_integral(self):
        events = generate_events(1_000_000, seed=42)
        lo, hi = np.pi / 2 - 0.05, np.pi / 2 + 0.05
        frac = float(np.mean((events.phi >= lo) & (events.phi <= hi)))
        expected = float(signal_cdf(hi) - signal_cdf(lo))
        sigma = math.sqrt(expected * (1 - expected) / 1_000_000)
        assert abs(frac - expected) < 3 * sigma

    def test_inverse_cdf_is_exact_in_probability(self, rng):
        u = rng.random(100_000)
        phi = mesonlab._invert_signal_cdf(u)
        assert float(np.max(np.abs(signal_cdf(phi) - u))) < 1e-12
        assert phi.min() >= 0.0 and phi.max() < TWO_PI

    def test_zero_efficiency_gives_no_coincidences(self):
        det = DetectorModel(eta_1=0.0, eta_2=0.0)
        events = generate_events(10_000, det, seed=1)
        assert int(events.coincidence_mask.sum()) == 0

    def test_pure_background_is_uniform(self):
        det = DetectorModel(background_fraction=1.0)
        events = generate_events(1_000_000, det, seed=44)
        counts, _ = np.histogram(events.phi, bins=np.linspace(0, TWO_PI, 65))
        expected = 1_000_000 / 64
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        assert chi2 < 92.010  # chi2 0.99 quantile at 63 dof

    def test_deterministic_for_fixed_seed_and_workers(self):
        a = generate_events(10_000, seed=7, workers=3)
        b = generate_events(10_000, seed=7, workers=3)
        for field in ("phi", "detected_1", "detected_2", "is_background"):
            assert np.array_equal(getattr(a, field), getattr(b, field))

    def test_worker_count_is_part_of_the_stream_key(self):
        a = generate_events(10_000, seed=7, workers=1)
        b = generate_events(10_000, seed=7, workers=2)
        assert not np.array_equal(a.phi, b.phi)

    def test_validation(self):
        with pytest.raises(ValueError):
            generate_events(0, seed=1)
        with pytest.raises(ValueError):
            generate_events(10, seed=-1)
        with pytest.raises(ValueError):
            generate_events(10, seed=1, workers=0)
        with pytest.raises(ValueError):
            DetectorModel(eta_1=1.5)

    def test_event_sample_record_access(self):
        events = generate_events(10, seed=3)
        record = events[0]
        assert isinstance(record, EventRecord)
        assert 0.0 <= record.phi < TWO_PI
        assert len(events[2:5]) == 3
        rebuilt = EventSample.from_records(list(events))
        assert np.array_equal(rebuilt.phi, events.phi)


class TestEstimateProbability:
    def test_value_at_peak(self):
        events = generate_events(1_000_000, seed=42)
        estimate = estimate_probability(events)
        p, err = estimate.value_at(np.pi / 2)
        assert abs(p - 0.5) < 3 * err

    def test_near_zero_bin_has_upper_limit_only(self):
        events = generate_events(1_000_000, seed=42)
        estimate = estimate_probability(events, bin_width=TWO_PI / 628)
        scale = estimate.kappa / (int(estimate.counts.sum()) * estimate.bin_width)
        assert estimate.counts[0] <= 3
        assert estimate.p_hat[0] <= 3 * scale

    def test_fine_bin_at_peak(self):
        events = generate_events(1_000_000, seed=42)
        estimate = estimate_probability(events, bin_width=TWO_PI / 628)
        p, err = estimate.value_at(np.pi / 2)
        assert abs(p - 0.5) < 3 * err

    def test_statistical_error_scales_inverse_root_n(self):
        ratios = []
        for seed in (11, 12, 13):
            small = estimate_probability(generate_events(100_000, seed=seed))
            big = estimate_probability(generate_events(400_000, seed=seed))
            idx = small.bin_index(np.pi / 2)
            ratios.append(float(small.stat_err[idx] / big.stat_err[idx]))
        assert abs(np.mean(ratios) - 2.0) < 0.2  # 4x events halves the error twice

    def test_phat_integrates_to_kappa(self):
        events = generate_events(200_000, seed=9)
        estimate = estimate_probability(events)
        assert abs(float(estimate.p_hat.sum() * estimate.bin_width) - estimate.kappa) < 1e-9

    def test_counts_sum_to_detected(self):
        det = DetectorModel(eta_1=0.8, eta_2=0.9)
        events = generate_events(100_000, det, seed=21)
        estimate = estimate_probability(events)
        assert int(estimate.counts.sum()) == int(events.coincidence_mask.sum())

    def test_closure_against_true_shape(self):
        # Bin-averaged estimates vs the shape at bin centers, 64 bins, 1e6.
        events = generate_events(1_000_000, seed=1234)
        estimate = estimate_probability(events, bin_width=TWO_PI / 64)
        centers = 0.5 * (estimate.bin_edges[:-1] + estimate.bin_edges[1:])
        truth = 0.5 * np.sin(centers) ** 2
        err = np.maximum(estimate.stat_err, 1e-12)
        pulls = np.abs(estimate.p_hat - truth) / err
        assert float(pulls[estimate.counts > 0].max()) < 4.0

    def test_bad_bin_width_rejected(self):
        events = generate_events(1_000, seed=2)
        with pytest.raises(ValueError):
            estimate_probability(events, bin_width=0.01)

    def test_no_data(self):
        det = DetectorModel(eta_1=0.0)
        events = generate_events(1_000, det, seed=2)
        with pytest.raises(NoData):
            estimate_probability(events)


class TestChFromEvents:
    def test_perfect_detector_million_events(self):
        events = generate_events(1_000_000, seed=42)
        report = ch_from_events(events, OPTIMAL)
        assert abs(report.value - MAX_GAP) < 3 * report.stat_err
        assert report.violated

    def test_reduced_efficiency_kills_violation(self):
        det = DetectorModel(eta_1=0.7, eta_2=0.7)
        events = generate_events(300_000, det, seed=43)
        report = ch_from_events(events, OPTIMAL, det)
        expected = 0.49 * (1 + SQ2) / 2 - 0.7
        assert report.value < 0.0
        assert abs(report.value - expected) < 3 * report.stat_err
        assert not report.violated

    def test_pure_background_gives_uncorrelated_value(self):
        det = DetectorModel(background_fraction=1.0)
        events = generate_events(1_000_000, det, seed=44)
        report = ch_from_events(events, OPTIMAL, det)
        assert abs(report.value + 0.5) < 3 * report.stat_err

    def test_branching_weight_thins_sample_without_shifting_value(self):
        thinned = DetectorModel(br_weight=0.25)
        full_events = generate_events(400_000, seed=55)
        thin_events = generate_events(400_000, thinned, seed=55)
        assert int(thin_events.coincidence_mask.sum()) < int(
            full_events.coincidence_mask.sum()
        )
        full = ch_from_events(full_events, OPTIMAL)
        thin = ch_from_events(thin_events, OPTIMAL, thinned)
        combined = math.hypot(full.stat_err, thin.stat_err)
        assert abs(full.value - thin.value) < 3 * combined

    def test_empty_window_raises_named_insufficient_statistics(self):
        events = generate_events(3, seed=1)
        with pytest.raises(InsufficientStatistics) as excinfo:
            ch_from_events(events, OPTIMAL)
        assert "phi=" in str(excinfo.value)

    def test_coincident_settings_rejected(self):
        events = generate_events(1_000, seed=1)
        with pytest.raises(ValueError):
            ch_from_events(events, (0.0, 0.0, 0.0, 0.0))


class TestEfficiencyThreshold:
    def test_matches_analytic_value(self):
        assert abs(efficiency_threshold() - 2 * (SQ2 - 1)) < 1e-6

    def test_classically_capped_joints_never_violate(self):
        assert efficiency_threshold(joint_max=1.0) == 1.0

    def test_threshold_brackets_violation(self):
        threshold = efficiency_threshold()
        assert mesonlab.max_s_of_eta(threshold + 1e-3) > 0.0
        assert mesonlab.max_s_of_eta(threshold - 1e-3) < 0.0

    def test_tolerance_validation(self):
        with pytest.raises(ValueError):
            efficiency_threshold(search_tol=1e-12)


class TestKinematics:
    def test_paper_masses(self):
        result = two_body_beta(KinematicsConfig(m_parent=2.980, m_vector=1.019461))
        assert abs(result.beta - 0.7293) < 0.0005
        assert result.space_like_ok

    def test_near_threshold(self):
        m_vector = 1.0
        result = two_body_beta(KinematicsConfig(m_parent=2 * m_vector * 1.000001, m_vector=m_vector))
        assert abs(result.beta - 0.0014) < 2e-4
        assert not result.space_like_ok

    def test_massless_limit(self):
        result = two_body_beta(KinematicsConfig(m_parent=2.980, m_vector=1e-9))
        assert abs(result.beta - 1.0) < 1e-12

    def test_below_threshold_raises(self):
        with pytest.raises(BelowThreshold):
            two_body_beta(KinematicsConfig(m_parent=2.0, m_vector=1.0))

    def test_beta_monotone_decreasing_in_vector_mass(self):
        betas = [
            two_body_beta(KinematicsConfig(m_parent=2.980, m_vector=m)).beta
            for m in np.linspace(0.1, 1.48, 30)
        ]
        assert all(a > b for a, b in zip(betas, betas[1:]))

    def test_mass_validation(self):
        with pytest.raises(ValueError):
            KinematicsConfig(m_parent=-1.0, m_vector=0.5)


class TestEffectiveStatistics:
    def test_phi_pair_branching(self):
        det = DetectorModel(br_weight=0.492**2)
        assert abs(effective_statistics(1_000_000, det) - 242_064) < 1.0

    def test_full_branching_keeps_count(self):
        det = DetectorModel(br_weight=1.0)
        assert effective_statistics(123, det) == 123.0

    def test_zero_efficiency(self):
        det = DetectorModel(eta_1=0.0)
        assert effective_statistics(1_000_000, det) == 0.0


class TestCsvRoundTrip:
    def test_write_read_write_is_stable(self, tmp_path):
        events = generate_events(500, DetectorModel(eta_1=0.9, background_fraction=0.2), seed=5)
        path_a = tmp_path / "a.csv"
        path_b = tmp_path / "b.csv"
        write_events_csv(events, path_a)
        reread = read_events_csv(path_a)
        write_events_csv(reread, path_b)
        assert path_a.read_bytes() == path_b.read_bytes()
        assert np.array_equal(reread.detected_1, events.detected_1)
        assert float(np.max(np.abs(reread.phi - events.phi))) < 1e-8

    def test_header_is_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("phi,detected_1\n0.1,1\n")
        with pytest.raises(ValueError):
            read_events_csv(path)

    def test_ids_must_increase_from_zero(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(
            "event_id,phi,detected_1,detected_2,is_background\n"
            "1,0.5,1,1,0\n"
        )
        with pytest.raises(ValueError):
            read_events_csv(path)

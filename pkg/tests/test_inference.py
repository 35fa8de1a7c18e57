"""Detection model, binomial sampling, ML estimation and the fringe fit."""

import numpy as np
import pytest

from spinlift import (
    FitSingularError,
    FringeData,
    MeasurementModel,
    dark_state_fidelity,
    detection_map,
    fringe_prediction,
    infidelity_per_op,
    ml_estimate_single,
    ml_fit_fringe,
    named_state,
    rotation_unitary,
    sample_counts,
    state_fidelity,
)
from spinlift.experiments import DEFAULT_FRINGE_CHI, run_fringe_experiment

M_DEFAULT = MeasurementModel(shots=200, seed=0)


class TestDetectionMap:
    def test_extremes(self):
        assert detection_map(1.0, M_DEFAULT) == pytest.approx(0.985)
        assert detection_map(0.0, M_DEFAULT) == pytest.approx(0.015)

    def test_symmetric_midpoint(self):
        assert detection_map(0.5, M_DEFAULT) == pytest.approx(0.5)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            detection_map(1.2, M_DEFAULT)

    def test_model_validation(self):
        with pytest.raises(ValueError):
            MeasurementModel(p_b_given_1=0.2, p_b_given_0=0.5)
        with pytest.raises(ValueError):
            MeasurementModel(shots=0)


class TestSampleCounts:
    def test_deterministic_extremes(self):
        m = MeasurementModel(shots=50, seed=4)
        assert sample_counts(0.0, m) == 0
        assert sample_counts(1.0, m) == 50

    def test_seeded_reproducibility(self):
        m = MeasurementModel(shots=100, seed=12)
        assert sample_counts(0.37, m) == sample_counts(0.37, m)

    def test_binomial_concentration(self):
        m = MeasurementModel(shots=100000, seed=3)
        k = sample_counts(0.3, m)
        assert 0.29 <= k / m.shots <= 0.31


class TestMlEstimateSingle:
    def test_extremes_map_to_unit_interval(self):
        m = MeasurementModel(shots=1000, seed=0)
        assert ml_estimate_single(round(0.985 * 1000), m) == pytest.approx(1.0, abs=1e-12)
        assert ml_estimate_single(round(0.015 * 1000), m) == pytest.approx(0.0, abs=1e-12)

    def test_symmetric_midpoint(self):
        m = MeasurementModel(p_b_given_1=0.97, p_b_given_0=0.03, shots=1000)
        assert ml_estimate_single(500, m) == pytest.approx(0.5)

    def test_clamping(self):
        m = MeasurementModel(shots=100)
        assert ml_estimate_single(0, m) == 0.0
        assert ml_estimate_single(100, m) == 1.0

    def test_ideal_detection_reduces_to_frequency(self):
        m = MeasurementModel(p_b_given_1=1.0, p_b_given_0=0.0, shots=64)
        for k in (0, 13, 40, 64):
            assert ml_estimate_single(k, m) == k / 64

    def test_is_the_likelihood_maximizer(self):
        from scipy.special import xlogy
        m = MeasurementModel(shots=80, seed=0)
        k = 33
        p_hat = ml_estimate_single(k, m)
        grid = np.linspace(0, 1, 4001)
        q = detection_map(grid, m)
        ll = xlogy(k, q) + xlogy(m.shots - k, 1 - q)
        assert abs(grid[np.argmax(ll)] - p_hat) < 5e-4


class TestMlFitFringe:
    def test_noiseless_dark_state(self):
        rho = named_state(3, "D").density_matrix()
        _, fit = run_fringe_experiment(rho, M_DEFAULT, exact=True)
        assert fit.a0 == pytest.approx(0.5, abs=1e-7)
        assert fit.a == pytest.approx(0.5, abs=1e-7)
        assert fit.phi0 == pytest.approx(np.pi, abs=1e-7)
        assert fit.fidelity_raw == pytest.approx(1.0, abs=1e-9)

    def test_flat_data(self):
        chi = DEFAULT_FRINGE_CHI
        counts = np.full(chi.shape, detection_map(0.5, M_DEFAULT) * 200)
        fit = ml_fit_fringe(FringeData(chi=chi, counts=counts, shots=200), M_DEFAULT)
        assert fit.a0 == pytest.approx(0.5, abs=1e-6)
        assert fit.a == pytest.approx(0.0, abs=1e-6)

    def test_too_few_points(self):
        with pytest.raises(FitSingularError):
            ml_fit_fringe(FringeData(chi=np.array([0.0, 1.0, 2.0]),
                                     counts=np.array([5.0, 6.0, 7.0]), shots=10),
                          M_DEFAULT)

    def test_insufficient_span(self):
        chi = np.linspace(0, 0.3, 8)
        counts = np.full(8, 5.0)
        with pytest.raises(FitSingularError):
            ml_fit_fringe(FringeData(chi=chi, counts=counts, shots=10), M_DEFAULT)

    def test_recovery_under_noise(self):
        true = (0.45, 0.40, 1.3)
        chi = DEFAULT_FRINGE_CHI
        q = detection_map(true[0] + true[1] * np.cos(2 * chi + true[2]), M_DEFAULT)
        rng = np.random.default_rng(77)
        counts = rng.binomial(2000, q).astype(float)
        fit = ml_fit_fringe(FringeData(chi=chi, counts=counts, shots=2000), M_DEFAULT)
        assert fit.a0 == pytest.approx(true[0], abs=5 * fit.a0_err)
        assert fit.a == pytest.approx(true[1], abs=5 * fit.a_err)
        assert fit.phi0 == pytest.approx(true[2], abs=5 * fit.phi0_err)

    def test_estimator_consistency_with_shots(self):
        true = (0.5, 0.45, 2.4)
        chi = DEFAULT_FRINGE_CHI
        q = detection_map(true[0] + true[1] * np.cos(2 * chi + true[2]), M_DEFAULT)
        rms = []
        for n in (1000, 10000, 100000):
            errs = []
            for r in range(20):
                rng = np.random.default_rng([n, r])
                counts = rng.binomial(n, q).astype(float)
                fit = ml_fit_fringe(FringeData(chi=chi, counts=counts, shots=n),
                                    M_DEFAULT)
                errs.append((fit.a0 - true[0]) ** 2 + (fit.a - true[1]) ** 2)
            rms.append(np.sqrt(np.mean(errs)))
        assert rms[0] > rms[1] > rms[2]


class TestDarkStateFidelity:
    def test_values(self):
        rho = named_state(3, "D").density_matrix()
        _, fit = run_fringe_experiment(rho, M_DEFAULT, exact=True)
        assert dark_state_fidelity(fit) == pytest.approx(1.0, abs=1e-9)

    def test_formula(self):
        from dataclasses import replace
        rho = named_state(3, "D").density_matrix()
        _, fit = run_fringe_experiment(rho, M_DEFAULT, exact=True)
        zero_phase = replace(fit, phi0=0.0)
        assert dark_state_fidelity(zero_phase) == pytest.approx(0.0, abs=1e-6)
        no_amp = replace(fit, a=0.0)
        assert dark_state_fidelity(no_amp) == pytest.approx(0.5, abs=1e-6)


class TestFringePrediction:
    def test_dark_state_fringe_shape(self):
        rho = named_state(3, "D").density_matrix()
        chi = np.linspace(0, np.pi, 32, endpoint=False)
        p0 = np.array([fringe_prediction(rho, c) for c in chi])
        assert np.mean(p0) == pytest.approx(0.5, abs=1e-9)
        z = 2 * np.mean(p0 * np.exp(-2j * chi))
        assert abs(z) == pytest.approx(0.5, abs=1e-9)
        assert np.angle(z) == pytest.approx(np.pi, abs=1e-9) or \
            np.angle(z) == pytest.approx(-np.pi, abs=1e-9)

    def test_zero_state_no_harmonic(self):
        rho = named_state(3, "0").density_matrix()
        chi = np.linspace(0, np.pi, 16, endpoint=False)
        p0 = np.array([fringe_prediction(rho, c) for c in chi])
        z = 2 * np.mean(p0 * np.exp(-2j * chi))
        assert abs(z) < 1e-12

    def test_random_pure_state_matches_structure(self):
        # offset = (P+1 + P-1)/2, harmonic amplitude = |rho_{+1,-1}|,
        # phase = arg rho_{+1,-1}; extracted by Fourier analysis of the
        # propagation-based curve
        rng = np.random.default_rng(15)
        for _ in range(5):
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
            v /= np.linalg.norm(v)
            rho = np.outer(v, v.conj())
            chi = np.linspace(0, np.pi, 64, endpoint=False)
            p0 = np.array([fringe_prediction(rho, c) for c in chi])
            offset = np.mean(p0)
            z = 2 * np.mean(p0 * np.exp(-2j * chi))
            expect_offset = 0.5 * (rho[0, 0].real + rho[2, 2].real)
            rho_pm = rho[2, 0]  # <+1| rho |-1>
            assert offset == pytest.approx(expect_offset, abs=1e-9)
            assert abs(z) == pytest.approx(abs(rho_pm), abs=1e-9)
            if abs(rho_pm) > 1e-6:
                dphi = (np.angle(z) - np.angle(rho_pm) + np.pi) % (2 * np.pi) - np.pi
                assert abs(dphi) < 1e-8

    def test_pipeline_matches_state_fidelity(self):
        rng = np.random.default_rng(8)
        dark = named_state(3, "D")
        for _ in range(3):
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
            v /= np.linalg.norm(v)
            rho = np.outer(v, v.conj())
            _, fit = run_fringe_experiment(rho, M_DEFAULT, exact=True)
            from spinlift import StateVector
            expect = state_fidelity(StateVector(v), dark)
            assert fit.fidelity_raw == pytest.approx(expect, abs=1e-6)

    def test_invalid_density_matrix(self):
        with pytest.raises(ValueError):
            fringe_prediction(np.eye(3), 0.0)  # trace 3
        bad = np.diag([0.7, 0.2, 0.1]).astype(complex)
        bad[0, 1] = 0.5
        with pytest.raises(ValueError):
            fringe_prediction(bad, 0.0)


class TestInfidelityPerOp:
    def test_exact_line(self):
        pts = [(n, 1 - n * 1e-4, 1.0) for n in (8, 16, 32, 64)]
        eps, _ = infidelity_per_op(pts)
        assert eps == pytest.approx(1e-4, rel=1e-12)

    def test_fixed_intercept_with_n0_point(self):
        pts = [(0, 1.0, 1.0)] + [(n, 1 - n * 2e-4, 1.0) for n in (8, 16)]
        eps, _ = infidelity_per_op(pts)
        assert eps == pytest.approx(2e-4, rel=1e-12)

    def test_monte_carlo_recovery(self):
        rng_master = np.random.default_rng(2024)
        eps_true, sigma = 2e-4, 5e-4
        ns = np.array([8, 16, 24, 32, 40, 48, 56, 64])
        hits = 0
        runs = 500
        for _ in range(runs):
            f = 1 - ns * eps_true + rng_master.normal(0, sigma, size=ns.size)
            eps, se = infidelity_per_op(list(zip(ns, f, np.full(ns.size, sigma))))
            hits += abs(eps - eps_true) <= 3 * se
        assert hits >= 0.99 * runs

    def test_singular_design(self):
        with pytest.raises(FitSingularError):
            infidelity_per_op([(8, 0.999, 1.0)])


class TestJsonInterfaces:
    def test_fringe_data_round_trip(self):
        data = FringeData(chi=DEFAULT_FRINGE_CHI,
                          counts=np.arange(20, dtype=float), shots=200)
        again = FringeData.from_json_dict(data.to_json_dict())
        assert np.array_equal(again.chi, data.chi)
        assert np.array_equal(again.counts, data.counts)
        assert again.shots == data.shots

    def test_fit_result_serializes(self):
        import json
        rho = named_state(3, "D").density_matrix()
        _, fit = run_fringe_experiment(rho, M_DEFAULT, exact=True)
        doc = json.loads(json.dumps(fit.to_json_dict()))
        assert doc["a0"] == pytest.approx(0.5, abs=1e-7)
        assert doc["phi0_rad"] == pytest.approx(np.pi, abs=1e-7)
        assert set(doc) >= {"a0", "a", "phi0_rad", "a0_err", "a_err",
                            "phi0_err", "fidelity", "fidelity_raw", "fidelity_err"}

import math

import numpy as np
import pytest

from dompo import (NONTRIVIAL_LOWER, NONTRIVIAL_UPPER, TRIVIAL, DomainError,
                   bistability_window, nontrivial_intensities,
                   pitchfork_threshold, q_coefficients, reconstruct_amplitudes,
                   sigma_from_intensity, steady_states, trivial_solution,
                   turning_point)
from dompo.steady import field_residuals

from conftest import make_params, random_model_params


class TestTrivialSolution:
    def test_resonant_pump(self):
        ss = trivial_solution(make_params(delta_p=0.0, sigma=2.0))
        assert ss.beta_p == pytest.approx(2.0)
        assert ss.I_p == pytest.approx(4.0)
        assert ss.branch == TRIVIAL

    def test_undriven(self):
        ss = trivial_solution(make_params(sigma=0.0))
        assert ss.beta_p == 0 and ss.beta_s == 0 and ss.x_bar == 0

    def test_detuned_pump(self):
        p = make_params(delta_p=5.0, sigma=10.0)
        ss = trivial_solution(p)
        assert ss.beta_p == pytest.approx(10 * (1 + 5j) / 26)
        assert ss.I_p == pytest.approx(100 / 26)
        r_p, r_s = field_residuals(p, ss)
        assert abs(r_p) < 1e-14 and abs(r_s) == 0.0


class TestQuadratic:
    def test_resonant_dopo_limit(self):
        q = q_coefficients(make_params(delta_p=0.0, delta_s=0.0, g=0.0))
        assert (q.q0, q.q1, q.q2) == (1.0, 1.0, 0.25)

    def test_cooling_regime_values(self, cooling_params):
        q = q_coefficients(cooling_params)
        assert q.q0 == pytest.approx(2626.0)
        assert q.q1 == pytest.approx(-14.0)
        assert q.q2 == pytest.approx(0.03125)

    def test_no_fold_at_weaker_coupling(self):
        q = q_coefficients(make_params(g=0.2))
        assert q.q1 == pytest.approx(9.4)
        assert turning_point(make_params(g=0.2)) is None

    def test_quadratic_reconstructs_drive(self, rng):
        # sigma^2(I_s) from the coefficients matches the phase-locked drive
        for _ in range(50):
            p = random_model_params(rng)
            q = q_coefficients(p)
            I_s = float(rng.uniform(0.01, 50.0))
            locked = (1 - 1j * p.delta_p) * (1 - 1j * p.delta_s
                                             - 2j * p.g ** 2 * I_s) + I_s / 2
            s2 = q.q0 + q.q1 * I_s + q.q2 * I_s * I_s
            assert s2 == pytest.approx(abs(locked) ** 2, rel=1e-12)


class TestIntensities:
    def test_resonant_dopo_above_threshold(self):
        p = make_params(delta_p=0.0, delta_s=0.0, g=0.0)
        roots = nontrivial_intensities(p, 2.0)
        assert len(roots) == 1
        I, branch = roots[0]
        assert I == pytest.approx(2.0)          # I_s = 2 (sigma - 1) at resonance
        assert branch == NONTRIVIAL_UPPER

    def test_below_threshold_empty(self):
        p = make_params(delta_p=0.0, delta_s=0.0, g=0.0)
        assert nontrivial_intensities(p, 0.5) == []

    def test_bistable_pair_with_residuals(self, cooling_params):
        sigma = math.sqrt(1842.0)
        roots = nontrivial_intensities(cooling_params, sigma)
        assert [b for _, b in roots] == [NONTRIVIAL_LOWER, NONTRIVIAL_UPPER]
        q = q_coefficients(cooling_params)
        for I, _ in roots:
            assert q.q0 + q.q1 * I + q.q2 * I * I == pytest.approx(1842.0, rel=1e-10)
            ss = reconstruct_amplitudes(cooling_params, I)
            r_p, r_s = field_residuals(cooling_params, ss)
            assert max(abs(r_p), abs(r_s)) < 1e-10

    def test_coalescence_at_threshold(self, cooling_params):
        # at sigma^2 = q0 one quadratic root sits at 0 and is excluded
        q = q_coefficients(cooling_params)
        sigma = math.sqrt(q.q0)
        raw = np.roots([q.q2, q.q1, 0.0])
        assert min(abs(raw)) <= 1e-12
        roots = nontrivial_intensities(cooling_params, sigma)
        assert all(I > 1e-12 for I, _ in roots)
        assert len(roots) == 1


class TestSigmaFromIntensity:
    def test_threshold_at_zero_intensity(self, rng):
        for _ in range(10):
            p = random_model_params(rng)
            q = q_coefficients(p)
            assert sigma_from_intensity(p, 0.0) == pytest.approx(math.sqrt(q.q0))

    def test_resonant_inverse(self):
        p = make_params(delta_p=0.0, delta_s=0.0, g=0.0)
        assert sigma_from_intensity(p, 2.0) == pytest.approx(2.0)

    def test_turning_point_drive(self, cooling_params):
        assert sigma_from_intensity(cooling_params, 224.0) ** 2 == pytest.approx(1058.0)

    def test_round_trip(self, rng):
        for _ in range(200):
            p = random_model_params(rng)
            I_s = float(rng.uniform(1e-3, 100.0))
            sigma = sigma_from_intensity(p, I_s)
            roots = nontrivial_intensities(p, sigma)
            assert roots, f"round trip lost the root at {p}"
            best = min(abs(I - I_s) for I, _ in roots)
            assert best <= 1e-9 * max(1.0, I_s)

    def test_negative_intensity_rejected(self, cooling_params):
        with pytest.raises(DomainError):
            sigma_from_intensity(cooling_params, -1.0)


class TestReconstruct:
    def test_resonant_pump_clamping(self):
        p = make_params(delta_p=0.0, delta_s=0.0, g=0.0)
        ss = reconstruct_amplitudes(p, 2.0)
        assert ss.sigma == pytest.approx(2.0)
        assert ss.beta_p == pytest.approx(1.0)   # pump clamps to |beta_p| = 1
        assert ss.phi_s == pytest.approx(0.0, abs=1e-12)
        flipped = reconstruct_amplitudes(p, 2.0, sign=-1)
        assert abs(flipped.phi_s) == pytest.approx(math.pi)

    def test_sign_symmetry(self, rng):
        for _ in range(40):
            p = random_model_params(rng)
            I_s = float(rng.uniform(0.01, 60.0))
            plus = reconstruct_amplitudes(p, I_s, sign=1)
            minus = reconstruct_amplitudes(p, I_s, sign=-1)
            assert minus.beta_s == pytest.approx(-plus.beta_s, rel=1e-12)
            assert minus.beta_p == pytest.approx(plus.beta_p, rel=1e-12)
            assert minus.x_bar == plus.x_bar
            assert minus.I_s == pytest.approx(plus.I_s)

    def test_cooling_regime_residuals(self, cooling_params):
        ss = reconstruct_amplitudes(cooling_params, 100.0)
        r_p, r_s = field_residuals(cooling_params, ss)
        assert max(abs(r_p), abs(r_s)) < 1e-10

    def test_residual_property_randomized(self, rng):
        for _ in range(300):
            p = random_model_params(rng)
            I_s = float(rng.uniform(1e-3, 100.0))
            ss = reconstruct_amplitudes(p, I_s, sign=1 if rng.random() < 0.5 else -1)
            r_p, r_s = field_residuals(p, ss)
            assert max(abs(r_p), abs(r_s)) < 1e-10
            assert ss.p_bar == 0.0
            assert ss.x_bar == pytest.approx(2 * p.g * ss.I_s, rel=1e-12)

    def test_rejects_nonpositive_intensity(self, cooling_params):
        with pytest.raises(DomainError):
            reconstruct_amplitudes(cooling_params, 0.0)


class TestBifurcationGeometry:
    def test_turning_point_cooling_regime(self, cooling_params):
        assert turning_point(cooling_params) == pytest.approx(224.0, rel=1e-12)

    def test_turning_point_absent(self):
        assert turning_point(make_params(g=0.2)) is None
        assert turning_point(make_params(delta_p=0.5, delta_s=0.5, g=0.0)) is None

    def test_bistability_window(self, cooling_params):
        low, high = bistability_window(cooling_params)
        assert low == pytest.approx(1058.0)
        assert high == pytest.approx(2626.0)
        assert bistability_window(make_params(g=0.2)) is None
        assert bistability_window(make_params(delta_p=0.0, delta_s=0.0)) is None

    def test_pitchfork_threshold(self, cooling_params, rng):
        assert pitchfork_threshold(make_params(delta_p=0.0, delta_s=0.0)) == (1.0, 1.0)
        I_p_th, s2_th = pitchfork_threshold(cooling_params)
        assert I_p_th == pytest.approx(101.0)
        assert s2_th == pytest.approx(2626.0)
        for _ in range(20):
            p = random_model_params(rng)
            assert pitchfork_threshold(p)[1] == pytest.approx(
                q_coefficients(p).q0, rel=1e-12)

    def test_branch_tags_straddle_the_fold(self, cooling_params):
        assert reconstruct_amplitudes(cooling_params, 100.0).branch == NONTRIVIAL_LOWER
        assert reconstruct_amplitudes(cooling_params, 250.0).branch == NONTRIVIAL_UPPER


def test_steady_states_near_threshold(cooling_params):
    # just below the pitchfork the trivial and both nontrivial states coexist
    states = steady_states(cooling_params, 51.2)
    assert len(states) == 3
    assert {s.branch for s in states} == {TRIVIAL, NONTRIVIAL_LOWER, NONTRIVIAL_UPPER}

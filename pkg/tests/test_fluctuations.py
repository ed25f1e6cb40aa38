import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import linalg as sla

from dompo import (DomainError, classify, covariance_lyapunov,
                   covariance_montecarlo, covariance_spectral, effective_map,
                   mechanical_state, noise_model, quadrature_map,
                   reconstruct_amplitudes, trivial_solution)
from dompo.fluctuations import _noise_factor, quadrature_drift
from dompo.stability import build_stability_matrix
from dompo.verify import sample_stable_state

from conftest import make_params


def rotation(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


class TestNoiseModel:
    def test_quadrature_diffusion_blocks(self, cooling_params):
        nm = noise_model(cooling_params)
        p = cooling_params
        assert nm.D_r[0, 0] == pytest.approx(0.0, abs=1e-14)
        assert np.allclose(nm.D_r[0, 1:], 0.0, atol=1e-13)  # no position noise
        assert nm.D_r[1, 1] == pytest.approx(4 * p.gamma * p.n_th)
        assert np.allclose(nm.D_r[2:4, 2:4], 2 * p.kappa * np.eye(2), atol=1e-12)
        assert np.allclose(nm.D_r[4:6, 4:6], 2 * np.eye(2), atol=1e-12)

    def test_diffusion_psd_and_symmetric(self, cooling_params):
        nm = noise_model(cooling_params)
        assert np.allclose(nm.D_r, nm.D_r.T, atol=0)
        assert np.min(np.linalg.eigvalsh(nm.D_r)) >= -1e-12

    def test_quadrature_map_invertible(self, cooling_params):
        R = quadrature_map(cooling_params)
        assert np.linalg.cond(R) < 1e6


class TestVacuumAndThermalLimits:
    def test_undriven_covariance(self):
        p = make_params(sigma=0.0, g_dc=1.7, n_th=42.0)
        target = np.diag([2 * p.n_th, 2 * p.n_th, 1, 1, 1, 1])
        for V in (covariance_spectral(p, trivial_solution(p)),
                  covariance_lyapunov(p, trivial_solution(p))):
            assert np.max(np.abs(V - target)) <= 1e-9

    def test_trivial_branch_mechanical_decoupling(self, rng):
        # below threshold the mechanics stays thermal for any coupling
        for g in (0.0, 0.1, 0.3, 0.7):
            p = make_params(g=g, sigma=30.0)
            V = covariance_spectral(p, trivial_solution(p))
            assert np.allclose(V[:2, :2], 2 * p.n_th * np.eye(2), atol=1e-9)
            assert np.max(np.abs(V[:2, 2:])) <= 1e-10
            mech = mechanical_state(V)
            assert mech.n_eff == pytest.approx(p.n_th - 0.5, abs=1e-8)
            assert mech.r_eff == pytest.approx(0.0, abs=1e-8)

    def test_signal_variance_diverges_at_threshold(self):
        p = make_params(g=0.2)
        variances = []
        for frac in (0.5, 0.9, 0.99, 0.999):
            sigma = frac * math.sqrt(2626.0)
            pp = replace(p, sigma=sigma)
            V = covariance_spectral(pp, trivial_solution(pp))
            variances.append(np.max(np.diag(V)[4:]))
        assert variances[0] < variances[1] < variances[2] < variances[3]
        assert variances[3] > 100 * variances[0]


class TestOracleAgreement:
    def test_spectral_vs_lyapunov_randomized(self, rng):
        for _ in range(30):
            p, ss, _ = sample_stable_state(rng)
            Vs = covariance_spectral(p, ss)
            Vl = covariance_lyapunov(p, ss)
            rel = np.linalg.norm(Vs - Vl) / np.linalg.norm(Vl)
            assert rel <= 1e-8

    def test_basis_consistency(self, rng):
        # solving in the complex basis and mapping with R equals solving
        # directly in quadratures
        p, ss, _ = sample_stable_state(rng)
        L = build_stability_matrix(p, ss)
        nm = noise_model(p)
        S = sla.solve_sylvester(L, L.T.copy(), -nm.D_b.astype(complex))
        R = quadrature_map(p)
        V_complex = (R @ ((S + S.T) / 2) @ R.T).real
        V_direct = covariance_lyapunov(p, ss)
        assert np.allclose(V_complex, V_direct, rtol=1e-8,
                           atol=1e-10 * np.max(np.abs(V_direct)))

    def test_g_dc_invariance(self, rng):
        p, ss, _ = sample_stable_state(rng, prefer="nontrivial")
        V1 = covariance_spectral(p, ss)
        p2 = replace(p, g_dc=p.g_dc * 4.5)
        ss2 = reconstruct_amplitudes(p2, ss.I_s)
        V2 = covariance_spectral(p2, ss2)
        assert np.allclose(V1, V2, rtol=1e-10, atol=1e-10)

    def test_unstable_state_rejected(self, cooling_params):
        ss = reconstruct_amplitudes(cooling_params, 100.0)  # lower branch
        with pytest.raises(DomainError):
            covariance_spectral(cooling_params, ss)
        with pytest.raises(DomainError):
            covariance_lyapunov(cooling_params, ss)


class TestMonteCarlo:
    def test_noise_factor_reconstruction(self, cooling_params):
        D_r = noise_model(cooling_params).D_r
        B = _noise_factor(D_r)
        assert B.shape[1] == 5  # mechanical position column dropped
        assert np.max(np.abs(B @ B.T - D_r)) <= 1e-12 * max(1.0, np.max(np.abs(D_r)))

    def test_matches_spectral_within_errors(self, rng):
        p, ss, report = sample_stable_state(rng, min_margin=0.3, max_rho=6.0)
        Vref = covariance_spectral(p, ss)
        rho = float(np.max(np.abs(report.eigenvalues)))
        V, err = covariance_montecarlo(p, ss, n_traj=1024, dt=0.002 / rho,
                                       tau_end=max(10 / abs(report.margin), 20.0),
                                       seed=7)
        z = np.abs(V - Vref) / err
        assert float(z.max()) <= 3.5

    def test_deterministic_given_seed(self, rng):
        p, ss, _ = sample_stable_state(rng, min_margin=0.3, max_rho=6.0)
        a = covariance_montecarlo(p, ss, n_traj=128, seed=5)
        b = covariance_montecarlo(p, ss, n_traj=128, seed=5)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_zero_noise_override(self, rng):
        p, ss, _ = sample_stable_state(rng, min_margin=0.3, max_rho=6.0)
        V, _ = covariance_montecarlo(p, ss, n_traj=64, seed=1,
                                     d_r_override=np.zeros((6, 6)))
        assert np.max(np.abs(V)) == 0.0

    def test_step_preconditions(self, rng):
        p, ss, report = sample_stable_state(rng, min_margin=0.3, max_rho=6.0)
        with pytest.raises(DomainError):
            covariance_montecarlo(p, ss, n_traj=16, dt=1.0)
        with pytest.raises(DomainError):
            covariance_montecarlo(p, ss, n_traj=16, tau_end=1.0 / abs(report.margin))


class TestMechanicalState:
    def test_vacuum_block(self):
        m = mechanical_state(np.eye(2))
        assert m.n_eff == 0.0 and m.r_eff == pytest.approx(0.0) and not m.clamped

    def test_squeezed_block(self):
        m = mechanical_state(np.diag([1.0, 4.0]))
        assert m.n_eff == pytest.approx(0.5)
        assert m.squeeze_factor == pytest.approx(0.5)
        assert m.theta == pytest.approx(0.0)

    def test_thermal_block(self):
        m = mechanical_state(2 * 100.0 * np.eye(2))
        assert m.n_eff == pytest.approx(99.5)
        assert m.r_eff == pytest.approx(0.0)

    def test_rotation_recovery_and_invariance(self, rng):
        for _ in range(40):
            v_minus = float(rng.uniform(0.5, 5.0))
            v_plus = v_minus + float(rng.uniform(0.2, 10.0))
            theta = float(rng.uniform(-math.pi / 2 + 1e-3, math.pi / 2 - 1e-3))
            Q = rotation(theta)
            Vm = Q.T @ np.diag([v_minus, v_plus]) @ Q
            m = mechanical_state(Vm, warn_unphysical=False)
            assert m.theta == pytest.approx(theta, abs=1e-9)
            assert np.allclose(rotation(m.theta) @ Vm @ rotation(m.theta).T,
                               np.diag([v_minus, v_plus]), atol=1e-9)
            # n and r do not depend on the orientation
            base = mechanical_state(np.diag([v_minus, v_plus]),
                                    warn_unphysical=False)
            assert m.n_eff == pytest.approx(base.n_eff, rel=1e-12)
            assert m.r_eff == pytest.approx(base.r_eff, rel=1e-12)

    def test_below_vacuum_floor_clamped(self):
        with pytest.warns(UserWarning, match="vacuum floor"):
            m = mechanical_state(0.25 * np.eye(2))
        assert m.clamped and m.n_eff == 0.0

    def test_rejects_indefinite_block(self):
        with pytest.raises(DomainError):
            mechanical_state(np.array([[1.0, 2.0], [2.0, 1.0]]))


class TestEffectiveMap:
    def test_unstable_cells_match_classification(self, cooling_params):
        cells = effective_map(cooling_params, "g", [0.25],
                              [50.0, 100.0, 250.0, 360.0])
        by_I = {c.I_s: c for c in cells}
        assert not by_I[50.0].stable and by_I[50.0].instability == "static-unstable"
        assert not by_I[100.0].stable
        assert by_I[250.0].stable and by_I[250.0].n_eff is not None
        assert not by_I[360.0].stable   # beyond the Hopf point
        assert by_I[360.0].instability == "dynamic-unstable"

    def test_decoupling_column_at_zero_coupling(self, cooling_params):
        cells = effective_map(cooling_params, "g", [0.0], [10.0, 100.0, 250.0])
        for c in cells:
            assert c.stable
            assert c.n_eff == pytest.approx(cooling_params.n_th - 0.5, rel=1e-2)
            assert c.squeeze_factor == pytest.approx(1.0, rel=1e-6)

    def test_rejects_bad_axis(self, cooling_params):
        with pytest.raises(DomainError):
            effective_map(cooling_params, "I_s", [1.0], [1.0])

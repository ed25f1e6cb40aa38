import json

import numpy as np
import pytest

from dompo import (MODEL_KEYS, ModelParams, PhysicalParams, Tolerances,
                   ValidationError, load_params, normalize, params_from_dict,
                   params_to_dict, thermal_occupation, validate)

from conftest import make_params


def phys(**overrides):
    values = dict(chi=1.0, drive_EL=1.0, gamma_p=1.0, gamma_s=1.0,
                  gamma_m=1.0, Omega_m=1.0, Delta_p=0.0, Delta_s=0.0,
                  g_s=1.0, n_th=100.0)
    values.update(overrides)
    return PhysicalParams(**values)


def test_normalize_all_unity_fixed_point():
    p = normalize(phys())
    assert p.kappa == p.gamma == p.Omega == p.g_dc == p.sigma == p.g == 1.0
    assert p.delta_p == p.delta_s == 0.0


def test_normalize_sideband_regime_detunings():
    # gamma_p = 100 gamma_s with Delta_p = 5 gamma_p and Delta_s = -10 gamma_s
    p = normalize(phys(gamma_p=100.0, Delta_p=500.0, Delta_s=-10.0))
    assert p.kappa == pytest.approx(100.0)
    assert p.delta_p == pytest.approx(5.0)
    assert p.delta_s == pytest.approx(-10.0)


def test_normalize_drive_and_noise_scale():
    p = normalize(phys(chi=2.0, gamma_p=4.0, gamma_s=1.0, drive_EL=3.0))
    assert p.g_dc == pytest.approx(1.0)
    assert p.sigma == pytest.approx(1.5)


def test_normalize_scale_covariance(rng):
    base = dict(chi=0.7, drive_EL=2.2, gamma_p=3.0, gamma_s=0.5, gamma_m=0.01,
                Omega_m=4.0, Delta_p=1.5, Delta_s=-2.0, g_s=0.3, n_th=50.0)
    p0 = normalize(PhysicalParams(**base))
    for _ in range(20):
        c = float(rng.uniform(0.1, 50.0))
        scaled = {k: (v * c if k != "n_th" else v) for k, v in base.items()}
        p1 = normalize(PhysicalParams(**scaled))
        for key in MODEL_KEYS:
            assert getattr(p1, key) == pytest.approx(getattr(p0, key), rel=1e-12)


def test_physical_validation_errors():
    with pytest.raises(ValidationError):
        phys(gamma_s=0.0)
    with pytest.raises(ValidationError):
        phys(chi=-1.0)
    with pytest.raises(ValidationError):
        phys(drive_EL=-0.1)
    with pytest.raises(ValidationError):
        phys(n_th=0.5)
    with pytest.warns(UserWarning):
        phys(n_th=2.0)


def test_model_validation_errors():
    with pytest.raises(ValidationError):
        make_params(kappa=0.0)
    with pytest.raises(ValidationError):
        make_params(g=-0.1)
    with pytest.raises(ValidationError):
        make_params(sigma=-1.0)
    with pytest.raises(ValidationError):
        Tolerances(residual=0.0)


def test_validate_warnings():
    assert validate(make_params(n_th=100.0, gamma=0.005, Omega=10.0)) == []
    notes = validate(make_params(n_th=2.0))
    assert len(notes) == 1 and "n_th" in notes[0]
    notes = validate(make_params(gamma=20.0, Omega=10.0))
    assert len(notes) == 1 and "sideband" in notes[0]


def test_thermal_occupation_room_temperature():
    # k_B * 300 K / (hbar * 2 pi MHz), computed from the CODATA constants
    n = thermal_occupation(300.0, 2 * np.pi * 1e6)
    assert n == pytest.approx(6.2509e6, rel=1e-3)


def test_json_round_trip(tmp_path):
    p = make_params(g=0.17)
    path = tmp_path / "params.json"
    path.write_text(json.dumps(params_to_dict(p)))
    assert load_params(path) == p


def test_unknown_and_missing_keys_rejected():
    good = params_to_dict(make_params())
    with pytest.raises(ValidationError, match="unknown"):
        params_from_dict({**good, "extra": 1.0})
    bad = dict(good)
    del bad["sigma"]
    with pytest.raises(ValidationError, match="missing"):
        params_from_dict(bad)
    with pytest.raises(ValidationError, match="number"):
        params_from_dict({**good, "sigma": "big"})


def test_malformed_json_rejected(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ValidationError, match="malformed"):
        load_params(path)

import numpy as np
import pytest

from dompo import ModelParams


def make_params(**overrides) -> ModelParams:
    """Sideband-cooling regime parameters used throughout the suite."""
    values = dict(kappa=100.0, gamma=0.005, Omega=10.0, delta_p=5.0,
                  delta_s=-10.0, g=0.25, g_dc=1.0, n_th=100.0, sigma=0.0)
    values.update(overrides)
    return ModelParams(**values)


@pytest.fixture
def cooling_params() -> ModelParams:
    return make_params()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)


def random_model_params(rng, sigma=0.0, g_max=0.5) -> ModelParams:
    """Broad random parameter draw for algebraic property tests."""
    return ModelParams(
        kappa=float(rng.uniform(0.1, 100.0)),
        gamma=float(rng.uniform(1e-3, 5.0)),
        Omega=float(rng.uniform(0.1, 30.0)),
        delta_p=float(rng.uniform(-20.0, 20.0)),
        delta_s=float(rng.uniform(-20.0, 20.0)),
        g=float(rng.uniform(0.0, g_max)),
        g_dc=float(rng.uniform(0.2, 4.0)),
        n_th=float(rng.uniform(1.0, 500.0)),
        sigma=sigma,
    )

"""Parameter sets and normalization for the driven pump/signal/mechanics model.

Conventions used throughout the package:

* Time is measured in units of the signal-mode lifetime, tau = gamma_s * t.
* Optical quadratures are x_j = a_j^dag + a_j and p_j = i(a_j^dag - a_j),
  so [x, p] = 2i and the vacuum variance is 1.
* Every matrix-valued quantity in the physical quadrature basis uses the
  fixed ordering (x_m, p_m, x_p, p_p, x_s, p_s).
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, fields

from scipy import constants

from .errors import ValidationError

#: Fixed quadrature ordering (mechanics, pump, signal).
QUADRATURES = ("x_m", "p_m", "x_p", "p_p", "x_s", "p_s")

#: Keys of the dimensionless parameter set, as accepted in JSON files.
MODEL_KEYS = ("kappa", "gamma", "Omega", "delta_p", "delta_s",
              "g", "g_dc", "n_th", "sigma")


def thermal_occupation(temperature: float, Omega_m: float) -> float:
    """Mean bath phonon number k_B T / (hbar Omega_m) for a mode at Omega_m (rad/s)."""
    if temperature < 0 or Omega_m <= 0:
        raise ValidationError("temperature must be >= 0 and Omega_m > 0")
    return constants.k * temperature / (constants.hbar * Omega_m)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional system rates, all in 1/s except the dimensionless n_th.

    chi        down-conversion rate
    drive_EL   pump drive amplitude (proportional to sqrt of laser power)
    gamma_p/s  pump and signal cavity decay rates
    gamma_m    mechanical damping rate
    Omega_m    mechanical frequency
    Delta_p/s  laser detunings from the pump and signal resonances
    g_s        single-photon optomechanical rate
    n_th       bath phonon occupation (use ``thermal_occupation`` for kelvin input)
    """

    chi: float
    drive_EL: float
    gamma_p: float
    gamma_s: float
    gamma_m: float
    Omega_m: float
    Delta_p: float
    Delta_s: float
    g_s: float
    n_th: float

    def __post_init__(self):
        for name in ("chi", "gamma_p", "gamma_s", "gamma_m", "Omega_m", "g_s"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be strictly positive")
        if self.drive_EL < 0:
            raise ValidationError("drive_EL must be non-negative")
        if self.n_th < 1:
            raise ValidationError("n_th must be >= 1 (high-temperature model)")
        if self.n_th < 10:
            warnings.warn("n_th < 10: the momentum-only thermal noise model "
                          "assumes n_th >> 1", stacklevel=2)


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameter set; time unit is 1/gamma_s.

    kappa    pump/signal linewidth ratio
    gamma    mechanical damping over gamma_s
    Omega    mechanical frequency over gamma_s
    delta_p  pump detuning over gamma_p
    delta_s  signal detuning over gamma_s
    g        optomechanical coupling relative to down-conversion
    g_dc     down-conversion noise scale (covariances are independent of it)
    n_th     bath phonon occupation
    sigma    drive strength (threshold sits at sigma^2 = (1+delta_p^2)(1+delta_s^2))
    """

    kappa: float
    gamma: float
    Omega: float
    delta_p: float
    delta_s: float
    g: float
    g_dc: float
    n_th: float
    sigma: float

    def __post_init__(self):
        for name in ("kappa", "gamma", "Omega", "g_dc"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be strictly positive")
        if self.g < 0:
            raise ValidationError("g must be non-negative")
        if self.sigma < 0:
            raise ValidationError("sigma must be non-negative")
        if self.n_th < 0:
            raise ValidationError("n_th must be non-negative")


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by the analysis routines.

    eig_zero is relative: a real part is treated as zero when its magnitude
    falls below ``eig_zero * max(spectral radius, 1)``.
    """

    eig_zero: float = 1e-9
    residual: float = 1e-10
    root_tol: float = 1e-12

    def __post_init__(self):
        for name in ("eig_zero", "residual", "root_tol"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be strictly positive")

    def eig_zero_abs(self, spectral_radius: float) -> float:
        return self.eig_zero * max(abs(spectral_radius), 1.0)


DEFAULT_TOL = Tolerances()


def normalize(phys: PhysicalParams) -> ModelParams:
    """Map dimensional rates to the dimensionless parameter set."""
    g_dc = phys.chi / (phys.gamma_p * phys.gamma_s) ** 0.5
    Omega = phys.Omega_m / phys.gamma_s
    return ModelParams(
        kappa=phys.gamma_p / phys.gamma_s,
        gamma=phys.gamma_m / phys.gamma_s,
        Omega=Omega,
        delta_p=phys.Delta_p / phys.gamma_p,
        delta_s=phys.Delta_s / phys.gamma_s,
        g=(phys.g_s / phys.gamma_s) / (g_dc * Omega ** 0.5),
        g_dc=g_dc,
        n_th=phys.n_th,
        sigma=phys.chi * phys.drive_EL / (phys.gamma_p * phys.gamma_s),
    )


def validate(params: ModelParams) -> list[str]:
    """Return advisory warnings for parameter regimes outside the model assumptions."""
    notes = []
    if params.n_th < 10:
        notes.append(
            f"n_th = {params.n_th:g} is below 10; the thermal noise model "
            "assumes n_th >> 1")
    if params.gamma >= params.Omega:
        notes.append(
            f"gamma = {params.gamma:g} >= Omega = {params.Omega:g}; the "
            "resolved-sideband assumption is violated")
    return notes


def params_from_dict(data: dict) -> ModelParams:
    """Build ModelParams from a flat mapping with exactly the nine known keys."""
    unknown = set(data) - set(MODEL_KEYS)
    if unknown:
        raise ValidationError(f"unknown parameter keys: {sorted(unknown)}")
    missing = set(MODEL_KEYS) - set(data)
    if missing:
        raise ValidationError(f"missing parameter keys: {sorted(missing)}")
    values = {}
    for key in MODEL_KEYS:
        value = data[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"parameter {key} must be a number, got {value!r}")
        values[key] = float(value)
    return ModelParams(**values)


def params_to_dict(params: ModelParams) -> dict:
    return {f.name: getattr(params, f.name) for f in fields(params)}


def load_params(path) -> ModelParams:
    """Read a JSON parameter file (flat object with the nine normalized keys)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    return params_from_dict(data)

"""Single-mode optomechanical reference system (standard sideband cooling).

A laser-driven cavity coupled to the same mechanical oscillator, with the
pump and down-conversion removed:

    dx/dtau      = Omega^2 p
    dp/dtau      = -gamma p - x + 2 g |beta_s|^2
    dbeta_s/dtau = E - (1 - i delta_s - i g x) beta_s

The 4x4 covariance machinery mirrors the three-mode case (mechanics plus
signal noise only) so the two systems can be compared cell by cell.  All
results are independent of g_dc; it only enters the shared normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg as sla

from .errors import DomainError
from .fluctuations import MapCell, MechanicalState, _as_real, _pair_block, mechanical_state
from .params import DEFAULT_TOL, ModelParams, Tolerances
from .stability import STABLE, StabilityReport, _classify_spectrum
from .steady import NONTRIVIAL_UPPER

SIDEBAND_BRANCH = NONTRIVIAL_UPPER  # single-valued in I_s, no fold to tag


@dataclass(frozen=True)
class SidebandSteadyState:
    """Fixed point of the driven single-mode system, parameterized by I_s.

    delta_eff is the detuning shifted by the static mirror displacement.
    """

    x_bar: float
    beta_s: complex
    E: float
    I_s: float
    delta_eff: float


def sideband_steady_state(params: ModelParams, I_s: float) -> SidebandSteadyState:
    """Fixed point with signal intensity I_s; the drive E follows uniquely.

    Parameterizing by I_s avoids the multivaluedness of the inverse map
    (optomechanical bistability in E).
    """
    if I_s < 0:
        raise DomainError("I_s must be non-negative")
    x_bar = 2 * params.g * I_s
    delta_eff = params.delta_s + params.g * x_bar
    E = math.sqrt(I_s * (1 + delta_eff ** 2))
    beta_s = E / (1 - 1j * delta_eff)
    return SidebandSteadyState(x_bar=x_bar, beta_s=beta_s, E=E, I_s=I_s,
                               delta_eff=delta_eff)


def sideband_drift_residual(params: ModelParams, ss: SidebandSteadyState) -> complex:
    """Residual of the optical drift equation at the fixed point."""
    return ss.E - (1 - 1j * params.delta_s - 1j * params.g * ss.x_bar) * ss.beta_s


def build_sideband_matrix(params: ModelParams, ss: SidebandSteadyState) -> np.ndarray:
    """4x4 stability matrix in the basis (x, p, beta_s, beta_s*)."""
    g, gam, Om, ds = params.g, params.gamma, params.Omega, params.delta_s
    bs, xb = ss.beta_s, ss.x_bar
    L = np.zeros((4, 4), dtype=complex)
    L[0, 1] = Om * Om
    L[1, 0] = -1.0
    L[1, 1] = -gam
    L[1, 2] = 2 * g * np.conj(bs)
    L[1, 3] = 2 * g * bs
    L[2, 0] = 1j * g * bs
    L[2, 2] = -(1 - 1j * ds - 1j * g * xb)
    L[3, 0] = -1j * g * np.conj(bs)
    L[3, 3] = -(1 + 1j * ds + 1j * g * xb)
    return L


def sideband_stability(params: ModelParams, ss: SidebandSteadyState,
                       tol: Tolerances = DEFAULT_TOL) -> StabilityReport:
    """Spectrum and classification of the 4x4 stability matrix."""
    eigvals = np.linalg.eigvals(build_sideband_matrix(params, ss))
    return _classify_spectrum(eigvals, tol)


def _sideband_quadrature_map(params: ModelParams) -> np.ndarray:
    R = np.zeros((4, 4), dtype=complex)
    R[0, 0] = 1.0 / (params.g_dc * math.sqrt(params.Omega))
    R[1, 1] = math.sqrt(params.Omega) / params.g_dc
    R[2:4, 2:4] = _pair_block(params.g_dc)
    return R


def sideband_noise(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """(M, D_r) noise matrices: mechanical and signal blocks, no pump."""
    M = np.zeros((4, 4))
    M[1, 1] = 2 * params.gamma * params.n_th / params.Omega
    M[2, 3] = 1.0
    D_b = params.g_dc ** 2 * (M + M.T)
    R = _sideband_quadrature_map(params)
    return M, _as_real(R @ D_b @ R.T, "sideband diffusion matrix")


def sideband_covariance(params: ModelParams, ss: SidebandSteadyState,
                        tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """4x4 covariance (x_m, p_m, x_s, p_s) via the Lyapunov equation."""
    report = sideband_stability(params, ss, tol)
    if report.classification != STABLE:
        raise DomainError(
            f"covariance is defined only for stable states; got "
            f"{report.classification} with margin {report.margin:.3e}")
    L = build_sideband_matrix(params, ss)
    R = _sideband_quadrature_map(params)
    A = _as_real(np.linalg.solve(R.T, (R @ L).T).T, "sideband drift matrix")
    _, D_r = sideband_noise(params)
    V = sla.solve_continuous_lyapunov(A, -D_r)
    return (V + V.T) / 2


def sideband_mechanical_state(params: ModelParams, I_s: float,
                              tol: Tolerances = DEFAULT_TOL) -> MechanicalState:
    """Effective mechanical state of the stable sideband system at I_s."""
    ss = sideband_steady_state(params, I_s)
    V = sideband_covariance(params, ss, tol)
    return mechanical_state(V, warn_unphysical=False)


def sideband_map(params: ModelParams, axis_name: str, axis_values,
                 I_s_values, tol: Tolerances = DEFAULT_TOL) -> list[MapCell]:
    """Cell-by-cell effective-state map with the same schema as the DOMPO map."""
    if axis_name in ("I_s", "kappa", "delta_p"):
        raise DomainError(f"axis {axis_name} is not meaningful for the sideband system")
    cells: list[MapCell] = []
    for v in axis_values:
        p = replace(params, **{axis_name: float(v)})
        for I_s in I_s_values:
            ss = sideband_steady_state(p, float(I_s))
            report = sideband_stability(p, ss, tol)
            if report.classification != STABLE:
                cells.append(MapCell(
                    axis_value=float(v), I_s=float(I_s), sigma=ss.E,
                    branch=SIDEBAND_BRANCH, stable=False,
                    instability=report.classification, n_eff=None,
                    squeeze_factor=None, theta=None, margin=report.margin))
                continue
            mech = mechanical_state(sideband_covariance(p, ss, tol),
                                    warn_unphysical=False)
            cells.append(MapCell(
                axis_value=float(v), I_s=float(I_s), sigma=ss.E,
                branch=SIDEBAND_BRANCH, stable=True, instability="",
                n_eff=mech.n_eff, squeeze_factor=mech.squeeze_factor,
                theta=mech.theta, margin=report.margin))
    return cells

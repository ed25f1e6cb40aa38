"""Linearized quantum fluctuations around a stable classical fixed point.

The linearized Langevin system reads d(db)/dtau = L db + sqrt(2) g_dc f(tau)
with delta-correlated input noise <f_j(tau) f_l(tau')> = M_jl delta(tau-tau').
Three independent routes to the steady-state covariance matrix in physical
quadratures (x_m, p_m, x_p, p_p, x_s, p_s) are implemented:

* a spectral formula built from the left eigensystem of L,
* a continuous Lyapunov solve in the quadrature basis,
* an Euler-Maruyama ensemble average.

Two deliberate deviations from the bare noise bookkeeping are applied, both
pinned by the requirement that an undriven cavity relax to exact vacuum
(quadrature variance 1): the pump noise weight enters as kappa^2 because the
pump rows of L carry an overall kappa, and the symmetrized correlation matrix
(C + C^T) is halved.  The momentum-only high-temperature mechanical noise
leaves the undriven mechanical variance at 2 n_th (no vacuum offset).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg as sla

from .errors import ConsistencyError, DefectiveMatrixError, DomainError
from .params import DEFAULT_TOL, ModelParams, Tolerances
from .stability import STABLE, build_stability_matrix, classify
from .steady import SteadyState, reconstruct_amplitudes, trivial_solution

MAP_AXES = ("kappa", "gamma", "Omega", "delta_p", "delta_s", "g", "n_th", "I_s")


def _pair_block(scale: float) -> np.ndarray:
    return np.array([[1.0, 1.0], [-1j, 1j]]) / scale


def quadrature_map(params: ModelParams) -> np.ndarray:
    """Block transformation R with r = R b mapping the complex basis to quadratures."""
    g_dc, Om, kap = params.g_dc, params.Omega, params.kappa
    R = np.zeros((6, 6), dtype=complex)
    R[0, 0] = 1.0 / (g_dc * math.sqrt(Om))
    R[1, 1] = math.sqrt(Om) / g_dc
    R[2:4, 2:4] = _pair_block(g_dc * math.sqrt(kap))
    R[4:6, 4:6] = _pair_block(g_dc)
    return R


@dataclass(frozen=True)
class NoiseModel:
    """Input noise correlations and the derived diffusion matrices.

    M    two-time correlator weights in the complex basis
    D_b  symmetrized diffusion g_dc^2 (M + M^T) in the complex basis
    D_r  diffusion in physical quadratures, R D_b R^T (real PSD)
    """

    M: np.ndarray
    D_b: np.ndarray
    D_r: np.ndarray


def _as_real(A: np.ndarray, what: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(A))))
    if float(np.max(np.abs(A.imag))) > 1e-10 * scale:
        raise ConsistencyError(f"{what} has a complex residue")
    return A.real.copy()


def noise_model(params: ModelParams) -> NoiseModel:
    """Assemble the noise matrices for the three-mode system."""
    M = np.zeros((6, 6))
    M[1, 1] = 2 * params.gamma * params.n_th / params.Omega
    M[2, 3] = params.kappa ** 2  # kappa^2, not kappa: undriven pump must relax to vacuum
    M[4, 5] = 1.0
    D_b = params.g_dc ** 2 * (M + M.T)
    R = quadrature_map(params)
    D_r = _as_real(R @ D_b @ R.T, "quadrature diffusion matrix")
    return NoiseModel(M=M, D_b=D_b, D_r=D_r)


def quadrature_drift(params: ModelParams, ss: SteadyState) -> np.ndarray:
    """Drift matrix A = R L R^{-1} in the physical quadrature basis (real)."""
    L = build_stability_matrix(params, ss)
    R = quadrature_map(params)
    A = np.linalg.solve(R.T, (R @ L).T).T
    return _as_real(A, "quadrature drift matrix")


def _require_stable(params: ModelParams, ss: SteadyState, tol: Tolerances):
    report = classify(params, ss, tol)
    if report.classification != STABLE:
        raise DomainError(
            f"covariance is defined only for stable states; got "
            f"{report.classification} with margin {report.margin:.3e}")
    return report


def covariance_spectral(params: ModelParams, ss: SteadyState,
                        tol: Tolerances = DEFAULT_TOL,
                        _sym_factor: float = 0.5) -> np.ndarray:
    """Steady-state covariance from the left eigensystem of the drift matrix.

    With W L = Lambda W and C_jl = -2 g_dc^2 (W M W^T)_jl / (lambda_j +
    lambda_l), the covariance is V = 1/2 R W^{-1} (C + C^T) W^{-T} R^T.
    ``_sym_factor`` exists only so the verification command can demonstrate
    that the vacuum check pins the 1/2.
    """
    report = _require_stable(params, ss, tol)
    L = build_stability_matrix(params, ss)
    eigvals, vecs = np.linalg.eig(L.T)
    W = vecs.T  # rows are left eigenvectors of L
    cond = np.linalg.cond(W)
    if not np.isfinite(cond) or cond > 1e10:
        raise DefectiveMatrixError(
            f"left eigenvector matrix condition {cond:.2e}; the drift matrix is "
            "too close to defective, use covariance_lyapunov instead")
    denom = eigvals[:, None] + eigvals[None, :]
    zero = tol.eig_zero_abs(float(np.max(np.abs(eigvals))))
    if np.min(np.abs(denom)) < zero:
        raise DomainError("eigenvalue pair sums vanish; state is marginal")
    M = noise_model(params).M
    C = -2 * params.g_dc ** 2 * (W @ M @ W.T) / denom
    S = np.linalg.solve(W, np.linalg.solve(W, (C + C.T).T).T)
    R = quadrature_map(params)
    V = _as_real(_sym_factor * R @ S @ R.T, "covariance matrix")
    return (V + V.T) / 2


def covariance_lyapunov(params: ModelParams, ss: SteadyState,
                        tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Steady-state covariance from A V + V A^T + D_r = 0 (independent oracle)."""
    _require_stable(params, ss, tol)
    A = quadrature_drift(params, ss)
    D_r = noise_model(params).D_r
    V = sla.solve_continuous_lyapunov(A, -D_r)
    return (V + V.T) / 2


def _noise_factor(D_r: np.ndarray) -> np.ndarray:
    """Symmetric-eigendecomposition square root with tiny negatives clipped.

    Columns belonging to numerically zero eigenvalues are dropped (the
    mechanical position carries no noise), so B is 6 x rank(D_r).
    """
    w, Q = np.linalg.eigh(D_r)
    lim = 1e-12 * max(1.0, float(np.max(np.abs(w))))
    if float(np.min(w)) < -lim:
        raise ConsistencyError("quadrature diffusion matrix is not PSD")
    w = np.clip(w, 0.0, None)
    keep = w > lim
    if not np.any(keep):
        return np.zeros((D_r.shape[0], 1))
    return Q[:, keep] * np.sqrt(w[keep])


def _batch_count(n_traj: int, target: int = 64) -> int:
    for nb in range(min(target, n_traj), 0, -1):
        if n_traj % nb == 0:
            return nb
    return 1


def covariance_montecarlo(params: ModelParams, ss: SteadyState,
                          n_traj: int = 1024, tau_end: float | None = None,
                          dt: float | None = None, seed: int = 0,
                          d_r_override: np.ndarray | None = None,
                          tol: Tolerances = DEFAULT_TOL
                          ) -> tuple[np.ndarray, np.ndarray]:
    """Euler-Maruyama estimate of the covariance with a standard-error matrix.

    Integrates the chain X_{k+1} = X_k (I + A dt) + W_k sqrt(dt) B^T with
    B B^T = D_r and one deterministic PCG64 stream per trajectory (spawned
    from ``seed``).  For speed the recursion is evaluated in blocks of 16
    steps with precomputed propagators, which is the same chain in exact
    arithmetic; second moments are time-averaged over the block-end samples
    after discarding the first half, then ensemble-averaged.  Standard
    errors are batch means over disjoint groups of whole trajectories.

    Preconditions: dt <= 0.05 / max|eigenvalue| and tau_end >= 10 / |margin|.
    """
    report = _require_stable(params, ss, tol)
    A = quadrature_drift(params, ss)
    eigvals = np.linalg.eigvals(A)
    fastest = float(np.max(np.abs(eigvals)))
    dt_max = 0.05 / fastest
    if dt is None:
        dt = min(dt_max, 0.01 / fastest)
    if dt > dt_max * (1 + 1e-12) or dt <= 0:
        raise DomainError(f"dt must lie in (0, {dt_max:.3e}] for this state")
    tau_min = 10.0 / abs(report.margin)
    if tau_end is None:
        tau_end = tau_min
    if tau_end < tau_min * (1 - 1e-12):
        raise DomainError(f"tau_end must be at least {tau_min:.3e} for this state")

    D_r = noise_model(params).D_r if d_r_override is None else np.asarray(d_r_override, float)
    B = _noise_factor(D_r)
    n_noise = B.shape[1]
    stride = 16
    n_blocks = max(2, int(math.ceil(tau_end / dt / stride)))
    discard = n_blocks // 2
    kept = n_blocks - discard

    # one-step row propagator and the noise-to-state maps over one block:
    # X_{t+s} = X_t F^s + sum_j W_j (sqrt(dt) B^T F^{s-1-j})
    F = np.eye(6) + A.T * dt
    gains = np.empty((stride, n_noise, 6))
    gains[stride - 1] = B.T * math.sqrt(dt)
    for j in range(stride - 2, -1, -1):
        gains[j] = gains[j + 1] @ F
    gain_flat = gains.reshape(stride * n_noise, 6)
    F_block = np.linalg.matrix_power(F, stride)

    n_batches = _batch_count(n_traj)
    per_batch = n_traj // n_batches
    streams = [np.random.default_rng(c)
               for c in np.random.SeedSequence(seed).spawn(n_traj)]

    X = np.zeros((n_traj, 6))
    moments = np.zeros((n_batches, 6, 6))
    # large chunks amortize the per-draw RNG overhead; buffer stays near 100 MB
    blocks_per_chunk = int(np.clip(2 ** 24 // (stride * n_noise * n_traj), 1, 256))
    block = 0
    while block < n_blocks:
        size = min(blocks_per_chunk, n_blocks - block)
        noise = np.stack([g.standard_normal((size, stride * n_noise))
                          for g in streams])
        for k in range(size):
            X = X @ F_block + noise[:, k, :] @ gain_flat
            block += 1
            if block > discard:
                Xb = X.reshape(n_batches, per_batch, 6)
                moments += np.einsum("bnj,bnk->bjk", Xb, Xb)
    batch_means = moments / (kept * per_batch)
    V = batch_means.mean(axis=0)
    if n_batches > 1:
        stderr = batch_means.std(axis=0, ddof=1) / math.sqrt(n_batches)
    else:
        stderr = np.full((6, 6), np.inf)
    return (V + V.T) / 2, stderr


@dataclass(frozen=True)
class MechanicalState:
    """Squeezed-thermal decomposition of the reduced mechanical Gaussian state.

    n_eff is the effective phonon number, r_eff >= 0 the squeezing parameter
    and theta in (-pi/2, pi/2] the phase-space angle along which squeezing
    occurs.  ``clamped`` flags covariances below the vacuum floor, which the
    high-temperature noise model can produce; n_eff is then pinned at 0.
    """

    n_eff: float
    r_eff: float
    theta: float
    clamped: bool = False

    @property
    def squeeze_factor(self) -> float:
        return math.exp(-2 * self.r_eff)


def mechanical_state(V: np.ndarray, warn_unphysical: bool = True) -> MechanicalState:
    """Reduce a covariance matrix to (n_eff, r_eff, theta).

    ``V`` may be the full covariance of any system whose first two rows are
    the mechanical quadratures; only the 2x2 mechanical block is used.  With
    eigenvalues V- <= V+ of that block, n_eff = (sqrt(V+ V-) - 1)/2 and
    exp(-2 r_eff) = sqrt(V-/V+); theta rotates the block to diag(V-, V+).
    """
    Vm = np.asarray(V, dtype=float)[:2, :2]
    Vm = (Vm + Vm.T) / 2
    a, b, c = Vm[0, 0], Vm[1, 1], Vm[0, 1]
    tr, det = a + b, a * b - c * c
    if tr <= 0 or det <= 0:
        raise DomainError("mechanical covariance block must be positive definite")
    gap = math.sqrt(max(tr * tr / 4 - det, 0.0))
    v_minus, v_plus = tr / 2 - gap, tr / 2 + gap
    product = v_plus * v_minus
    clamped = False
    if product < 1.0:
        if product < 1.0 - 1e-12:
            clamped = True
            if warn_unphysical:
                warnings.warn(
                    f"V+ V- = {product:.6g} < 1: below the vacuum floor of the "
                    "high-temperature noise model; n_eff clamped to 0",
                    stacklevel=2)
        n_eff = 0.0
    else:
        n_eff = (math.sqrt(product) - 1) / 2
    r_eff = 0.25 * math.log(v_plus / v_minus) if v_minus > 0 else math.inf

    theta = 0.5 * math.atan2(2 * c, a - b)
    co, si = math.cos(theta), math.sin(theta)
    first = co * co * a + 2 * co * si * c + si * si * b
    if first > tr / 2:  # candidate angle put V+ first; shift to the other diagonalizer
        theta += math.pi / 2
    theta = math.remainder(theta, math.pi)
    if theta <= -math.pi / 2:
        theta += math.pi
    return MechanicalState(n_eff=n_eff, r_eff=r_eff, theta=theta, clamped=clamped)


@dataclass(frozen=True)
class MapCell:
    """One cell of an effective-state map."""

    axis_value: float
    I_s: float
    sigma: float
    branch: str
    stable: bool
    instability: str
    n_eff: float | None
    squeeze_factor: float | None
    theta: float | None
    margin: float


def _dompo_cell(params: ModelParams, I_s: float, tol: Tolerances) -> MapCell:
    if I_s <= 0:
        ss = trivial_solution(params)
    else:
        ss = reconstruct_amplitudes(params, I_s, 1, tol)
    report = classify(params, ss, tol)
    if report.classification != STABLE:
        return MapCell(axis_value=math.nan, I_s=I_s, sigma=ss.sigma,
                       branch=ss.branch, stable=False,
                       instability=report.classification,
                       n_eff=None, squeeze_factor=None, theta=None,
                       margin=report.margin)
    try:
        V = covariance_spectral(params, ss, tol)
    except DefectiveMatrixError:
        V = covariance_lyapunov(params, ss, tol)
    mech = mechanical_state(V, warn_unphysical=False)
    return MapCell(axis_value=math.nan, I_s=I_s, sigma=ss.sigma,
                   branch=ss.branch, stable=True, instability="",
                   n_eff=mech.n_eff, squeeze_factor=mech.squeeze_factor,
                   theta=mech.theta, margin=report.margin)


def effective_map(params: ModelParams, axis_name: str, axis_values,
                  I_s_values, tol: Tolerances = DEFAULT_TOL) -> list[MapCell]:
    """Effective mechanical state over a (parameter, I_s) grid.

    ``axis_name`` is any dimensionless parameter field (typically "g" or
    "delta_s").  For each cell the nontrivial state at that intensity is
    rebuilt and classified; unstable cells carry blank observables and the
    instability tag.  Cells are emitted in row-major (axis, I_s) order.
    """
    if axis_name not in MAP_AXES or axis_name == "I_s":
        raise DomainError(f"axis must be one of {MAP_AXES[:-1]}")
    cells: list[MapCell] = []
    for v in axis_values:
        p = replace(params, **{axis_name: float(v)})
        for I_s in I_s_values:
            cell = _dompo_cell(p, float(I_s), tol)
            cells.append(replace(cell, axis_value=float(v)))
    return cells

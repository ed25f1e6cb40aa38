"""Linear stability of fixed points and bifurcation location.

Fluctuations around a fixed point obey d(db)/dtau = L db in the complex basis
b = (x, p, beta_p, beta_p*, beta_s, beta_s*).  Swapping each conjugate pair
and conjugating leaves L invariant, so eigenvalues come in conjugate pairs
and the characteristic polynomial P(lambda) = sum c_n lambda^n is real.

Static bifurcations sit at c_0 = 0.  Hopf bifurcations are found from the
even/odd split of P(i w) = 0: the odd part fixes w^2 = (c3 +- sqrt(c3^2 -
4 c1 c5)) / (2 c5) and the even part c0 - c2 w^2 + c4 w^4 - c6 w^6 supplies a
residual whose sign changes along the nontrivial branch are bracketed and
bisected.  Every candidate is validated against a direct eigenvalue
computation, and an independent eigenvalue-tracking scan is provided as an
oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .errors import ConsistencyError, DomainError, NumericError
from .params import DEFAULT_TOL, ModelParams, Tolerances
from .steady import SteadyState, q_coefficients, reconstruct_amplitudes, turning_point

STABLE = "stable"
STATIC_UNSTABLE = "static-unstable"
DYNAMIC_UNSTABLE = "dynamic-unstable"
MARGINAL = "marginal"

HOPF_PLUS = "plus-root"
HOPF_MINUS = "minus-root"
HOPF_SCAN = "eig-scan"
HOPF_CLOSED_FORM = "closed-form"

#: index pairs (mode, conjugate) in the 6-dimensional complex basis
_CONJ_PAIRS_6 = ((2, 3), (4, 5))


@dataclass(frozen=True)
class StabilityReport:
    """Spectrum of the stability matrix with the resulting classification."""

    eigenvalues: np.ndarray
    margin: float
    classification: str

    @property
    def is_stable(self) -> bool:
        return self.classification == STABLE


@dataclass(frozen=True)
class HopfPoint:
    """Signal intensity and frequency of a purely imaginary eigenvalue pair."""

    I_s: float
    omega: float
    branch_label: str


def build_stability_matrix(params: ModelParams, ss: SteadyState) -> np.ndarray:
    """6x6 Jacobian of the classical flow at ``ss``, complex basis ordering."""
    dp, ds, g = params.delta_p, params.delta_s, params.g
    kap, gam, Om = params.kappa, params.gamma, params.Omega
    bs, bp, xb = ss.beta_s, ss.beta_p, ss.x_bar
    L = np.zeros((6, 6), dtype=complex)
    L[0, 1] = Om * Om
    L[1, 0] = -1.0
    L[1, 1] = -gam
    L[1, 4] = 2 * g * np.conj(bs)
    L[1, 5] = 2 * g * bs
    L[2, 2] = -kap * (1 - 1j * dp)
    L[2, 4] = -kap * bs
    L[3, 3] = -kap * (1 + 1j * dp)
    L[3, 5] = -kap * np.conj(bs)
    L[4, 0] = 1j * g * bs
    L[4, 2] = np.conj(bs)
    L[4, 4] = -(1 - 1j * ds - 1j * g * xb)
    L[4, 5] = bp
    L[5, 0] = -1j * g * np.conj(bs)
    L[5, 3] = bs
    L[5, 4] = np.conj(bp)
    L[5, 5] = -(1 + 1j * ds + 1j * g * xb)
    return L


def real_basis_transform(n: int) -> np.ndarray:
    """Matrix T with b = T y, mapping (x, p, Re/Im pairs) to the complex basis."""
    T = np.eye(n, dtype=complex)
    for k in range(2, n, 2):
        T[k, k] = 1.0
        T[k, k + 1] = 1j
        T[k + 1, k] = 1.0
        T[k + 1, k + 1] = -1j
    return T


def to_real_basis(L: np.ndarray) -> np.ndarray:
    """Similarity-transform a conjugation-symmetric matrix to real coordinates."""
    T = real_basis_transform(L.shape[0])
    A = np.linalg.solve(T, L @ T)
    if np.max(np.abs(A.imag)) > 1e-9 * max(1.0, np.max(np.abs(A))):
        raise ConsistencyError("stability matrix lacks conjugation symmetry")
    return A.real


def _classify_spectrum(eigvals: np.ndarray, tol: Tolerances) -> StabilityReport:
    order = np.lexsort((-eigvals.imag, -eigvals.real))
    eigvals = eigvals[order]
    rho = float(np.max(np.abs(eigvals))) if eigvals.size else 0.0
    zero = tol.eig_zero_abs(rho)
    margin = float(eigvals[0].real)
    leading_im = abs(float(eigvals[0].imag))
    if abs(margin) <= zero:
        kind = MARGINAL
    elif margin < 0:
        kind = STABLE
    elif leading_im > zero:
        kind = DYNAMIC_UNSTABLE
    else:
        kind = STATIC_UNSTABLE
    return StabilityReport(eigenvalues=eigvals, margin=margin, classification=kind)


def classify(params: ModelParams, ss: SteadyState,
             tol: Tolerances = DEFAULT_TOL) -> StabilityReport:
    """Eigenvalues of the stability matrix at ``ss`` plus the verdict."""
    L = build_stability_matrix(params, ss)
    try:
        eigvals = np.linalg.eigvals(L)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigenvalue computation failed: {exc}") from exc
    return _classify_spectrum(eigvals, tol)


def char_poly(L: np.ndarray, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Real coefficients c[0..n] of det(lambda I - L), ascending powers.

    Expanded as the product over eigenvalues, which keeps the coefficients
    accurate to near machine precision even when the matrix entries span
    many orders (the Faddeev-LeVerrier recursion below serves as the
    independent cross-check).  The imaginary residue left by rounding must
    stay below the eig_zero threshold; anything larger indicates a matrix
    without the conjugation symmetry.
    """
    coeffs = np.poly(np.linalg.eigvals(L))[::-1]  # ascending powers, monic
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    if float(np.max(np.abs(coeffs.imag))) > tol.eig_zero * scale:
        raise ConsistencyError("characteristic polynomial has a complex residue")
    return coeffs.real.copy()


def char_poly_faddeev_leverrier(L: np.ndarray,
                                tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Same coefficients from the Faddeev-LeVerrier trace recursion.

    Exact in exact arithmetic; in floating point the trace cancellations
    limit it to about 1e-9 relative on moderately scaled matrices, which is
    what the agreement tests pin.
    """
    n = L.shape[0]
    c = np.zeros(n + 1, dtype=complex)
    c[n] = 1.0
    M = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        M = L @ M
        ck = -np.trace(M) / k
        c[n - k] = ck
        M += ck * np.eye(n)
    scale = max(1.0, float(np.max(np.abs(c))))
    if float(np.max(np.abs(c.imag))) > tol.eig_zero * scale:
        raise ConsistencyError("characteristic polynomial has a complex residue")
    return c.real.copy()


def dopo_poly_coeffs(params: ModelParams, I_s: float) -> np.ndarray:
    """Quartic d[0..4] for the optical block of the g = 0 nontrivial branch."""
    kap, dp, ds = params.kappa, params.delta_p, params.delta_s
    return np.array([
        kap * kap * I_s * (I_s + 2 - 2 * dp * ds),
        2 * kap * (I_s + kap * (1 + I_s + dp * dp)),
        kap * (4 + 2 * I_s + kap * (1 + dp * dp)),
        2 * (1 + kap),
        1.0,
    ])


def mechanical_poly_coeffs(params: ModelParams) -> np.ndarray:
    """Quadratic (Omega^2, gamma, 1) of the free mechanical oscillator."""
    return np.array([params.Omega ** 2, params.gamma, 1.0])


def char_poly_c0_identity(params: ModelParams, I_s: float) -> float:
    """Closed form of the constant coefficient on the nontrivial branch.

    c0 = kappa^2 Omega^2 I_s (4 q2 I_s + 2 q1); it vanishes at the turning
    point I_s = -q1 / 2 q2 and at the threshold I_s = 0.
    """
    q = q_coefficients(params)
    return params.kappa ** 2 * params.Omega ** 2 * I_s * (4 * q.q2 * I_s + 2 * q.q1)


def dopo_hopf(params: ModelParams, tol: Tolerances = DEFAULT_TOL) -> HopfPoint | None:
    """Closed-form Hopf point of the nontrivial branch without optomechanics.

    Only valid at g = 0.  The bifurcation exists when
    delta_p * delta_s < -1 - kappa (1 + delta_p^2) / 2 and sits at

        I_s = -(1+dp^2) [(2+kappa)^2 + kappa^2 dp^2]
              / [(1+kappa)^2 (2 + kappa + kappa dp^2 + 2 dp ds)]

    with frequency w^2 = d1 / d3 of the optical quartic.
    """
    if params.g != 0:
        raise DomainError("dopo_hopf is defined only for g = 0")
    kap, dp, ds = params.kappa, params.delta_p, params.delta_s
    if dp * ds >= -1 - kap * (1 + dp * dp) / 2:
        return None
    num = -(1 + dp * dp) * ((2 + kap) ** 2 + kap * kap * dp * dp)
    den = (1 + kap) ** 2 * (2 + kap + kap * dp * dp + 2 * dp * ds)
    I_hb = num / den
    if I_hb <= 0:
        return None
    d = dopo_poly_coeffs(params, I_hb)
    omega = math.sqrt(d[1] / d[3])
    return HopfPoint(I_s=I_hb, omega=omega, branch_label=HOPF_CLOSED_FORM)


def _validate_hopf(params: ModelParams, I_s: float, omega: float,
                   tol: Tolerances) -> bool:
    ss = reconstruct_amplitudes(params, I_s, 1, tol)
    eigvals = np.linalg.eigvals(build_stability_matrix(params, ss))
    dist = np.min(np.abs(eigvals - 1j * omega))
    return bool(dist <= 1e-6 * max(1.0, omega))


def _dedupe_points(points: list[HopfPoint], tol: Tolerances) -> list[HopfPoint]:
    points = sorted(points, key=lambda h: h.I_s)
    kept: list[HopfPoint] = []
    for pt in points:
        if kept and abs(pt.I_s - kept[-1].I_s) <= max(tol.root_tol, 1e-9 * pt.I_s):
            continue
        kept.append(pt)
    return kept


def _hopf_residual(params: ModelParams, I_s: float, sign: int,
                   tol: Tolerances) -> float:
    """Even-part residual at the odd-part frequency branch; nan when undefined."""
    ss = reconstruct_amplitudes(params, I_s, 1, tol)
    c = char_poly(build_stability_matrix(params, ss), tol)
    c1, c3, c5 = c[1], c[3], c[5]
    if abs(c5) < 1e-12 * max(1.0, abs(c3)):
        return math.nan  # degenerate frequency formula; eig scan covers this
    disc = c3 * c3 - 4 * c1 * c5
    if disc < 0:
        return math.nan
    w2 = (c3 + sign * math.sqrt(disc)) / (2 * c5)
    if w2 <= 0:
        return math.nan
    return c[0] - c[2] * w2 + c[4] * w2 * w2 - c[6] * w2 ** 3


def _hopf_omega(params: ModelParams, I_s: float, sign: int,
                tol: Tolerances) -> float:
    ss = reconstruct_amplitudes(params, I_s, 1, tol)
    c = char_poly(build_stability_matrix(params, ss), tol)
    disc = c[3] * c[3] - 4 * c[1] * c[5]
    w2 = (c[3] + sign * math.sqrt(max(disc, 0.0))) / (2 * c[5])
    return math.sqrt(max(w2, 0.0))


def hopf_points(params: ModelParams, I_s_max: float, n_grid: int = 2000,
                tol: Tolerances = DEFAULT_TOL) -> list[HopfPoint]:
    """All Hopf bifurcations of the nontrivial branch with I_s in (0, I_s_max].

    Residual sign changes on a dense intensity grid are bracketed and
    bisected; roots that a direct eigenvalue check cannot confirm are
    discarded as artifacts of squaring the frequency equation.
    """
    if I_s_max <= 0:
        raise DomainError("I_s_max must be positive")
    grid = np.linspace(I_s_max / n_grid, I_s_max, n_grid)
    found: list[HopfPoint] = []
    for sign, label in ((1, HOPF_PLUS), (-1, HOPF_MINUS)):
        res = np.array([_hopf_residual(params, I, sign, tol) for I in grid])
        for i in range(len(grid) - 1):
            r0, r1 = res[i], res[i + 1]
            if not (math.isfinite(r0) and math.isfinite(r1)):
                continue
            if r0 == 0.0:
                root = grid[i]
            elif r0 * r1 < 0:
                root = optimize.brentq(
                    lambda I: _hopf_residual(params, I, sign, tol),
                    grid[i], grid[i + 1], xtol=tol.root_tol, rtol=1e-14)
            else:
                continue
            omega = _hopf_omega(params, root, sign, tol)
            if omega > 0 and _validate_hopf(params, root, omega, tol):
                found.append(HopfPoint(I_s=float(root), omega=omega, branch_label=label))
    return _dedupe_points(found, tol)


def eig_scan_hopf(params: ModelParams, I_s_max: float, n_grid: int = 2000,
                  tol: Tolerances = DEFAULT_TOL) -> list[HopfPoint]:
    """Independent Hopf finder: track the leading complex eigenvalue pair.

    Scans the largest real part among eigenvalues with a nonzero imaginary
    part and bisects its zero crossings.  Serves as the oracle for
    ``hopf_points`` in the test suite.
    """
    if I_s_max <= 0:
        raise DomainError("I_s_max must be positive")
    if n_grid < 100:
        raise DomainError("n_grid must be at least 100")

    def complex_margin(I_s: float) -> float:
        ss = reconstruct_amplitudes(params, I_s, 1, tol)
        eigvals = np.linalg.eigvals(build_stability_matrix(params, ss))
        zero = tol.eig_zero_abs(float(np.max(np.abs(eigvals))))
        complex_part = eigvals[np.abs(eigvals.imag) > zero]
        if complex_part.size == 0:
            return math.nan
        return float(np.max(complex_part.real))

    grid = np.linspace(I_s_max / n_grid, I_s_max, n_grid)
    vals = np.array([complex_margin(I) for I in grid])
    found: list[HopfPoint] = []
    for i in range(len(grid) - 1):
        v0, v1 = vals[i], vals[i + 1]
        if not (math.isfinite(v0) and math.isfinite(v1)):
            continue
        if v0 == 0.0:
            root = grid[i]
        elif v0 * v1 < 0:
            root = optimize.brentq(complex_margin, grid[i], grid[i + 1],
                                   xtol=tol.root_tol, rtol=1e-14)
        else:
            continue
        ss = reconstruct_amplitudes(params, float(root), 1, tol)
        eigvals = np.linalg.eigvals(build_stability_matrix(params, ss))
        zero = tol.eig_zero_abs(float(np.max(np.abs(eigvals))))
        complex_part = eigvals[np.abs(eigvals.imag) > zero]
        lead = complex_part[np.argmax(complex_part.real)]
        omega = abs(float(lead.imag))
        if omega > 0:
            found.append(HopfPoint(I_s=float(root), omega=omega,
                                   branch_label=HOPF_SCAN))
    return _dedupe_points(found, tol)


def phase_boundary(params: ModelParams, g_values, I_s_max: float,
                   n_grid: int = 2000,
                   tol: Tolerances = DEFAULT_TOL) -> list[tuple]:
    """Instability loci over a coupling range: rows (g, I_s, kind, omega).

    kind is "TP" for the fold of the nontrivial branch and "HB" for Hopf
    points (omega is None for folds).  Suitable for rendering the
    stability phase diagram in the (g, I_s) plane.
    """
    rows: list[tuple] = []
    for g in g_values:
        if g < 0:
            raise DomainError("g values must be non-negative")
        p = replace(params, g=float(g))
        tp = turning_point(p)
        if tp is not None and tp <= I_s_max:
            rows.append((float(g), float(tp), "TP", None))
        for hb in hopf_points(p, I_s_max, n_grid, tol):
            rows.append((float(g), hb.I_s, "HB", hb.omega))
    return rows

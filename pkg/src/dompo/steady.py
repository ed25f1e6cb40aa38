"""Classical fixed points: trivial and nontrivial branches, turning point, threshold.

The stationary field equations are

    sigma = (1 - i delta_p) beta_p + beta_s^2 / 2
    beta_p beta_s* = (1 - i delta_s - 2 i g^2 I_s) beta_s

together with p = 0 and x = 2 g I_s.  Writing beta_s = sqrt(I_s) e^{i phi_s},
the drive obeys sigma^2 = q0 + q1 I_s + q2 I_s^2, which is the backbone of
everything in this module.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ConsistencyError, DomainError
from .params import DEFAULT_TOL, ModelParams, Tolerances

TRIVIAL = "trivial"
NONTRIVIAL_UPPER = "upper"
NONTRIVIAL_LOWER = "lower"


@dataclass(frozen=True)
class SteadyState:
    """A classical fixed point, together with the drive that produces it."""

    x_bar: float
    p_bar: float
    beta_p: complex
    beta_s: complex
    sigma: float
    branch: str

    @property
    def I_p(self) -> float:
        return abs(self.beta_p) ** 2

    @property
    def I_s(self) -> float:
        return abs(self.beta_s) ** 2

    @property
    def phi_p(self) -> float:
        return cmath.phase(self.beta_p) if self.beta_p != 0 else 0.0

    @property
    def phi_s(self) -> float:
        return cmath.phase(self.beta_s) if self.beta_s != 0 else 0.0


@dataclass(frozen=True)
class QuadraticCoeffs:
    """Coefficients of sigma^2(I_s) = q0 + q1 I_s + q2 I_s^2 (q0, q2 > 0)."""

    q0: float
    q1: float
    q2: float


def q_coefficients(params: ModelParams) -> QuadraticCoeffs:
    dp, ds, g = params.delta_p, params.delta_s, params.g
    q0 = (1 + dp * dp) * (1 + ds * ds)
    q1 = (1 - dp * ds) + 4 * ds * (1 + dp * dp) * g * g
    q2 = 4 * g ** 4 + (0.5 - 2 * dp * g * g) ** 2
    return QuadraticCoeffs(q0, q1, q2)


def field_residuals(params: ModelParams, ss: SteadyState) -> tuple[complex, complex]:
    """Residuals of the two stationary field equations (pump, signal)."""
    dp, ds, g = params.delta_p, params.delta_s, params.g
    r_p = ss.sigma - (1 - 1j * dp) * ss.beta_p - ss.beta_s ** 2 / 2
    r_s = ss.beta_p * ss.beta_s.conjugate() \
        - (1 - 1j * ds - 2j * g * g * ss.I_s) * ss.beta_s
    return r_p, r_s


def trivial_solution(params: ModelParams) -> SteadyState:
    """Signal-off fixed point: beta_s = 0, beta_p = sigma / (1 - i delta_p)."""
    beta_p = params.sigma / (1 - 1j * params.delta_p)
    return SteadyState(x_bar=0.0, p_bar=0.0, beta_p=beta_p, beta_s=0j,
                       sigma=params.sigma, branch=TRIVIAL)


def sigma_from_intensity(params: ModelParams, I_s: float) -> float:
    """Drive strength that supports a nontrivial state with signal intensity I_s."""
    if I_s < 0:
        raise DomainError("I_s must be non-negative")
    q = q_coefficients(params)
    s2 = q.q0 + q.q1 * I_s + q.q2 * I_s * I_s
    # the quadratic is a modulus squared, so a negative value can only be rounding
    scale = max(q.q0, abs(q.q1) * I_s, q.q2 * I_s * I_s, 1.0)
    if s2 < -1e-12 * scale:
        raise ConsistencyError(f"sigma^2(I_s) evaluated to {s2} < 0")
    return math.sqrt(max(s2, 0.0))


def nontrivial_intensities(params: ModelParams, sigma: float | None = None,
                           tol: Tolerances = DEFAULT_TOL) -> list[tuple[float, str]]:
    """Real non-negative signal intensities at drive ``sigma``, sorted ascending.

    Returns (I_s, branch) pairs; the smaller of two coexisting roots is the
    lower branch.  A root that coincides with the trivial solution (|I_s|
    below root_tol) is dropped, and a double root is reported once as upper.
    """
    if sigma is None:
        sigma = params.sigma
    if sigma < 0:
        raise DomainError("sigma must be non-negative")
    q = q_coefficients(params)
    a, b, c = q.q2, q.q1, q.q0 - sigma * sigma
    disc = b * b - 4 * a * c
    disc_tol = tol.root_tol * max(b * b, abs(4 * a * c), 1.0)
    if disc < -disc_tol:
        return []
    if disc <= disc_tol:
        root = -b / (2 * a)
        if root < tol.root_tol:
            return []
        return [(root, NONTRIVIAL_UPPER)]
    sq = math.sqrt(disc)
    # numerically stable pairing: avoid cancellation in -b +- sq
    u = -(b + math.copysign(sq, b)) / 2 if b != 0 else sq / 2
    roots = sorted({u / a, c / u} if u != 0 else {0.0, -b / a})
    roots = [r for r in roots if r >= tol.root_tol]
    if len(roots) == 2:
        return [(roots[0], NONTRIVIAL_LOWER), (roots[1], NONTRIVIAL_UPPER)]
    return [(r, NONTRIVIAL_UPPER) for r in roots]


def _branch_tag(params: ModelParams, I_s: float, tol: Tolerances) -> str:
    tp = turning_point(params)
    if tp is None or I_s >= tp - max(tol.root_tol, 1e-12 * tp):
        return NONTRIVIAL_UPPER
    return NONTRIVIAL_LOWER


def reconstruct_amplitudes(params: ModelParams, I_s: float, sign: int = 1,
                           tol: Tolerances = DEFAULT_TOL) -> SteadyState:
    """Nontrivial fixed point with signal intensity I_s.

    ``sign`` selects one of the two symmetry-broken solutions, which differ
    only by beta_s -> -beta_s.  For sign=+1 the signal phase is the principal
    value in (-pi/2, pi/2].
    """
    if I_s <= 0:
        raise DomainError("reconstruct_amplitudes needs I_s > 0")
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    sigma = sigma_from_intensity(params, I_s)
    if sigma <= 0:
        raise DomainError("no drive sigma >= 0 is consistent with this I_s")
    dp, ds, g = params.delta_p, params.delta_s, params.g
    pump_factor = 1 - 1j * ds - 2j * g * g * I_s
    phase_lock = (1 - 1j * dp) * pump_factor + I_s / 2
    phi_s = -0.5 * cmath.phase(phase_lock / sigma)
    if phi_s <= -math.pi / 2:
        phi_s += math.pi
    if sign == -1:
        phi_s = cmath.phase(cmath.exp(1j * (phi_s - math.pi)))
    beta_s = math.sqrt(I_s) * cmath.exp(1j * phi_s)
    beta_p = pump_factor * cmath.exp(2j * phi_s)
    ss = SteadyState(x_bar=2 * g * I_s, p_bar=0.0, beta_p=beta_p, beta_s=beta_s,
                     sigma=sigma, branch=_branch_tag(params, I_s, tol))
    r_p, r_s = field_residuals(params, ss)
    bound = tol.residual * max(1.0, sigma)
    if abs(r_p) > bound or abs(r_s) > bound:
        raise ConsistencyError(
            f"fixed-point residuals {abs(r_p):.3e}, {abs(r_s):.3e} exceed {bound:.3e}")
    return ss


def turning_point(params: ModelParams) -> float | None:
    """Fold intensity -q1 / 2 q2 of the nontrivial branch, when q1 < 0."""
    q = q_coefficients(params)
    if q.q1 >= 0:
        return None
    return -q.q1 / (2 * q.q2)


def bistability_window(params: ModelParams) -> tuple[float, float] | None:
    """Drive window ]sigma^2_low, sigma^2_high] with two nontrivial intensities."""
    q = q_coefficients(params)
    if q.q1 >= 0:
        return None
    return (q.q0 - q.q1 * q.q1 / (4 * q.q2), q.q0)


def pitchfork_threshold(params: ModelParams) -> tuple[float, float]:
    """(I_p, sigma^2) at which the trivial solution destabilizes."""
    dp, ds = params.delta_p, params.delta_s
    I_p_th = 1 + ds * ds
    return I_p_th, I_p_th * (1 + dp * dp)


def steady_states(params: ModelParams, sigma: float | None = None,
                  tol: Tolerances = DEFAULT_TOL) -> list[SteadyState]:
    """All fixed points at drive ``sigma``: trivial plus any nontrivial roots."""
    if sigma is None:
        sigma = params.sigma
    from dataclasses import replace
    states = [trivial_solution(replace(params, sigma=sigma))]
    for I_s, _branch in nontrivial_intensities(params, sigma, tol):
        states.append(reconstruct_amplitudes(params, I_s, 1, tol))
    return states

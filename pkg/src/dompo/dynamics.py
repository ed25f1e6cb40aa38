"""Nonlinear classical equations of motion and trajectory-based oracles.

The flow integrated here is

    dx/dtau      = Omega^2 p
    dp/dtau      = -gamma p - x + 2 g |beta_s|^2
    dbeta_p/dtau = kappa [sigma - (1 - i delta_p) beta_p - beta_s^2 / 2]
    dbeta_s/dtau = -(1 - i delta_s - i g x) beta_s + beta_p beta_s*

split into six real components.  Besides plain integration it provides a
perturb-and-watch stability probe and limit-cycle statistics, both used as
independent cross-checks of the eigenvalue-based classification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.signal import find_peaks

from .errors import DivergenceError, DomainError, StiffnessError
from .params import DEFAULT_TOL, ModelParams, Tolerances
from .stability import build_stability_matrix, classify, to_real_basis
from .steady import SteadyState

#: abort integration when the state norm exceeds this radius
DIVERGENCE_RADIUS = 1e12

DECAYS = "decays"
GROWS = "grows"
INCONCLUSIVE = "inconclusive"

TRAJECTORY_COLUMNS = ("tau", "x", "p", "re_beta_p", "im_beta_p",
                      "re_beta_s", "im_beta_s")


@dataclass(frozen=True)
class ClassicalState:
    """Phase-space point of the classical flow."""

    x: float
    p: float
    beta_p: complex
    beta_s: complex


def state_vector(state: ClassicalState | SteadyState) -> np.ndarray:
    """Real 6-vector (x, p, Re/Im beta_p, Re/Im beta_s)."""
    if isinstance(state, SteadyState):
        x, p = state.x_bar, state.p_bar
    else:
        x, p = state.x, state.p
    return np.array([x, p, state.beta_p.real, state.beta_p.imag,
                     state.beta_s.real, state.beta_s.imag])


def state_from_vector(y) -> ClassicalState:
    return ClassicalState(x=float(y[0]), p=float(y[1]),
                          beta_p=complex(y[2], y[3]),
                          beta_s=complex(y[4], y[5]))


def rhs(tau: float, y: np.ndarray, params: ModelParams) -> np.ndarray:
    """Right-hand side of the classical flow in real coordinates."""
    x, p = y[0], y[1]
    bp = complex(y[2], y[3])
    bs = complex(y[4], y[5])
    dbp = params.kappa * (params.sigma - (1 - 1j * params.delta_p) * bp
                          - bs * bs / 2)
    dbs = -(1 - 1j * params.delta_s - 1j * params.g * x) * bs + bp * np.conj(bs)
    return np.array([
        params.Omega ** 2 * p,
        -params.gamma * p - x + 2 * params.g * (bs.real ** 2 + bs.imag ** 2),
        dbp.real, dbp.imag, dbs.real, dbs.imag,
    ])


@dataclass
class Trajectory:
    """Integration result: uniform state samples plus solver metadata."""

    times: np.ndarray
    y: np.ndarray  # shape (n_samples, 6)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.y):
            raise DomainError("times and states must have equal length")
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("times must be strictly increasing")

    def state(self, i: int) -> ClassicalState:
        return state_from_vector(self.y[i])

    @property
    def states(self) -> list[ClassicalState]:
        return [state_from_vector(row) for row in self.y]

    @property
    def signal_intensity(self) -> np.ndarray:
        return self.y[:, 4] ** 2 + self.y[:, 5] ** 2

    @property
    def pump_intensity(self) -> np.ndarray:
        return self.y[:, 2] ** 2 + self.y[:, 3] ** 2


def integrate(params: ModelParams, init, tau_end: float,
              rtol: float = 1e-8, atol: float = 1e-10,
              max_step: float | None = None,
              n_samples: int | None = None) -> Trajectory:
    """Adaptive 5(4) Runge-Kutta solution of the classical flow.

    ``init`` may be a ClassicalState, a SteadyState or a plain 6-vector.
    The default step cap 0.1/kappa keeps the explicit solver honest for
    stiff pump decay (kappa up to a few hundred).  A state norm above
    1e12 aborts with DivergenceError.
    """
    if tau_end <= 0:
        raise DomainError("tau_end must be positive")
    if rtol <= 0 or atol <= 0:
        raise DomainError("tolerances must be positive")
    y0 = init if isinstance(init, np.ndarray) else state_vector(init)
    y0 = np.asarray(y0, dtype=float)
    if max_step is None:
        max_step = 0.1 / params.kappa

    def blow_up(tau, y, params=params):
        return float(np.linalg.norm(y) - DIVERGENCE_RADIUS)

    blow_up.terminal = True
    blow_up.direction = 1

    t_eval = None
    if n_samples is not None:
        t_eval = np.linspace(0.0, tau_end, n_samples)
    sol = solve_ivp(rhs, (0.0, tau_end), y0, method="RK45", args=(params,),
                    rtol=rtol, atol=atol, max_step=max_step, t_eval=t_eval,
                    events=blow_up)
    if sol.status == 1:
        raise DivergenceError(
            f"trajectory norm exceeded {DIVERGENCE_RADIUS:g} at tau = {sol.t_events[0][0]:g}")
    if sol.status != 0:
        raise StiffnessError(
            "step size underflow; the pump time scale 1/kappa is too fast for "
            "the explicit solver, reduce kappa or use an implicit method")
    times, states = sol.t, sol.y.T
    if times[0] > 0.0:
        times = np.concatenate(([0.0], times))
        states = np.vstack((y0, states))
    meta = {"method": "RK45", "rtol": rtol, "atol": atol,
            "max_step": max_step, "nfev": int(sol.nfev)}
    return Trajectory(times=times, y=states.copy(), metadata=meta)


@dataclass(frozen=True)
class ProbeResult:
    """Verdict of the perturb-and-watch probe."""

    verdict: str
    rate: float | None


def _log_distance_trend(times, dist, floor, cap):
    """Fitted slope and total change of log(dist) on the trusted window."""
    mask = (dist > floor) & (dist < cap)
    # drop the initial transient where non-leading modes still contribute
    start = int(0.1 * len(times))
    mask[:start] = False
    if np.count_nonzero(mask) < 10:
        return None, None
    t, z = times[mask], np.log(dist[mask])
    slope = np.polyfit(t, z, 1)[0]
    return float(slope), float(z[-1] - z[0])


def perturbation_probe(params: ModelParams, ss: SteadyState,
                       eps: float = 1e-3, horizon: float | None = None,
                       seed: int = 0, n_random: int = 2,
                       tol: Tolerances = DEFAULT_TOL) -> ProbeResult:
    """Perturb a fixed point and watch whether the flow returns to it.

    The state is kicked by ``eps`` (relative to the state scale) along the
    most unstable eigendirection and along seeded random directions; an
    exponential envelope is fitted to the distance from the fixed point.
    Growth or decay by less than e^1.5 over the horizon is reported as
    inconclusive, as happens at a bifurcation.
    """
    if not 0 < eps <= 1e-2:
        raise DomainError("eps must lie in (0, 1e-2]")
    report = classify(params, ss, tol)
    if horizon is None:
        m = abs(report.margin)
        horizon = min(20.0 / m, 2e4) if m > 1e-6 else 2e3
    ref = state_vector(ss)
    scale = max(1.0, float(np.linalg.norm(ref)))

    A = to_real_basis(build_stability_matrix(params, ss))
    eigvals, eigvecs = np.linalg.eig(A)
    lead = eigvecs[:, int(np.argmax(eigvals.real))]
    direction = lead.real if np.linalg.norm(lead.real) > 1e-8 else lead.imag
    directions = [direction / np.linalg.norm(direction)]
    rng = np.random.default_rng(seed)
    for _ in range(n_random):
        v = rng.standard_normal(6)
        directions.append(v / np.linalg.norm(v))

    atol = 1e-12 * scale
    floor = max(1e3 * atol, 1e-11 * eps * scale)
    cap = 0.05 * scale + 100 * eps * scale
    trends = []
    for d in directions:
        traj = integrate(params, ref + eps * scale * d, horizon,
                         rtol=1e-9, atol=atol, n_samples=600)
        dist = np.linalg.norm(traj.y - ref, axis=1)
        trends.append(_log_distance_trend(traj.times, dist, floor, cap))

    slope, change = trends[0]
    if change is None:
        return ProbeResult(verdict=INCONCLUSIVE, rate=None)
    if change > 1.5:
        return ProbeResult(verdict=GROWS, rate=abs(slope))
    others_decay = all(c is not None and c < -1.0 for _, c in trends[1:])
    if change < -1.5 and others_decay:
        return ProbeResult(verdict=DECAYS, rate=abs(slope))
    return ProbeResult(verdict=INCONCLUSIVE, rate=None)


@dataclass(frozen=True)
class CycleStats:
    """Period and per-component oscillation amplitudes of a limit cycle."""

    period: float
    amplitudes: np.ndarray  # half peak-to-peak per real component


def limit_cycle_stats(traj: Trajectory, min_amplitude: float = 1e-8,
                      max_spacing_spread: float = 0.2) -> CycleStats | None:
    """Detect a periodic orbit in the signal intensity of a long trajectory.

    The first half is discarded as transient; peak spacings of |beta_s|^2
    give the period.  Returns None when the tail is flat (amplitude below
    ``min_amplitude``) or the spacings scatter too much to call it periodic.
    """
    n = len(traj.times)
    tail = slice(n // 2, n)
    t = traj.times[tail]
    s = traj.signal_intensity[tail]
    swing = (float(np.max(s)) - float(np.min(s))) / 2
    if swing < min_amplitude:
        return None
    peaks, _ = find_peaks(s, prominence=0.2 * swing)
    if len(peaks) < 5:
        return None
    spacing = np.diff(t[peaks])
    period = float(np.mean(spacing))
    if float(np.std(spacing)) > max_spacing_spread * period:
        return None
    amplitudes = (traj.y[tail].max(axis=0) - traj.y[tail].min(axis=0)) / 2
    return CycleStats(period=period, amplitudes=amplitudes)


def fixed_point_residual(params: ModelParams, ss: SteadyState) -> np.ndarray:
    """Flow velocity at a steady state; each component should vanish."""
    from dataclasses import replace
    p = replace(params, sigma=ss.sigma)
    return rhs(0.0, state_vector(ss), p)

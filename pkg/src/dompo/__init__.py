"""Degenerate optomechanical parametric oscillator analysis toolkit.

Classical steady states and bifurcations of the pump/signal/mechanics
system, linearized quantum fluctuations (covariance matrices, effective
mechanical phonon number and squeezing) and a single-mode sideband-cooling
reference, each backed by independent numerical cross-checks.
"""

from .dynamics import (ClassicalState, CycleStats, ProbeResult, Trajectory,
                       integrate, limit_cycle_stats, perturbation_probe)
from .errors import (ConsistencyError, DefectiveMatrixError, DivergenceError,
                     DomainError, DompoError, NumericError, StiffnessError,
                     ValidationError)
from .fluctuations import (MapCell, MechanicalState, NoiseModel,
                           covariance_lyapunov, covariance_montecarlo,
                           covariance_spectral, effective_map,
                           mechanical_state, noise_model, quadrature_map)
from .params import (DEFAULT_TOL, MODEL_KEYS, QUADRATURES, ModelParams,
                     PhysicalParams, Tolerances, load_params, normalize,
                     params_from_dict, params_to_dict, thermal_occupation,
                     validate)
from .sideband import (SidebandSteadyState, sideband_map,
                       sideband_mechanical_state, sideband_stability,
                       sideband_steady_state)
from .stability import (HopfPoint, StabilityReport, build_stability_matrix,
                        char_poly, classify, dopo_hopf, eig_scan_hopf,
                        hopf_points, phase_boundary)
from .steady import (NONTRIVIAL_LOWER, NONTRIVIAL_UPPER, TRIVIAL,
                     QuadraticCoeffs, SteadyState, bistability_window,
                     nontrivial_intensities, pitchfork_threshold,
                     q_coefficients, reconstruct_amplitudes,
                     sigma_from_intensity, steady_states, trivial_solution,
                     turning_point)

__version__ = "0.1.0"

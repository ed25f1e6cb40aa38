"""Randomized self-verification: oracle cross-checks behind the CLI `verify` command.

Each check pits two independent routes to the same quantity against each
other on seeded random parameter sets, so a single run gives a quick
end-to-end confidence report without the full test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import DECAYS, GROWS, perturbation_probe
from .fluctuations import (covariance_lyapunov, covariance_montecarlo,
                           covariance_spectral)
from .params import ModelParams
from .stability import (DYNAMIC_UNSTABLE, STABLE, STATIC_UNSTABLE,
                        build_stability_matrix, classify, dopo_hopf,
                        eig_scan_hopf, hopf_points)
from .steady import (nontrivial_intensities, reconstruct_amplitudes,
                     sigma_from_intensity, trivial_solution, turning_point)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def random_params(rng: np.random.Generator, stiff: bool = False) -> ModelParams:
    """Moderate random parameter set; ``stiff`` allows large linewidth ratios."""
    return ModelParams(
        kappa=float(rng.uniform(0.3, 60.0 if stiff else 3.0)),
        gamma=float(rng.uniform(0.2, 1.5)),
        Omega=float(rng.uniform(0.8, 4.0)),
        delta_p=float(rng.uniform(-2.5, 2.5)),
        delta_s=float(rng.uniform(-3.0, 3.0)),
        g=float(rng.uniform(0.0, 0.4)),
        g_dc=float(rng.uniform(0.3, 3.0)),
        n_th=float(rng.uniform(10.0, 200.0)),
        sigma=0.0,
    )


def sample_stable_state(rng: np.random.Generator, min_margin: float = 0.05,
                        max_rho: float = 50.0, prefer=None):
    """Draw (params, steady state) classified stable with a healthy margin.

    Alternates between trivial (below threshold) and nontrivial branches
    unless ``prefer`` pins one of "trivial"/"nontrivial".
    """
    while True:
        p = random_params(rng)
        want_trivial = (rng.random() < 0.5) if prefer is None else (prefer == "trivial")
        if want_trivial:
            s2_th = (1 + p.delta_s ** 2) * (1 + p.delta_p ** 2)
            p = replace(p, sigma=float(rng.uniform(0.1, 0.9)) * math.sqrt(s2_th))
            ss = trivial_solution(p)
        else:
            I_s = float(rng.uniform(0.3, 12.0))
            try:
                ss = reconstruct_amplitudes(p, I_s)
            except Exception:
                continue
            p = replace(p, sigma=ss.sigma)
        report = classify(p, ss)
        rho = float(np.max(np.abs(report.eigenvalues)))
        if report.classification == STABLE and report.margin < -min_margin \
                and rho <= max_rho:
            return p, ss, report


def check_vacuum_limit(rng, sym_factor: float = 0.5) -> CheckResult:
    p = replace(random_params(rng), sigma=0.0)
    V = covariance_spectral(p, trivial_solution(p), _sym_factor=sym_factor)
    target = np.diag([2 * p.n_th, 2 * p.n_th, 1.0, 1.0, 1.0, 1.0])
    err = float(np.max(np.abs(V - target)))
    return CheckResult("vacuum limit (undriven covariance)", err <= 1e-9,
                       f"max deviation {err:.3e} (tolerance 1e-9)")


def check_spectral_vs_lyapunov(rng, n_points: int = 8) -> CheckResult:
    worst = 0.0
    for _ in range(n_points):
        p, ss, _ = sample_stable_state(rng)
        Vs = covariance_spectral(p, ss)
        Vl = covariance_lyapunov(p, ss)
        worst = max(worst, float(np.linalg.norm(Vs - Vl) / np.linalg.norm(Vl)))
    return CheckResult("covariance spectral vs Lyapunov", worst <= 1e-8,
                       f"worst relative Frobenius {worst:.3e} over {n_points} points")


def check_montecarlo(rng, seed: int, n_traj: int = 512) -> CheckResult:
    p, ss, report = sample_stable_state(rng, min_margin=0.3, max_rho=6.0)
    Vref = covariance_spectral(p, ss)
    A_rho = float(np.max(np.abs(report.eigenvalues)))
    V, err = covariance_montecarlo(p, ss, n_traj=n_traj, dt=0.002 / A_rho,
                                   tau_end=max(10 / abs(report.margin), 20.0),
                                   seed=seed)
    z = float(np.max(np.abs(V - Vref) / err))
    return CheckResult("covariance Monte Carlo (4 sigma smoke check)", z <= 4.0,
                       f"max |z| = {z:.2f} with {n_traj} trajectories")


def check_hopf_oracles(rng, n_sets: int = 3) -> CheckResult:
    details = []
    ok = True
    # closed-form case first
    p0 = ModelParams(kappa=1.0, gamma=0.5, Omega=2.0, delta_p=1.0,
                     delta_s=-60.0, g=0.0, g_dc=1.0, n_th=100.0, sigma=0.0)
    hb = dopo_hopf(p0)
    span = 2 * hb.I_s + 0.5
    numeric = hopf_points(p0, span, n_grid=800)
    scanned = eig_scan_hopf(p0, span, n_grid=800)
    if len(numeric) != 1 or abs(numeric[0].I_s - hb.I_s) > 1e-6 * hb.I_s:
        ok = False
        details.append("closed-form case missed by the residual finder")
    if len(scanned) != 1 or abs(scanned[0].I_s - hb.I_s) > 1e-6 * hb.I_s:
        ok = False
        details.append("closed-form case missed by the eigenvalue scan")
    for _ in range(n_sets):
        p = random_params(rng)
        a = hopf_points(p, 25.0, n_grid=600)
        b = eig_scan_hopf(p, 25.0, n_grid=600)
        if len(a) != len(b):
            ok = False
            details.append(f"finders disagree on count ({len(a)} vs {len(b)})")
            continue
        for x, y in zip(a, b):
            if abs(x.I_s - y.I_s) > 1e-6 * max(1.0, x.I_s):
                ok = False
                details.append(f"roots differ: {x.I_s} vs {y.I_s}")
    return CheckResult("Hopf finder vs eigenvalue scan",
                       ok, "; ".join(details) if details else
                       f"agreement on closed form + {n_sets} random sets")


def check_turning_point_eigenvalue(rng) -> CheckResult:
    # a fold needs delta_p * delta_s well above 1
    while True:
        p = random_params(rng)
        p = replace(p, delta_p=float(rng.uniform(2.0, 4.0)),
                    delta_s=float(rng.uniform(2.0, 4.0)), g=0.0)
        tp = turning_point(p)
        if tp is not None and tp > 0.05:
            break
    ss = reconstruct_amplitudes(p, tp)
    eigvals = np.linalg.eigvals(build_stability_matrix(p, ss))
    rel = float(np.min(np.abs(eigvals)) / np.max(np.abs(eigvals)))
    return CheckResult("zero eigenvalue at the turning point", rel <= 1e-7,
                       f"min|eig| / max|eig| = {rel:.3e}")


def check_probe_vs_classify(rng, n_points: int = 2) -> CheckResult:
    ok = True
    details = []
    for _ in range(n_points):
        p, ss, report = sample_stable_state(rng, min_margin=0.2, max_rho=12.0)
        verdict = perturbation_probe(p, ss, eps=1e-3).verdict
        if verdict != DECAYS:
            ok = False
            details.append(f"stable point probed as {verdict}")
    # one statically unstable lower-branch state
    p = ModelParams(kappa=2.0, gamma=0.5, Omega=2.0, delta_p=3.0, delta_s=3.0,
                    g=0.0, g_dc=1.0, n_th=50.0, sigma=0.0)
    tp = turning_point(p)
    ss = reconstruct_amplitudes(p, 0.4 * tp)
    pd = replace(p, sigma=ss.sigma)
    verdict = perturbation_probe(pd, ss, eps=1e-3).verdict
    if verdict != GROWS:
        ok = False
        details.append(f"lower branch probed as {verdict}")
    return CheckResult("trajectory probe vs eigenvalue classification", ok,
                       "; ".join(details) if details else
                       f"{n_points} stable + 1 unstable point agree")


def run_verification(seed: int = 0, sym_factor: float = 0.5,
                     with_montecarlo: bool = True) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    results = [
        check_vacuum_limit(rng, sym_factor),
        check_spectral_vs_lyapunov(rng),
        check_hopf_oracles(rng),
        check_turning_point_eigenvalue(rng),
        check_probe_vs_classify(rng),
    ]
    if with_montecarlo:
        results.append(check_montecarlo(rng, seed))
    return results


def format_report(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        mark = "ok  " if r.passed else "FAIL"
        lines.append(f"[{mark}] {r.name}: {r.detail}")
    n_bad = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_bad}/{len(results)} checks passed")
    return "\n".join(lines)

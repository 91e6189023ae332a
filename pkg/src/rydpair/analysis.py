"""Estimation of the two-atom density matrix from recapture statistics.

Only pairs with both atoms present carry entanglement. The push-out readout
cannot tell |up> from a lost atom, so the estimator combines

* the angle-averaged single-trap recapture, giving the loss L_a, L_b;
* the two-frequency fit of P_11(theta), whose values at 0 and pi are
  P_dd and P_uu and whose mean fixes the coherence;
* the normalisation 1 - L_total for the remaining populations.

With the Raman phase averaged out, P_11(theta) only sees the coherence
rho_{du,ud}:

    P_11 = P_dd cos^4(theta/2) + P_uu sin^4(theta/2)
           + (P_du + P_ud + 2 Re rho_{du,ud}) sin^2(theta) / 4
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .fitting import OscillationFit, fit_oscillation
from .protocol import ShotTally, parity_signal


@dataclass(frozen=True)
class Losses:
    L_a: float
    L_b: float
    L_total: float
    err_a: float
    err_b: float
    err_total: float


@dataclass(frozen=True)
class DensityEstimate:
    p_down_down: float
    p_up_up: float
    p_mixed_sum: float
    re_coherence: float
    trace: float
    L_a: float
    L_b: float
    L_total: float
    errors: dict = field(default_factory=dict)
    flags: tuple = ()
    # joint covariance of (y0, A, B, L_total) the elements derive from
    covariance: np.ndarray | None = None


def closed_form_p11(theta, p_down_down, p_up_up, p_mixed_sum, re_coherence):
    """Phase-averaged P_11(theta) for a pair state with the given elements."""
    theta = np.asarray(theta, dtype=float)
    c2, s2 = np.cos(theta / 2) ** 2, np.sin(theta / 2) ** 2
    return p_down_down * c2**2 + p_up_up * s2**2 + (p_mixed_sum + 2 * re_coherence) * c2 * s2


def mean_p11(p_down_down, p_up_up, p_mixed_sum, re_coherence):
    """Angle average of ``closed_form_p11``."""
    return (p_mixed_sum + 3 * p_down_down + 3 * p_up_up + 2 * re_coherence) / 8


def tally_errors(P, n):
    """Binomial error with a Wilson-interval floor so P in {0, 1} keeps weight."""
    P = np.asarray(P, dtype=float)
    n = np.asarray(n, dtype=float)
    binom = np.sqrt(P * (1 - P) / n)
    wilson = np.sqrt(P * (1 - P) / n + 1 / (4 * n**2)) / (1 + 1 / n)
    return np.maximum(binom, wilson)


def _signal(tallies, name):
    n = np.array([t.n for t in tallies], dtype=float)
    if name == "parity":
        vals = np.array([parity_signal(t)[0] for t in tallies])
        q = np.array([t.P_01 + t.P_10 for t in tallies])
        return vals, 2 * tally_errors(q, n)
    vals = np.array([getattr(t, name) for t in tallies])
    return vals, tally_errors(vals, n)


def fit_signal(tallies, name: str, omega: float, fix_omega: bool = False) -> OscillationFit:
    """Fit one tallied signal against pulse duration t = theta / omega."""
    thetas = np.array([t.theta for t in tallies])
    y, err = _signal(tallies, name)
    return fit_oscillation(thetas / omega, y, err, omega, fix_omega=fix_omega)


def check_coverage(thetas) -> bool:
    """Warn when the angle grid misses a sizeable part of one rotation period."""
    thetas = np.sort(np.asarray(thetas, dtype=float))
    span = thetas[-1] - thetas[0]
    ok = thetas.size >= 8 and span >= 2 * np.pi * (1 - 2 / thetas.size)
    if not ok:
        warnings.warn("analysis angles do not cover a full rotation; loss estimates are biased", stacklevel=2)
    return ok


def extract_losses(fit_a: OscillationFit, fit_b: OscillationFit) -> Losses:
    """L = 1 - 2 <P>, with <P> the angle average (fit offset) of each trap.

    L_total assumes the two atoms are lost independently.
    """
    La, Lb = 1 - 2 * fit_a.y0, 1 - 2 * fit_b.y0
    ea, eb = 2 * fit_a.errors[0], 2 * fit_b.errors[0]
    Lt = La + Lb - La * Lb
    et = np.hypot((1 - Lb) * ea, (1 - La) * eb)
    return Losses(float(La), float(Lb), float(Lt), float(ea), float(eb), float(et))


def extract_losses_from_tallies(tallies, omega: float) -> Losses:
    check_coverage([t.theta for t in tallies])
    return extract_losses(
        fit_signal(tallies, "P_a", omega, fix_omega=True),
        fit_signal(tallies, "P_b", omega, fix_omega=True),
    )


def extract_density(fit: OscillationFit, losses: Losses) -> DensityEstimate:
    """Matrix elements of the pair state from the P_11 fit and the loss totals."""
    y0, A, B = fit.y0, fit.A, fit.B
    Lt = losses.L_total
    trace = 1 - Lt
    p_dd = y0 + A + B
    p_uu = y0 - A + B
    mixed = trace - p_dd - p_uu
    re = (8 * y0 - mixed - 3 * p_dd - 3 * p_uu) / 2

    # gradients over (y0, A, B, L_total)
    cov = np.zeros((4, 4))
    cov[:3, :3] = fit.covariance[:3, :3]
    cov[3, 3] = losses.err_total**2
    grads = {
        "p_down_down": [1, 1, 1, 0],
        "p_up_up": [1, -1, 1, 0],
        "p_mixed_sum": [-2, 0, -2, -1],
        "re_coherence": [2, 0, -2, 0.5],
        "trace": [0, 0, 0, -1],
    }
    errors = {k: float(np.sqrt(np.dot(g, cov @ np.asarray(g, float)))) for k, g in grads.items()}
    errors.update(L_a=losses.err_a, L_b=losses.err_b, L_total=losses.err_total)

    flags = []
    for name, value in (("p_down_down", p_dd), ("p_up_up", p_uu), ("p_mixed_sum", mixed)):
        if value < -2 * errors[name]:
            flags.append(f"{name} negative beyond 2 sigma: model inconsistent with data")
    if flags:
        warnings.warn("; ".join(flags), stacklevel=2)
    return DensityEstimate(
        p_down_down=float(p_dd),
        p_up_up=float(p_uu),
        p_mixed_sum=float(mixed),
        re_coherence=float(re),
        trace=float(trace),
        L_a=losses.L_a,
        L_b=losses.L_b,
        L_total=Lt,
        errors=errors,
        flags=tuple(flags),
        covariance=cov,
    )


def fidelity(d: DensityEstimate) -> tuple[float, float, float, float]:
    """(F, err_F, F_pairs, err_F_pairs) with respect to |Psi+>.

    F uses Re(rho) only; the imaginary part is not measurable with
    phase-averaged rotations.
    """
    if d.trace <= 0:
        raise ValueError("trace must be positive to normalise the pair fidelity")
    F = d.p_mixed_sum / 2 + d.re_coherence
    Fp = F / d.trace
    if d.covariance is None:
        return float(F), 0.0, float(Fp), 0.0
    # F = y0 - 3B and trace = 1 - L_total in the fit coordinates
    gF = np.array([1.0, 0.0, -3.0, 0.0])
    gFp = np.array([1.0, 0.0, -3.0, Fp]) / d.trace
    err_F = float(np.sqrt(gF @ d.covariance @ gF))
    err_Fp = float(np.sqrt(gFp @ d.covariance @ gFp))
    return float(F), err_F, float(Fp), err_Fp


def coherence_from_parity(
    parity_fit: OscillationFit, L_a: float, L_b: float, err_a: float = 0.0, err_b: float = 0.0
) -> tuple[float, float]:
    """Re rho from Pi(pi/2) = 2 Re rho + L_a L_b; returns (value, error)."""
    pi_half = parity_fit.at_angle(np.pi / 2)
    g = np.array([1.0, 0.0, -1.0])
    var = g @ parity_fit.covariance[:3, :3] @ g + (L_b * err_a) ** 2 + (L_a * err_b) ** 2
    return float((pi_half - L_a * L_b) / 2), float(np.sqrt(var) / 2)


@dataclass(frozen=True)
class AnalysisReport:
    density: DensityEstimate
    F: float
    err_F: float
    F_pairs: float
    err_F_pairs: float
    re_coherence_parity: float
    err_re_coherence_parity: float
    fit_p11: OscillationFit
    fit_parity: OscillationFit
    fit_pa: OscillationFit
    fit_pb: OscillationFit
    coverage_ok: bool

    @property
    def parity_agreement_sigma(self) -> float:
        diff = self.re_coherence_parity - self.density.re_coherence
        comb = np.hypot(self.err_re_coherence_parity, self.density.errors["re_coherence"])
        return float(abs(diff) / comb) if comb > 0 else float("inf")

    def to_dict(self) -> dict:
        d = self.density

        def fit_dict(f: OscillationFit):
            e = f.errors
            return {
                "y0": f.y0, "A": f.A, "B": f.B, "omega": f.omega,
                "err_y0": e[0], "err_A": e[1], "err_B": e[2], "err_omega": e[3],
                "residual_rms": f.residual_rms, "chi2": f.chi2, "n_points": f.n_points,
            }

        return {
            "density": {
                "p_down_down": d.p_down_down,
                "p_up_up": d.p_up_up,
                "p_mixed_sum": d.p_mixed_sum,
                "re_coherence": d.re_coherence,
                "trace": d.trace,
                "errors": dict(d.errors),
                "flags": list(d.flags),
            },
            "losses": {"L_a": d.L_a, "L_b": d.L_b, "L_total": d.L_total},
            "fidelity": {"F": self.F, "err_F": self.err_F, "F_pairs": self.F_pairs, "err_F_pairs": self.err_F_pairs},
            "parity_check": {
                "re_coherence": self.re_coherence_parity,
                "err_re_coherence": self.err_re_coherence_parity,
                "agreement_sigma": self.parity_agreement_sigma,
            },
            "fits": {
                "p11": fit_dict(self.fit_p11),
                "parity": fit_dict(self.fit_parity),
                "p_a": fit_dict(self.fit_pa),
                "p_b": fit_dict(self.fit_pb),
            },
            "coverage_ok": self.coverage_ok,
        }


def analyze_tallies(tallies: list[ShotTally], omega_raman: float) -> AnalysisReport:
    """Full pipeline: frequency calibration, losses, density elements, fidelity, parity check.

    The rotation frequency is refined on P_11, which always carries the
    2-omega component, and then held fixed for the other signals.
    """
    coverage_ok = check_coverage([t.theta for t in tallies])
    fit11 = fit_signal(tallies, "P_11", omega_raman)
    omega = fit11.omega
    fit_a = fit_signal(tallies, "P_a", omega, fix_omega=True)
    fit_b = fit_signal(tallies, "P_b", omega, fix_omega=True)
    fit_par = fit_signal(tallies, "parity", omega, fix_omega=True)
    losses = extract_losses(fit_a, fit_b)
    density = extract_density(fit11, losses)
    F, eF, Fp, eFp = fidelity(density)
    re_par, e_par = coherence_from_parity(fit_par, losses.L_a, losses.L_b, losses.err_a, losses.err_b)
    return AnalysisReport(density, F, eF, Fp, eFp, re_par, e_par, fit11, fit_par, fit_a, fit_b, coverage_ok)

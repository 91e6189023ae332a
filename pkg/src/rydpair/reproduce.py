"""Side-by-side comparison of simulated quantities with published reference values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import AnalysisReport, analyze_tallies
from .blockade import SequenceParams, collective_oscillation_frequency, double_excitation_probability
from .config import RunConfig
from .noise import K_DIRECTION, dephasing_factor, make_rng, sample_velocity_array
from .protocol import pair_recapture_probability, run_scan

# published value and its quoted uncertainty
PUBLISHED = {
    "p_down_down": (0.06, 0.02),
    "p_up_up": (0.09, 0.02),
    "p_mixed_sum": (0.46, 0.03),
    "re_coherence": (0.23, 0.04),
    "re_coherence_parity": (0.22, 0.04),
    "trace": (0.61, None),
    "L_a": (0.22, 0.01),
    "L_total": (0.39, 0.02),
    "p_recap": (0.62, 0.03),
    "F_pairs": (0.75, 0.07),
    "dephasing_30ns": (0.94, None),
    "dephasing_600ns": (0.45, None),
    "F_max": (0.97, None),
    "delay_ratio": (0.5, None),
    "double_excitation": (0.1, None),
}

# pulse timings used for the quoted dephasing values: 70 ns + gap + 110 ns
QUOTED_DURATION_30NS = 210e-9
QUOTED_DURATION_600NS = 780e-9

# random stream reserved for the velocity-sampling check
DEPHASING_STREAM = 9_000


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    low: float
    high: float
    note: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.low <= self.value <= self.high)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34} {self.value:>10.4f}   [{self.low:.4f}, {self.high:.4f}]  {self.note}"

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "low": self.low, "high": self.high,
                "passed": self.passed, "note": self.note}


def window(name: str, value: float, target: float, tol: float, note: str = "") -> Check:
    return Check(name, float(value), target - tol, target + tol, note)


def mc_dephasing(p: SequenceParams, delta_t: float, samples: int, rng: np.random.Generator) -> float:
    """Mean of cos(phi) over sampled velocity pairs."""
    v = sample_velocity_array(p.temperature, p.atom_mass, rng, samples)
    phi = p.k_eff * ((v[:, 1] - v[:, 0]) @ K_DIRECTION) * delta_t
    return float(np.mean(np.cos(phi)))


def dephasing_checks(p: SequenceParams, samples: int = 100_000, seed: int = 0) -> list[Check]:
    checks = []
    rng = make_rng(seed, DEPHASING_STREAM)
    for label, dt, tol in (("30ns", QUOTED_DURATION_30NS, 0.01), ("600ns", QUOTED_DURATION_600NS, 0.03)):
        target = PUBLISHED[f"dephasing_{label}"][0]
        analytic = dephasing_factor(p.temperature, p.atom_mass, p.k_eff, dt)
        checks.append(window(f"dephasing {label} (analytic)", analytic, target, tol, f"delta_t={dt * 1e9:.0f} ns"))
        mc = mc_dephasing(p, dt, samples, rng)
        checks.append(Check(f"dephasing {label} (MC/analytic)", mc / analytic, 0.995, 1.005, f"{samples} velocity pairs"))
    f_max = (1 + dephasing_factor(p.temperature, p.atom_mass, p.k_eff, QUOTED_DURATION_30NS)) / 2
    checks.append(window("F_max (dephasing-limited)", f_max, 0.97, 0.01))
    return checks


def blockade_checks(p: SequenceParams) -> list[Check]:
    strong = p.replace(delta_E=1e3 * p.omega_up_r)
    ratio = collective_oscillation_frequency(strong) / (np.sqrt(2) * p.omega_up_r)
    return [
        Check("collective enhancement / sqrt(2)", ratio, 0.995, 1.005, "delta_E = 1000 omega_up_r"),
        Check("double excitation probability", double_excitation_probability(p), 0.03, 0.20, "reference parameters"),
    ]


def table_checks(report: AnalysisReport, label: str = "") -> list[Check]:
    d = report.density
    checks = []
    for key in ("p_down_down", "p_up_up", "p_mixed_sum", "re_coherence"):
        target, sigma = PUBLISHED[key]
        checks.append(window(f"{label}{key}", getattr(d, key), target, 2 * sigma, "2 sigma (quoted)"))
    checks.append(window(f"{label}trace", d.trace, 0.61, 0.04))
    checks.append(window(f"{label}L_a", d.L_a, 0.22, 0.03))
    checks.append(window(f"{label}L_b", d.L_b, 0.22, 0.03))
    checks.append(window(f"{label}F_pairs", report.F_pairs, 0.75, 0.07))
    checks.append(window(f"{label}Re rho (parity)", report.re_coherence_parity, 0.22, 0.04))
    checks.append(Check(f"{label}parity vs mean agreement [sigma]", report.parity_agreement_sigma, 0.0, 2.0))
    return checks


def simulate_and_analyze(cfg: RunConfig, shots: int | None = None, workers: int | None = None):
    p, n = cfg.sequence_params(), cfg.noise_params()
    scan = run_scan(p, n, cfg.thetas(), shots or cfg.shots_per_theta, cfg.master_seed, workers or cfg.workers)
    return scan, analyze_tallies(scan.tallies, p.omega_raman)


def reproduce_reference(cfg: RunConfig, shots: int = 10_000) -> tuple[list[Check], dict]:
    """Run both pulse separations plus the analytic checks."""
    p = cfg.sequence_params()
    checks = dephasing_checks(p, seed=cfg.master_seed) + blockade_checks(p)

    recap, recap_err = pair_recapture_probability(p, cfg.noise_params(), shots, cfg.master_seed)
    checks.append(window("p_recap (no push-out)", recap, 0.62, 0.03))

    _, short = simulate_and_analyze(cfg.replace(delay_ns=30.0), shots)
    _, long = simulate_and_analyze(cfg.replace(delay_ns=600.0), shots)
    checks += table_checks(short)
    ratio = long.density.re_coherence / short.density.re_coherence
    checks.append(window("Re rho ratio 600 ns / 30 ns", ratio, 0.5, 0.15))
    details = {
        "shots_per_theta": shots,
        "master_seed": cfg.master_seed,
        "p_recap": {"value": recap, "err": recap_err},
        "delay_30ns": short.to_dict(),
        "delay_600ns": long.to_dict(),
    }
    return checks, details

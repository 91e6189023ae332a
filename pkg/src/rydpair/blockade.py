"""Excitation and mapping Hamiltonians with a finite Rydberg blockade shift.

Rotating frame, intermediate 5p1/2 level adiabatically eliminated. Couplings
follow H = (Omega/2)(|a><b| + h.c.); the doubly excited |r, r> carries the
interaction energy delta_E.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

import numpy as np

from .fitting import FitError, dominant_frequency, fit_oscillation
from .hilbert import AtomLevel, DIM, basis_state, evolve, index, propagator

TWO_PI = 2 * np.pi
AMU = 1.66053906660e-27
RB87_MASS = 86.909180527 * AMU

D, U, R = AtomLevel.DOWN, AtomLevel.UP, AtomLevel.RYD


def two_photon_wavevector(lambda_1: float = 475e-9, lambda_2: float = 795e-9) -> float:
    """|k1 + k2| for two beams crossing at right angles (1/m)."""
    return float(np.hypot(TWO_PI / lambda_1, TWO_PI / lambda_2))


@dataclass(frozen=True)
class SequenceParams:
    """Physical knobs of one entangling sequence (SI units, angular frequencies).

    ``t_excite`` and ``t_map`` default to the pi-pulse durations
    pi/(sqrt(2) omega_up_r) and pi/omega_r_down when left as None.
    """

    omega_up_r: float = TWO_PI * 6e6
    omega_r_down: float = TWO_PI * 5e6
    omega_raman: float = TWO_PI * 1e6
    delta_E: float = TWO_PI * 50e6
    t_excite: float | None = None
    t_map: float | None = None
    t_delay: float = 30e-9
    k_eff: float = field(default_factory=two_photon_wavevector)
    temperature: float = 60e-6
    atom_mass: float = RB87_MASS
    detuning_two_photon: float = 0.0

    def __post_init__(self):
        if self.t_excite is None:
            object.__setattr__(self, "t_excite", np.pi / (np.sqrt(2) * self.omega_up_r))
        if self.t_map is None:
            object.__setattr__(self, "t_map", np.pi / self.omega_r_down)
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v}")
            if f.name != "detuning_two_photon" and v < 0:
                raise ValueError(f"{f.name} must be >= 0, got {v}")
        if self.k_eff <= 0:
            raise ValueError("k_eff must be > 0")
        if self.atom_mass <= 0:
            raise ValueError("atom_mass must be > 0")

    @property
    def sequence_duration(self) -> float:
        """Start of excitation to end of mapping; the free-flight time of the phase."""
        return self.t_excite + self.t_delay + self.t_map

    def replace(self, **changes) -> "SequenceParams":
        return replace(self, **changes)


def _rydberg_count() -> np.ndarray:
    n = np.zeros(DIM)
    for a in AtomLevel:
        for b in AtomLevel:
            n[index(a, b)] = (a == R) + (b == R)
    return n


RYDBERG_COUNT = _rydberg_count()


def _single_atom_coupling(lo: AtomLevel, hi: AtomLevel, omega: float) -> np.ndarray:
    H = np.zeros((DIM, DIM), dtype=complex)
    for other in AtomLevel:
        # atom a flips, atom b spectator
        H[index(hi, other), index(lo, other)] += omega / 2
        # atom b flips, atom a spectator
        H[index(other, hi), index(other, lo)] += omega / 2
    return H + H.conj().T


def interaction_hamiltonian(p: SequenceParams, detuning: float = 0.0) -> np.ndarray:
    """Diagonal part: blockade shift on |r,r> and -detuning per Rydberg excitation."""
    diag = -detuning * RYDBERG_COUNT
    diag[index(R, R)] += p.delta_E
    return np.diag(diag).astype(complex)


def excitation_hamiltonian(p: SequenceParams, omega: float | None = None, detuning: float | None = None) -> np.ndarray:
    """Couples |up> <-> |r> on both atoms; |down> is a spectator."""
    omega = p.omega_up_r if omega is None else omega
    detuning = p.detuning_two_photon if detuning is None else detuning
    return _single_atom_coupling(U, R, omega) + interaction_hamiltonian(p, detuning)


def mapping_hamiltonian(p: SequenceParams) -> np.ndarray:
    """Couples |r> <-> |down> on both atoms; |up> is a spectator."""
    return _single_atom_coupling(D, R, p.omega_r_down) + interaction_hamiltonian(p)


def collective_rydberg_state() -> np.ndarray:
    """(|r, up> + |up, r>)/sqrt(2) as a 9-vector (laser phases dropped)."""
    v = np.zeros(DIM, dtype=complex)
    v[index(R, U)] = v[index(U, R)] = 1 / np.sqrt(2)
    return v


def double_excitation_probability(p: SequenceParams, t: float | None = None) -> float:
    """Population of |r, r> after exciting |up, up> for ``t`` (default ``p.t_excite``)."""
    t = p.t_excite if t is None else t
    psi = evolve(basis_state(U, U), excitation_hamiltonian(p), t)
    return float(abs(psi.amplitudes[index(R, R)]) ** 2)


def collective_oscillation_frequency(p: SequenceParams, periods: float = 12.0, n_points: int = 1200) -> float:
    """Fitted angular frequency of the |up, up> population under excitation.

    Tends to sqrt(2) * omega_up_r under strong blockade and to omega_up_r for
    delta_E = 0.
    """
    if p.omega_up_r <= 0:
        raise ValueError("omega_up_r must be > 0")
    H = excitation_hamiltonian(p)
    t_max = periods * TWO_PI / p.omega_up_r
    t = np.linspace(0.0, t_max, n_points)
    evals, evecs = np.linalg.eigh(H)
    c0 = evecs.conj().T @ basis_state(U, U).amplitudes
    amps = (evecs[index(U, U)] * c0)[None, :] * np.exp(-1j * np.outer(t, evals))
    pop = np.abs(amps.sum(axis=1)) ** 2
    if np.ptp(pop) < 1e-3:
        raise FitError("|up, up> population does not oscillate")
    omega0 = dominant_frequency(t, pop)
    fit = fit_oscillation(t, pop, np.full_like(t, 1e-3), omega0)
    return fit.omega

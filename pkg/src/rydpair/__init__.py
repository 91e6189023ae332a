"""Simulation and analysis of two-atom entanglement by Rydberg blockade."""

__version__ = "0.1.0"

from .analysis import analyze_tallies, coherence_from_parity, extract_density, extract_losses, fidelity
from .blockade import (
    SequenceParams,
    collective_oscillation_frequency,
    double_excitation_probability,
    excitation_hamiltonian,
    mapping_hamiltonian,
)
from .fitting import FitError, OscillationFit, fit_oscillation
from .hilbert import AtomLevel, TwoAtomState, basis_state, bell_state, evolve, population, raman_rotation
from .noise import NoiseParams, VelocityPair, dephasing_factor, motional_phase, sample_velocities
from .protocol import ShotRecord, ShotTally, parity_signal, run_scan, run_shot

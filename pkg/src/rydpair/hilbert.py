"""Two-atom state vectors over the {down, up, rydberg} basis of each atom.

Basis index of |a, b> is ``3 * a + b`` (atom a is the slow index).
Operators are plain 9x9 complex ndarrays; Hamiltonians are in rad/s.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

DIM = 9
HERMITIAN_RTOL = 1e-12


class AtomLevel(IntEnum):
    DOWN = 0  # |F=1, M=1>
    UP = 1  # |F=2, M=2>
    RYD = 2  # |58d3/2, F=3, M=3>


def index(a: AtomLevel, b: AtomLevel) -> int:
    return 3 * int(a) + int(b)


@dataclass(frozen=True)
class TwoAtomState:
    amplitudes: np.ndarray
    global_time: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(DIM)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def amplitude(self, a: AtomLevel, b: AtomLevel) -> complex:
        return complex(self.amplitudes[index(a, b)])

    def overlap(self, other: "TwoAtomState") -> complex:
        """<other|self>."""
        return complex(np.vdot(other.amplitudes, self.amplitudes))


def basis_state(a: AtomLevel, b: AtomLevel) -> TwoAtomState:
    amps = np.zeros(DIM, dtype=complex)
    amps[index(a, b)] = 1.0
    return TwoAtomState(amps)


def bell_state(phase: float = 0.0) -> TwoAtomState:
    """(|down, up> + e^{i phase} |up, down>) / sqrt(2); phase 0 is |Psi+>."""
    amps = np.zeros(DIM, dtype=complex)
    amps[index(AtomLevel.DOWN, AtomLevel.UP)] = 1 / np.sqrt(2)
    amps[index(AtomLevel.UP, AtomLevel.DOWN)] = np.exp(1j * phase) / np.sqrt(2)
    return TwoAtomState(amps)


def is_hermitian(op: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    op = np.asarray(op)
    scale = max(float(np.max(np.abs(op))), 1.0) if op.size else 1.0
    return bool(np.max(np.abs(op - op.conj().swapaxes(-1, -2))) <= rtol * scale)


def propagator(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-i H t) from the Hermitian eigendecomposition of ``H``.

    ``H`` may be a stack of shape (..., n, n); the result has the same shape.
    """
    H = np.asarray(H, dtype=complex)
    if not is_hermitian(H):
        raise ValueError("Hamiltonian is not Hermitian")
    if t < 0:
        raise ValueError(f"evolution time must be >= 0, got {t}")
    evals, evecs = np.linalg.eigh(H)
    phases = np.exp(-1j * evals * t)
    return (evecs * phases[..., None, :]) @ evecs.conj().swapaxes(-1, -2)


def evolve(state: TwoAtomState, H: np.ndarray, t: float) -> TwoAtomState:
    """Schrodinger evolution ``exp(-iHt) |state>``; advances ``global_time`` by ``t``."""
    U = propagator(H, t)
    return TwoAtomState(U @ state.amplitudes, state.global_time + t)


def raman_matrix(theta: float, phi: float) -> np.ndarray:
    """Single-atom Raman rotation on the (down, up) qubit.

    Columns are input states: |up> -> cos(theta/2)|up> + i e^{i phi} sin(theta/2)|down>,
    |down> -> i e^{-i phi} sin(theta/2)|up> + cos(theta/2)|down>.
    """
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, 1j * np.exp(1j * phi) * s], [1j * np.exp(-1j * phi) * s, c]], dtype=complex
    )


def raman_matrix_3level(theta, phi) -> np.ndarray:
    """Raman rotation embedded in the 3-level space, identity on |r>.

    ``theta`` and ``phi`` broadcast; output shape is ``broadcast_shape + (3, 3)``.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    R = np.zeros(theta.shape + (3, 3), dtype=complex)
    R[..., 0, 0] = c
    R[..., 1, 1] = c
    R[..., 0, 1] = 1j * np.exp(1j * phi) * s
    R[..., 1, 0] = 1j * np.exp(-1j * phi) * s
    R[..., 2, 2] = 1.0
    return R


def apply_local(amps: np.ndarray, Ra: np.ndarray, Rb: np.ndarray) -> np.ndarray:
    """Apply Ra (x) Rb to a stack of 9-vectors without forming the 9x9 product."""
    psi = np.asarray(amps).reshape(amps.shape[:-1] + (3, 3))
    out = np.einsum("...ij,...jk,...lk->...il", Ra, psi, Rb)
    return out.reshape(amps.shape)


def rydberg_population(state: TwoAtomState) -> float:
    amps = state.amplitudes.reshape(3, 3)
    mask = np.zeros((3, 3), bool)
    mask[2, :] = True
    mask[:, 2] = True
    return float(np.sum(np.abs(amps[mask]) ** 2))


def raman_rotation(state: TwoAtomState, theta: float, phi: float, atol: float = 1e-12) -> TwoAtomState:
    """Global Raman pulse of area ``theta`` and phase ``phi`` on both atoms."""
    if rydberg_population(state) > atol:
        raise ValueError("Raman rotation applied to a state with Rydberg population")
    R = raman_matrix_3level(theta, phi)
    return TwoAtomState(apply_local(state.amplitudes, R, R), state.global_time)


def population(state: TwoAtomState, a: AtomLevel, b: AtomLevel) -> float:
    return float(abs(state.amplitudes[index(a, b)]) ** 2)


def populations(state: TwoAtomState) -> np.ndarray:
    """3x3 array of joint populations indexed [level_a, level_b]."""
    return (np.abs(state.amplitudes) ** 2).reshape(3, 3)

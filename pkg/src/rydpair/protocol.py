"""Shot-level simulation of the entangling sequence and push-out readout.

A shot runs: |up, up> -> excitation pulse -> delay -> mapping pulse ->
motional phase on |up, down> -> Rydberg projection -> Raman analysis pulse
with random phase -> classical losses -> push-out readout.

Shots are simulated in fixed-size chunks, each with its own counter-based
random stream keyed by (theta index, chunk index). Results therefore do not
depend on how chunks are scheduled across threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .blockade import (
    RYDBERG_COUNT,
    SequenceParams,
    excitation_hamiltonian,
    interaction_hamiltonian,
    mapping_hamiltonian,
)
from .hilbert import DIM, AtomLevel, TwoAtomState, apply_local, basis_state, index, propagator, raman_matrix_3level
from .noise import K_DIRECTION, NoiseParams, classical_loss, make_rng, phase_spread, read_presence

CHUNK_SIZE = 2048

D, U, R = AtomLevel.DOWN, AtomLevel.UP, AtomLevel.RYD
_UP_DOWN = index(U, D)
_INIT = basis_state(U, U).amplitudes


@dataclass(frozen=True)
class ShotRecord:
    theta: float
    recaptured_a: bool
    recaptured_b: bool
    seed_index: int


@dataclass(frozen=True)
class ShotTally:
    """Joint recapture counts at one analysis angle; ``n_ab`` has a then b."""

    theta: float
    n00: int
    n01: int
    n10: int
    n11: int

    @classmethod
    def from_outcomes(cls, theta: float, rec_a, rec_b) -> "ShotTally":
        a = np.asarray(rec_a, dtype=bool)
        b = np.asarray(rec_b, dtype=bool)
        return cls(
            theta=float(theta),
            n00=int(np.sum(~a & ~b)),
            n01=int(np.sum(~a & b)),
            n10=int(np.sum(a & ~b)),
            n11=int(np.sum(a & b)),
        )

    def merge(self, other: "ShotTally") -> "ShotTally":
        if other.theta != self.theta:
            raise ValueError("cannot merge tallies at different angles")
        return ShotTally(self.theta, self.n00 + other.n00, self.n01 + other.n01, self.n10 + other.n10, self.n11 + other.n11)

    __add__ = merge

    @property
    def n(self) -> int:
        return self.n00 + self.n01 + self.n10 + self.n11

    def _p(self, count: int) -> float:
        return count / self.n if self.n else float("nan")

    @property
    def P_00(self) -> float:
        return self._p(self.n00)

    @property
    def P_01(self) -> float:
        return self._p(self.n01)

    @property
    def P_10(self) -> float:
        return self._p(self.n10)

    @property
    def P_11(self) -> float:
        return self._p(self.n11)

    @property
    def P_a(self) -> float:
        return self._p(self.n10 + self.n11)

    @property
    def P_b(self) -> float:
        return self._p(self.n01 + self.n11)

    def stat_err(self, name: str) -> float:
        """Binomial standard error sqrt(P(1-P)/n) of probability ``name``."""
        P = getattr(self, name)
        return float(np.sqrt(P * (1 - P) / self.n))

    def probabilities(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in ("P_a", "P_b", "P_00", "P_01", "P_10", "P_11")}


def parity_signal(tally: ShotTally) -> tuple[float, float]:
    """P_00 + P_11 - P_01 - P_10 and its binomial error."""
    q = tally.P_01 + tally.P_10
    value = tally.P_00 + tally.P_11 - q
    return float(value), float(2 * np.sqrt(q * (1 - q) / tally.n))


class _Propagators:
    """Pulse propagators shared by all shots of one parameter set."""

    def __init__(self, p: SequenceParams, n: NoiseParams):
        self.p = p
        self.n = n
        self.fluctuating = n.excite_detuning_rms > 0 or n.excite_intensity_rms > 0
        self.U_map = propagator(mapping_hamiltonian(p), p.t_map)
        if not self.fluctuating:
            self.U_exc = propagator(excitation_hamiltonian(p), p.t_excite)
            self.U_idle = propagator(interaction_hamiltonian(p, p.detuning_two_photon), p.t_delay)

    def entangle(self, g_int: np.ndarray, g_det: np.ndarray) -> np.ndarray:
        """State after excitation, delay and mapping, shape (count, 9)."""
        p, n = self.p, self.n
        if not self.fluctuating:
            psi = self.U_map @ self.U_idle @ self.U_exc @ _INIT
            return np.broadcast_to(psi, (g_int.size, DIM)).copy()
        scale = np.sqrt(np.clip(1.0 + n.excite_intensity_rms * g_int, 0.0, None))
        detuning = p.detuning_two_photon + n.excite_detuning_rms * g_det
        coupling = excitation_hamiltonian(p, omega=1.0, detuning=0.0) - interaction_hamiltonian(p)
        diag = -detuning[:, None] * RYDBERG_COUNT
        diag[:, index(R, R)] += p.delta_E
        H = (p.omega_up_r * scale)[:, None, None] * coupling
        H[:, np.arange(DIM), np.arange(DIM)] += diag
        psi = propagator(H, p.t_excite) @ _INIT
        psi = psi * np.exp(-1j * diag * p.t_delay)
        return psi @ self.U_map.T


def _draw(rng: np.random.Generator, cumulative: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Index sampled per row from row-wise cumulative probabilities."""
    cumulative = cumulative / cumulative[:, -1:]
    return np.minimum((u[:, None] >= cumulative).sum(axis=1), cumulative.shape[1] - 1)


def simulate_shots(
    p: SequenceParams,
    n: NoiseParams,
    theta: float,
    count: int,
    rng: np.random.Generator,
    push_out: bool = True,
    props: _Propagators | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulate ``count`` shots at analysis angle ``theta``.

    Returns boolean arrays (recaptured_a, recaptured_b). With ``push_out``
    False the readout reports presence regardless of the internal state.
    """
    props = props or _Propagators(p, n)
    # fixed draw order keeps streams stable whatever knobs are enabled
    g_int = rng.standard_normal(count)
    g_det = rng.standard_normal(count)
    g_vel = rng.standard_normal(count)
    phi_raman = rng.uniform(0.0, 2 * np.pi, count)
    u_proj = rng.random(count)
    u_meas = rng.random(count)
    u_loss = rng.random((count, 2, 3))
    u_read = rng.random((count, 2))

    psi = props.entangle(g_int, g_det)

    # (v_b - v_a) . k_hat is Gaussian with twice the per-component variance
    phi_motion = phase_spread(p.temperature, p.atom_mass, p.k_eff, p.sequence_duration) * g_vel
    psi[:, _UP_DOWN] *= np.exp(1j * phi_motion)

    # project each atom onto {qubit, |r>}; outcome k = 2*ryd_a + ryd_b
    pops = np.abs(psi.reshape(count, 3, 3)) ** 2
    qa = np.array([True, True, False])
    blocks = np.stack(
        [
            pops[:, qa][:, :, qa].sum(axis=(1, 2)),
            pops[:, qa, 2].sum(axis=1),
            pops[:, 2, qa].sum(axis=1),
            pops[:, 2, 2],
        ],
        axis=1,
    )
    outcome = _draw(rng, np.cumsum(blocks, axis=1), u_proj)
    ryd_a = outcome >= 2
    ryd_b = (outcome % 2) == 1
    keep = np.empty((count, 3, 3), dtype=bool)
    level_is_r = np.array([False, False, True])
    keep[:] = (level_is_r[None, :, None] == ryd_a[:, None, None]) & (level_is_r[None, None, :] == ryd_b[:, None, None])
    psi = np.where(keep.reshape(count, DIM), psi, 0.0)
    psi /= np.linalg.norm(psi, axis=1, keepdims=True)

    Rm = raman_matrix_3level(theta, phi_raman)
    psi = apply_local(psi, Rm, Rm)

    probs = np.abs(psi) ** 2
    k = _draw(rng, np.cumsum(probs, axis=1), u_meas)
    levels = np.stack([k // 3, k % 3], axis=1)

    lost = classical_loss(u_loss, n) | (levels == R)
    present = ~lost
    if push_out:
        present &= levels == D
    rec = read_presence(present, n, u_read)
    return rec[:, 0], rec[:, 1]


def run_shot(p: SequenceParams, n: NoiseParams, theta: float, rng: np.random.Generator, seed_index: int = 0) -> ShotRecord:
    a, b = simulate_shots(p, n, theta, 1, rng)
    return ShotRecord(float(theta), bool(a[0]), bool(b[0]), seed_index)


@dataclass(frozen=True)
class ScanResult:
    tallies: list[ShotTally]
    thetas: np.ndarray
    recaptured_a: np.ndarray  # (n_theta, shots)
    recaptured_b: np.ndarray
    master_seed: int

    def records(self):
        for i, theta in enumerate(self.thetas):
            for j in range(self.recaptured_a.shape[1]):
                yield ShotRecord(float(theta), bool(self.recaptured_a[i, j]), bool(self.recaptured_b[i, j]), j)


def run_scan(
    p: SequenceParams,
    n: NoiseParams,
    thetas,
    shots_per_theta: int,
    master_seed: int | None = None,
    workers: int = 1,
    push_out: bool = True,
) -> ScanResult:
    """Independent shots at every angle of ``thetas``.

    Chunk (i, c) of angle i always draws from ``make_rng(master_seed, i, c)``,
    so ``workers`` changes wall time only.
    """
    if shots_per_theta < 1:
        raise ValueError("shots_per_theta must be >= 1")
    thetas = np.asarray(thetas, dtype=float).ravel()
    if thetas.size == 0:
        raise ValueError("no analysis angles given")
    seed = n.rng_seed if master_seed is None else master_seed
    props = _Propagators(p, n)
    n_chunks = -(-shots_per_theta // CHUNK_SIZE)
    tasks = [(i, c) for i in range(thetas.size) for c in range(n_chunks)]

    def work(task):
        i, c = task
        count = min(CHUNK_SIZE, shots_per_theta - c * CHUNK_SIZE)
        return simulate_shots(p, n, thetas[i], count, make_rng(seed, i, c), push_out, props)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    rec_a = np.empty((thetas.size, shots_per_theta), dtype=bool)
    rec_b = np.empty_like(rec_a)
    for (i, c), (a, b) in zip(tasks, results):
        sl = slice(c * CHUNK_SIZE, c * CHUNK_SIZE + a.size)
        rec_a[i, sl] = a
        rec_b[i, sl] = b
    tallies = [ShotTally.from_outcomes(t, rec_a[i], rec_b[i]) for i, t in enumerate(thetas)]
    return ScanResult(tallies, thetas, rec_a, rec_b, seed)


def entangled_state(p: SequenceParams) -> TwoAtomState:
    """Noiseless state after excitation, delay and mapping (no motional phase)."""
    props = _Propagators(p, NoiseParams.noiseless())
    psi = props.entangle(np.zeros(1), np.zeros(1))[0]
    return TwoAtomState(psi, p.sequence_duration)


def pair_recapture_probability(p: SequenceParams, n: NoiseParams, shots: int, master_seed: int = 0) -> tuple[float, float]:
    """Fraction of shots with both atoms read present when no push-out is applied."""
    scan = run_scan(p, n, [0.0], shots, master_seed, push_out=False)
    t = scan.tallies[0]
    return t.P_11, t.stat_err("P_11")

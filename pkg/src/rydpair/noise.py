"""Loss channels, readout errors and thermal motional dephasing.

Every probability here is a per-atom classical Bernoulli event; the only
quantum part is the random relative phase picked up by |up, down> when the
atoms fly freely with thermal velocities.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from enum import Enum

import numpy as np
from scipy.constants import k as K_B

from .blockade import TWO_PI
from .hilbert import AtomLevel

# beam geometry: 795 nm lasers along x, 475 nm laser along z
K_DIRECTION = np.array([TWO_PI / 795e-9, 0.0, TWO_PI / 475e-9])
K_DIRECTION = K_DIRECTION / np.linalg.norm(K_DIRECTION)


@dataclass(frozen=True)
class NoiseParams:
    """Per-atom error budget. Defaults are the budget quoted for the experiment.

    ``p_detect_err`` is the chance a present atom is missed at readout and
    ``p_false_recapture`` the chance an empty trap reads as occupied.
    ``excite_detuning_rms`` (rad/s) and ``excite_intensity_rms`` (relative)
    are shot-to-shot Gaussian fluctuations of the excitation laser.
    """

    p_spont_leak: float = 0.07
    p_map_fail: float = 0.07
    p_trap_loss: float = 0.03
    p_detect_err: float = 0.03
    p_false_recapture: float = 0.0
    excite_detuning_rms: float = TWO_PI * 3e6
    excite_intensity_rms: float = 0.05
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("p_spont_leak", "p_map_fail", "p_trap_loss", "p_detect_err", "p_false_recapture"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.excite_detuning_rms < 0 or self.excite_intensity_rms < 0:
            raise ValueError("fluctuation amplitudes must be >= 0")

    @classmethod
    def noiseless(cls, rng_seed: int = 0) -> "NoiseParams":
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, rng_seed)

    @property
    def classical_loss_probs(self) -> tuple[float, float, float]:
        return (self.p_spont_leak, self.p_trap_loss, self.p_map_fail)

    @property
    def survival(self) -> float:
        """Probability an atom escapes all classical loss channels."""
        return float(np.prod([1.0 - q for q in self.classical_loss_probs]))

    def replace(self, **changes) -> "NoiseParams":
        return replace(self, **changes)


def make_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Counter-based Philox stream for ``key`` under ``master_seed``.

    Streams for distinct keys are independent, so work split by key gives
    the same numbers whatever order or thread it runs on.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class VelocityPair:
    v_a: np.ndarray
    v_b: np.ndarray

    def __post_init__(self):
        for name in ("v_a", "v_b"):
            v = np.asarray(getattr(self, name), dtype=float).reshape(3)
            if not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, v)


def thermal_velocity_sigma(temperature: float, mass: float) -> float:
    """Per-component velocity spread sqrt(k_B T / M) in m/s."""
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    return float(np.sqrt(K_B * temperature / mass))


def sample_velocities(temperature: float, mass: float, rng: np.random.Generator) -> VelocityPair:
    sigma = thermal_velocity_sigma(temperature, mass)
    v = rng.standard_normal((2, 3)) * sigma
    return VelocityPair(v[0], v[1])


def sample_velocity_array(temperature: float, mass: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` velocity pairs as an array of shape (size, 2, 3)."""
    return rng.standard_normal((size, 2, 3)) * thermal_velocity_sigma(temperature, mass)


def motional_phase(v: VelocityPair, k_eff: float, delta_t: float, direction: np.ndarray = K_DIRECTION) -> float:
    """k_eff * (v_b - v_a) . k_hat * delta_t, in radians."""
    if delta_t < 0:
        raise ValueError("delta_t must be >= 0")
    return float(k_eff * np.dot(v.v_b - v.v_a, direction) * delta_t)


def phase_spread(temperature: float, mass: float, k_eff: float, delta_t: float) -> float:
    """Standard deviation of the motional phase, sqrt(2 k_B T / M) k_eff delta_t."""
    return float(np.sqrt(2.0) * thermal_velocity_sigma(temperature, mass) * k_eff * delta_t)


def dephasing_factor(temperature: float, mass: float, k_eff: float, delta_t: float) -> float:
    """Thermal average of exp(i phi): exp(-dphi^2 / 2)."""
    if min(temperature, k_eff, delta_t) < 0:
        raise ValueError("inputs must be >= 0")
    dphi = phase_spread(temperature, mass, k_eff, delta_t)
    return float(np.exp(-0.5 * dphi**2))


class Fate(Enum):
    PRESENT = "present"
    LOST = "lost"


def classical_loss(u: np.ndarray, n: NoiseParams) -> np.ndarray:
    """Loss flags from uniforms ``u`` of shape (..., 3), one per channel."""
    probs = np.array(n.classical_loss_probs)
    return np.any(np.asarray(u) < probs, axis=-1)


def apply_loss_channels(level, n: NoiseParams, rng: np.random.Generator) -> Fate:
    """Fate of one atom after the mapping pulse.

    ``level`` is the atom's projected level; an atom found in |r> is untrapped
    and always lost.
    """
    u = rng.random(3)
    if AtomLevel(level) == AtomLevel.RYD or classical_loss(u, n):
        return Fate.LOST
    return Fate.PRESENT


def read_presence(present: np.ndarray, n: NoiseParams, u: np.ndarray) -> np.ndarray:
    """Fluorescence readout with missed detections and false recaptures."""
    present = np.asarray(present, dtype=bool)
    u = np.asarray(u)
    return np.where(present, u >= n.p_detect_err, u < n.p_false_recapture)

"""Run configuration: a line-oriented ``key = value`` file with optional sections.

Grammar
-------
* ``# ...`` starts a comment (whole line or trailing).
* ``[section]`` opens one of ``sequence``, ``noise``, ``run``, ``sweep``.
  Sections are optional; every key name is unique across sections, but a
  key placed under the wrong section is rejected.
* ``key = value``. Units live in the key suffix (``_MHz``, ``_ns``,
  ``_uK``, ``_u``, ``_per_m``, ``_rad``); frequencies are cyclic (f = omega/2pi).
  Writing a unit-carrying key without its suffix is an error.
* ``t_excite_ns`` and ``t_map_ns`` accept ``auto`` (pi-pulse duration).
* ``theta_list_rad`` and ``sweep_values`` take comma-separated numbers.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

from .blockade import AMU, TWO_PI, SequenceParams, two_photon_wavevector
from .noise import NoiseParams

MODES = ("simulate", "analyze", "reproduce-paper", "sweep")
OUTPUT_ENV = "RYDPAIR_OUT"


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class RunConfig:
    # [sequence] -- values quoted for the experiment
    omega_up_r_MHz: float = 6.0
    omega_r_down_MHz: float = 5.0
    omega_raman_MHz: float = 1.0
    delta_E_MHz: float = 50.0
    t_excite_ns: float | None = None
    t_map_ns: float | None = None
    delay_ns: float = 30.0
    k_eff_per_m: float = field(default_factory=two_photon_wavevector)
    temperature_uK: float = 60.0
    atom_mass_u: float = 86.909180527
    detuning_MHz: float = 0.0
    # [noise]
    p_spont_leak: float = 0.07
    p_map_fail: float = 0.07
    p_trap_loss: float = 0.03
    p_detect_err: float = 0.03
    p_false_recapture: float = 0.0
    excite_detuning_rms_MHz: float = 3.0
    excite_intensity_rms: float = 0.05
    # [run]
    mode: str = "simulate"
    theta_min_rad: float = 0.0
    theta_max_rad: float = TWO_PI
    theta_steps: int = 24
    theta_list_rad: tuple = ()
    shots_per_theta: int = 100
    master_seed: int = 0
    output_dir: str = field(default_factory=lambda: os.environ.get(OUTPUT_ENV, "out"))
    workers: int = 1
    # [sweep]
    sweep_key: str = "delay_ns"
    sweep_values: tuple = (30.0, 600.0)

    def sequence_params(self) -> SequenceParams:
        return SequenceParams(
            omega_up_r=TWO_PI * self.omega_up_r_MHz * 1e6,
            omega_r_down=TWO_PI * self.omega_r_down_MHz * 1e6,
            omega_raman=TWO_PI * self.omega_raman_MHz * 1e6,
            delta_E=TWO_PI * self.delta_E_MHz * 1e6,
            t_excite=None if self.t_excite_ns is None else self.t_excite_ns * 1e-9,
            t_map=None if self.t_map_ns is None else self.t_map_ns * 1e-9,
            t_delay=self.delay_ns * 1e-9,
            k_eff=self.k_eff_per_m,
            temperature=self.temperature_uK * 1e-6,
            atom_mass=self.atom_mass_u * AMU,
            detuning_two_photon=TWO_PI * self.detuning_MHz * 1e6,
        )

    def noise_params(self) -> NoiseParams:
        return NoiseParams(
            p_spont_leak=self.p_spont_leak,
            p_map_fail=self.p_map_fail,
            p_trap_loss=self.p_trap_loss,
            p_detect_err=self.p_detect_err,
            p_false_recapture=self.p_false_recapture,
            excite_detuning_rms=TWO_PI * self.excite_detuning_rms_MHz * 1e6,
            excite_intensity_rms=self.excite_intensity_rms,
            rng_seed=self.master_seed,
        )

    def thetas(self):
        import numpy as np

        if self.theta_list_rad:
            return np.array(self.theta_list_rad, dtype=float)
        return np.linspace(self.theta_min_rad, self.theta_max_rad, self.theta_steps)

    def replace(self, **changes) -> "RunConfig":
        return replace(self, **changes)


SECTIONS = {
    "sequence": (
        "omega_up_r_MHz", "omega_r_down_MHz", "omega_raman_MHz", "delta_E_MHz", "t_excite_ns",
        "t_map_ns", "delay_ns", "k_eff_per_m", "temperature_uK", "atom_mass_u", "detuning_MHz",
    ),
    "noise": (
        "p_spont_leak", "p_map_fail", "p_trap_loss", "p_detect_err", "p_false_recapture",
        "excite_detuning_rms_MHz", "excite_intensity_rms",
    ),
    "run": (
        "mode", "theta_min_rad", "theta_max_rad", "theta_steps", "theta_list_rad",
        "shots_per_theta", "master_seed", "output_dir", "workers",
    ),
    "sweep": ("sweep_key", "sweep_values"),
}
KEY_SECTION = {k: s for s, keys in SECTIONS.items() for k in keys}
UNIT_SUFFIXES = ("_MHz", "_ns", "_uK", "_u", "_per_m", "_rad")
UNITLESS_BASE = {k[: -len(suf)]: k for k in KEY_SECTION for suf in UNIT_SUFFIXES if k.endswith(suf)}

COMMENTS = {
    "omega_up_r_MHz": "two-photon Rabi frequency up <-> r for one atom (6 MHz)",
    "omega_r_down_MHz": "two-photon Rabi frequency r <-> down (5 MHz)",
    "omega_raman_MHz": "Raman analysis Rabi frequency (calibration, not quoted)",
    "delta_E_MHz": "blockade shift of |r,r> (50 MHz at 4 um)",
    "t_excite_ns": "auto = pi / (sqrt(2) omega_up_r)",
    "t_map_ns": "auto = pi / omega_r_down",
    "delay_ns": "gap between excitation and mapping pulses (30 or 600 ns)",
    "k_eff_per_m": "two-photon wavevector, 475 nm and 795 nm beams at right angles",
    "temperature_uK": "atom temperature (60 uK)",
    "atom_mass_u": "87Rb",
    "detuning_MHz": "static two-photon detuning of the excitation",
    "p_spont_leak": "spontaneous emission into down, then lost (~7%)",
    "p_map_fail": "atom left in r by the mapping pulse (~7%)",
    "p_trap_loss": "loss while the trap is off (~3%)",
    "p_detect_err": "present atom missed at readout (~3%)",
    "p_false_recapture": "empty trap read as occupied",
    "excite_detuning_rms_MHz": "shot-to-shot excitation frequency noise (3 MHz)",
    "excite_intensity_rms": "shot-to-shot excitation intensity noise (5%)",
    "mode": " | ".join(MODES),
    "theta_list_rad": "explicit analysis angles; overrides min/max/steps",
    "shots_per_theta": "repetitions per analysis angle (100)",
    "output_dir": f"default from ${OUTPUT_ENV}",
}


def _convert(key: str, raw: str, line: int | None, col: int | None):
    try:
        if key in ("t_excite_ns", "t_map_ns"):
            return None if raw.lower() == "auto" else float(raw)
        if key in ("theta_list_rad", "sweep_values"):
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if key in ("mode", "output_dir", "sweep_key"):
            return raw
        if key in ("theta_steps", "shots_per_theta", "master_seed", "workers"):
            value = int(raw)
            if str(value) != raw.strip().lstrip("+"):
                raise ValueError
            return value
        return float(raw)
    except ValueError:
        raise ConfigError(f"invalid value {raw!r} for {key}", line, col) from None


def _validate(cfg: RunConfig, positions: dict) -> RunConfig:
    def err(key, msg):
        line, col = positions.get(key, (None, None))
        raise ConfigError(msg, line, col)

    for key in SECTIONS["noise"]:
        if key.startswith("p_") and not 0.0 <= getattr(cfg, key) <= 1.0:
            err(key, f"{key} must be a probability in [0, 1], got {getattr(cfg, key)}")
    nonneg = (
        "omega_up_r_MHz", "omega_r_down_MHz", "omega_raman_MHz", "delta_E_MHz", "delay_ns",
        "temperature_uK", "excite_detuning_rms_MHz", "excite_intensity_rms",
    )
    for key in nonneg:
        v = getattr(cfg, key)
        if not math.isfinite(v) or v < 0:
            err(key, f"{key} must be >= 0, got {v}")
    for key in ("t_excite_ns", "t_map_ns"):
        v = getattr(cfg, key)
        if v is not None and v < 0:
            err(key, f"{key} must be >= 0, got {v}")
    for key in ("k_eff_per_m", "atom_mass_u", "omega_raman_MHz"):
        if not getattr(cfg, key) > 0:
            err(key, f"{key} must be > 0")
    if cfg.mode not in MODES:
        err("mode", f"mode must be one of {', '.join(MODES)}")
    if cfg.shots_per_theta < 1:
        err("shots_per_theta", "shots_per_theta must be >= 1")
    if cfg.theta_steps < 1:
        err("theta_steps", "theta_steps must be >= 1")
    if cfg.workers < 1:
        err("workers", "workers must be >= 1")
    if cfg.master_seed < 0:
        err("master_seed", "master_seed must be >= 0")
    if cfg.sweep_key not in KEY_SECTION or KEY_SECTION[cfg.sweep_key] not in ("sequence", "noise"):
        err("sweep_key", f"sweep_key must name a numeric sequence or noise field, got {cfg.sweep_key!r}")
    return cfg


def _lookup_key(key: str, line: int | None, col: int | None) -> str:
    if key in KEY_SECTION:
        return key
    if key in UNITLESS_BASE:
        raise ConfigError(f"{key!r} needs a unit; write {UNITLESS_BASE[key]!r}", line, col)
    raise ConfigError(f"unknown key {key!r}", line, col)


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse config ``text`` on top of ``base`` (reference defaults when None)."""
    values: dict = {}
    positions: dict = {}
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip()) + 1
        if stripped.startswith("["):
            if not stripped.endswith("]"):
                raise ConfigError("unterminated section header", lineno, indent)
            name = stripped[1:-1].strip()
            if name not in SECTIONS:
                raise ConfigError(f"unknown section [{name}]", lineno, indent)
            section = name
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value'", lineno, indent)
        key, raw = (s.strip() for s in stripped.split("=", 1))
        key = _lookup_key(key, lineno, indent)
        if section is not None and KEY_SECTION[key] != section:
            raise ConfigError(f"{key!r} belongs to [{KEY_SECTION[key]}], not [{section}]", lineno, indent)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", lineno, indent)
        vcol = line.index("=") + 2 + (len(line.split("=", 1)[1]) - len(line.split("=", 1)[1].lstrip()))
        values[key] = _convert(key, raw, lineno, vcol)
        positions[key] = (lineno, vcol)
    cfg = replace(base or RunConfig(), **values)
    return _validate(cfg, positions)


def apply_overrides(cfg: RunConfig, overrides: list[str]) -> RunConfig:
    """Apply ``key=value`` strings as from repeated ``--set`` flags."""
    for i, item in enumerate(overrides, start=1):
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        try:
            cfg = parse_config(item, base=cfg)
        except ConfigError as exc:
            raise ConfigError(f"--set #{i} {item!r}: {exc}") from None
    return cfg


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Serialise ``cfg``; ``parse_config(render_config(cfg)) == cfg``."""
    out = []
    for section, keys in SECTIONS.items():
        out.append(f"[{section}]")
        for key in keys:
            line = f"{key} = {_fmt(getattr(cfg, key))}"
            if key in COMMENTS:
                line = f"{line:<44} # {COMMENTS[key]}"
            out.append(line)
        out.append("")
    return "\n".join(out)

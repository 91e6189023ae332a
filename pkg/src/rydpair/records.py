"""CSV and JSON files exchanged between simulate, analyze and external tools.

All floats are written in scientific notation with 9 significant digits and
columns appear in the fixed order below.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .protocol import ScanResult, ShotTally

SHOT_COLUMNS = ("theta_rad", "rep_index", "recaptured_a", "recaptured_b")
PROB_NAMES = ("P_a", "P_b", "P_00", "P_01", "P_10", "P_11")
TALLY_COLUMNS = ("theta_rad", "n") + PROB_NAMES + tuple(f"err_{p}" for p in PROB_NAMES)
CURVE_COLUMNS = ("theta_rad", "t_s", "model")


def fmt(x: float) -> str:
    return f"{float(x):.8e}"


def write_shots(path: Path, scan: ScanResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SHOT_COLUMNS)
        for i, theta in enumerate(scan.thetas):
            th = fmt(theta)
            for j, (a, b) in enumerate(zip(scan.recaptured_a[i], scan.recaptured_b[i])):
                w.writerow((th, j, int(a), int(b)))


def write_tallies(path: Path, tallies: list[ShotTally]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TALLY_COLUMNS)
        for t in tallies:
            probs = [getattr(t, p) for p in PROB_NAMES]
            errs = [t.stat_err(p) for p in PROB_NAMES]
            w.writerow([fmt(t.theta), t.n] + [fmt(x) for x in probs + errs])


def read_tallies(path: Path) -> list[ShotTally]:
    """Rebuild tallies from joint probabilities and shot counts."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(TALLY_COLUMNS[:8]) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        tallies = []
        for row in reader:
            n = int(row["n"])
            counts = [int(round(float(row[k]) * n)) for k in ("P_00", "P_01", "P_10", "P_11")]
            if sum(counts) != n:
                raise ValueError(f"{path}: joint probabilities at theta={row['theta_rad']} do not sum to 1")
            tallies.append(ShotTally(float(row["theta_rad"]), *counts))
    return tallies


def write_curve(path: Path, fit, omega: float, n_points: int = 241) -> None:
    thetas = np.linspace(0.0, 2 * np.pi, n_points)
    t = thetas / omega
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CURVE_COLUMNS)
        for th, ts, y in zip(thetas, t, fit(t)):
            w.writerow((fmt(th), fmt(ts), fmt(y)))


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialise {type(o).__name__}")

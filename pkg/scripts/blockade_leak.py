"""Coherent double-excitation probability and collective frequency versus the pair shift.

    python scripts/blockade_leak.py
"""

import numpy as np

from rydpair.blockade import SequenceParams, collective_oscillation_frequency, double_excitation_probability


def main():
    base = SequenceParams()
    print(f"{'dE_MHz':>8} {'dE/Omega':>9} {'P_rr':>8} {'Omega_c/(sqrt2 Omega)':>22}")
    for de_mhz in (5, 10, 20, 50, 100, 500, 6000):
        p = base.replace(delta_E=2 * np.pi * de_mhz * 1e6)
        ratio = collective_oscillation_frequency(p) / (np.sqrt(2) * p.omega_up_r)
        print(f"{de_mhz:>8} {p.delta_E / p.omega_up_r:>9.1f} {double_excitation_probability(p):>8.4f} {ratio:>22.4f}")


if __name__ == "__main__":
    main()

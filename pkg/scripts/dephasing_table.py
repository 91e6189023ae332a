"""Thermal dephasing factor versus pulse separation, analytic and sampled.

    python scripts/dephasing_table.py [--temperature-uK 60] [--samples 100000]
"""

import argparse

from rydpair.blockade import SequenceParams
from rydpair.noise import dephasing_factor, make_rng, thermal_velocity_sigma
from rydpair.reproduce import mc_dephasing


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--temperature-uK", type=float, default=60.0)
    ap.add_argument("--samples", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    p = SequenceParams(temperature=args.temperature_uK * 1e-6)
    rng = make_rng(args.seed, 1)
    print(f"{'delay_ns':>9} {'delta_t_ns':>11} {'analytic':>9} {'sampled':>9} {'F_max':>7}")
    for delay in (0, 30, 100, 200, 300, 450, 600, 800, 1000):
        dt = p.replace(t_delay=delay * 1e-9).sequence_duration
        exact = dephasing_factor(p.temperature, p.atom_mass, p.k_eff, dt)
        mc = mc_dephasing(p, dt, args.samples, rng)
        print(f"{delay:>9d} {dt * 1e9:>11.1f} {exact:>9.4f} {mc:>9.4f} {(1 + exact) / 2:>7.4f}")
    print(f"\nk_eff = {p.k_eff:.4e} 1/m, sigma_v = {thermal_velocity_sigma(p.temperature, p.atom_mass):.4f} m/s")


if __name__ == "__main__":
    main()

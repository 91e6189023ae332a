"""Simulate one Raman-angle scan and print the joint recapture probabilities.

    python scripts/raman_scan.py [--shots 2000] [--delay-ns 30] [--noiseless]
"""

import argparse

import numpy as np

from rydpair.analysis import analyze_tallies
from rydpair.blockade import SequenceParams
from rydpair.noise import NoiseParams
from rydpair.protocol import parity_signal, run_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=2000, help="shots per angle")
    ap.add_argument("--delay-ns", type=float, default=30.0)
    ap.add_argument("--steps", type=int, default=24)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--noiseless", action="store_true", help="no losses, T = 0, strong blockade")
    args = ap.parse_args()

    p = SequenceParams(t_delay=args.delay_ns * 1e-9)
    n = NoiseParams()
    if args.noiseless:
        p = p.replace(temperature=0.0, delta_E=1e4 * p.omega_up_r)
        n = NoiseParams.noiseless()
    thetas = np.linspace(0, 2 * np.pi, args.steps)
    scan = run_scan(p, n, thetas, args.shots, args.seed, workers=4)

    print(f"{'theta':>7} {'P_a':>7} {'P_b':>7} {'P_11':>7} {'parity':>8}")
    for t in scan.tallies:
        print(f"{t.theta:>7.3f} {t.P_a:>7.4f} {t.P_b:>7.4f} {t.P_11:>7.4f} {parity_signal(t)[0]:>8.4f}")

    r = analyze_tallies(scan.tallies, p.omega_raman)
    d = r.density
    print(f"\nP_dd {d.p_down_down:.3f}  P_uu {d.p_up_up:.3f}  P_du+P_ud {d.p_mixed_sum:.3f}  "
          f"Re rho {d.re_coherence:.3f}  trace {d.trace:.3f}")
    print(f"F {r.F:.3f} +- {r.err_F:.3f}   F_pairs {r.F_pairs:.3f} +- {r.err_F_pairs:.3f}")


if __name__ == "__main__":
    main()

"""Command line entry point: simulate, analyze, reproduce-paper, sweep."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import AnalysisReport, analyze_tallies
from .config import KEY_SECTION, ConfigError, RunConfig, apply_overrides, parse_config, render_config
from .fitting import FitError
from .protocol import run_scan
from .records import fmt, read_tallies, write_curve, write_json, write_shots, write_tallies
from .reproduce import PUBLISHED, reproduce_reference

log = logging.getLogger("rydpair")


def load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    cfg = apply_overrides(cfg, args.set or [])
    if args.seed is not None:
        cfg = cfg.replace(master_seed=args.seed)
    if args.out is not None:
        cfg = cfg.replace(output_dir=args.out)
    return cfg


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.touch()
        probe.unlink()
    except OSError as exc:
        raise SystemExit(f"error: output directory {out} is not writable: {exc}")
    return out


def _meta(cfg: RunConfig, **extra) -> dict:
    return {"version": __version__, "master_seed": cfg.master_seed, "config": render_config(cfg),
            "config_values": asdict(cfg), **extra}


def cmd_simulate(cfg: RunConfig) -> Path:
    out = _out_dir(cfg)
    scan = run_scan(cfg.sequence_params(), cfg.noise_params(), cfg.thetas(), cfg.shots_per_theta,
                    cfg.master_seed, cfg.workers)
    write_shots(out / "shots.csv", scan)
    write_tallies(out / "tallies.csv", scan.tallies)
    write_json(out / "meta.json", _meta(cfg, command="simulate"))
    log.info("wrote %d shots to %s", scan.recaptured_a.size, out)
    return out


def table_text(report: AnalysisReport) -> str:
    d, e = report.density, report.density.errors
    rows = [
        ("rho_dd,dd = P_dd", d.p_down_down, e["p_down_down"], PUBLISHED["p_down_down"]),
        ("rho_uu,uu = P_uu", d.p_up_up, e["p_up_up"], PUBLISHED["p_up_up"]),
        ("P_du + P_ud", d.p_mixed_sum, e["p_mixed_sum"], PUBLISHED["p_mixed_sum"]),
        ("Re rho_du,ud", d.re_coherence, e["re_coherence"], PUBLISHED["re_coherence"]),
        ("trace", d.trace, e["trace"], PUBLISHED["trace"]),
        ("L_a", d.L_a, e["L_a"], PUBLISHED["L_a"]),
        ("L_b", d.L_b, e["L_b"], PUBLISHED["L_a"]),
        ("L_total", d.L_total, e["L_total"], PUBLISHED["L_total"]),
        ("F", report.F, report.err_F, (None, None)),
        ("F_pairs", report.F_pairs, report.err_F_pairs, PUBLISHED["F_pairs"]),
        ("Re rho_du,ud (parity)", report.re_coherence_parity, report.err_re_coherence_parity,
         PUBLISHED["re_coherence_parity"]),
    ]
    lines = [f"{'element':<24}{'value':>10}{'error':>10}{'published':>16}", "-" * 60]
    for name, v, err, (ref, ref_err) in rows:
        pub = "" if ref is None else f"{ref:.2f}" + (f" ± {ref_err:.2f}" if ref_err else "")
        lines.append(f"{name:<24}{v:>10.4f}{err:>10.4f}{pub:>16}")
    for flag in d.flags:
        lines.append(f"warning: {flag}")
    return "\n".join(lines) + "\n"


def cmd_analyze(cfg: RunConfig, tallies_path: Path | None = None) -> Path:
    out = _out_dir(cfg)
    tallies_path = tallies_path or out / "tallies.csv"
    meta_path = tallies_path.with_name("meta.json")
    omega = cfg.sequence_params().omega_raman
    if meta_path.exists():
        omega_mhz = json.loads(meta_path.read_text())["config_values"]["omega_raman_MHz"]
        omega = 2 * np.pi * omega_mhz * 1e6
    tallies = read_tallies(tallies_path)
    try:
        report = analyze_tallies(tallies, omega)
    except FitError as exc:
        raise SystemExit(f"error: fit failed on {tallies_path}: {exc}")
    write_json(out / "report.json", {"source": str(tallies_path), "omega_raman": omega, **report.to_dict()})
    (out / "report.txt").write_text(table_text(report), encoding="utf-8")
    write_curve(out / "fit_p11.csv", report.fit_p11, report.fit_p11.omega)
    write_curve(out / "fit_parity.csv", report.fit_parity, report.fit_p11.omega)
    return out


def cmd_reproduce(cfg: RunConfig, shots: int) -> list:
    out = _out_dir(cfg)
    checks, details = reproduce_reference(cfg, shots)
    text = "\n".join(c.line() for c in checks)
    n_pass = sum(c.passed for c in checks)
    text += f"\n{n_pass}/{len(checks)} checks passed\n"
    (out / "summary.txt").write_text(text, encoding="utf-8")
    write_json(out / "summary.json", {"checks": [c.to_dict() for c in checks], **details,
                                      "meta": _meta(cfg, command="reproduce-paper")})
    print(text, end="")
    return checks


SWEEP_COLUMNS = ("value", "p_down_down", "p_up_up", "p_mixed_sum", "re_coherence", "trace",
                 "L_a", "L_b", "F", "F_pairs", "re_coherence_parity")


def cmd_sweep(cfg: RunConfig, key: str | None = None, values: list[float] | None = None) -> Path:
    key = key or cfg.sweep_key
    values = values if values is not None else list(cfg.sweep_values)
    if KEY_SECTION.get(key) not in ("sequence", "noise"):
        raise ConfigError(f"cannot sweep {key!r}: not a numeric sequence or noise field")
    out = _out_dir(cfg)
    rows = []
    for v in values:
        point = parse_config(f"{key} = {v!r}", base=cfg)
        scan = run_scan(point.sequence_params(), point.noise_params(), point.thetas(), point.shots_per_theta,
                        point.master_seed, point.workers)
        r = analyze_tallies(scan.tallies, point.sequence_params().omega_raman)
        d = r.density
        rows.append((v, d.p_down_down, d.p_up_up, d.p_mixed_sum, d.re_coherence, d.trace, d.L_a, d.L_b,
                     r.F, r.F_pairs, r.re_coherence_parity))
    with open(out / "sweep.csv", "w") as fh:
        fh.write(",".join((key,) + SWEEP_COLUMNS[1:]) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")
    write_json(out / "meta.json", _meta(cfg, command="sweep", sweep_key=key, sweep_values=list(values)))
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config file (key = value format)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rydpair", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="simulate a Raman-angle scan")
    pa = sub.add_parser("analyze", parents=[common], help="extract density-matrix elements from tallies.csv")
    pa.add_argument("tallies", nargs="?", type=Path, help="tallies file (default: <out>/tallies.csv)")
    pr = sub.add_parser("reproduce-paper", parents=[common], help="compare against published values")
    pr.add_argument("--shots", type=int, default=10_000, help="shots per angle (default 10000)")
    ps = sub.add_parser("sweep", parents=[common], help="repeat simulate+analyze over one config key")
    ps.add_argument("--param", help="config key to sweep (default: sweep_key)")
    ps.add_argument("--values", help="comma-separated values (default: sweep_values)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args)
        if args.command == "simulate":
            cmd_simulate(cfg)
        elif args.command == "analyze":
            cmd_analyze(cfg, args.tallies)
        elif args.command == "reproduce-paper":
            cmd_reproduce(cfg, args.shots)
        elif args.command == "sweep":
            values = [float(x) for x in args.values.split(",")] if args.values else None
            cmd_sweep(cfg, args.param, values)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Batch command-line front end.

Subcommands cover single runs, 2-D parameter sweeps, and each diagnostic:

    usc-dimer run       --config run.cfg --out prefix
    usc-dimer sweep     --config run.cfg --axis1 gamma:-10:10:201 \
                        --axis2 j_over_omega:0.005:0.5:100 --reduce rho_min --out prefix
    usc-dimer poincare  --config run.cfg --out prefix
    usc-dimer lyapunov  --config run.cfg --out prefix
    usc-dimer spectrum  --config run.cfg [--gamma-range -8:8:81] --out prefix
    usc-dimer tunneling --config run.cfg --out prefix
    usc-dimer modes     --omega 2 --j 1 --theta 1 --gamma-range -10:10:401

Config files are flat key = value text; --set key=value overrides them.
Exit codes: 0 success, 1 configuration, 2 integration, 3 unconverged
cutoff, 4 I/O.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import analysis, csvio, quantum
from .config import (
    AxisSpec,
    RunConfig,
    SweepConfig,
    parse_axis,
    parse_config_file,
)
from .errors import (
    ConfigError,
    DegenerateNorm,
    EmptySeries,
    NotApplicable,
    StepSizeUnderflow,
    UnconvergedCutoff,
)
from .model import ModelParams
from .semiclassical import integrate
from .sweep import run_grid, run_spectral_sweep

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INTEGRATION = 2
EXIT_CUTOFF = 3
EXIT_IO = 4


def _load_config(args) -> RunConfig:
    return parse_config_file(args.config, args.set or ())


def _parse_range(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"range must be min:max:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad range {text!r}") from exc
    if count < 2 or hi <= lo:
        raise ConfigError(f"bad range {text!r}")
    step = (hi - lo) / (count - 1)
    return [lo + i * step for i in range(count)]


def _quantum_pipeline(cfg: RunConfig, want_eigenvalues=False):
    params = cfg.model_params()
    basis = quantum.FockBasis(cfg.effective_n_max())
    h = quantum.build_hamiltonian(params, basis)
    eig = quantum.eigensystem(h)
    times = cfg.integrator_config().time_grid()
    ev = quantum.evolve(
        h, (int(cfg.n0_initial), 0), times, leakage_tol=cfg.leakage_tol, eig=eig
    )
    return ev, (eig[0] if want_eigenvalues else None)


def _cmd_run(args) -> int:
    cfg = _load_config(args)
    if cfg.mode == "classical":
        traj = integrate(cfg.classical_initial(), cfg.model_params(), cfg.integrator_config())
        csvio.write_trajectory(traj, f"{args.out}_trajectory.csv")
        print(f"wrote {args.out}_trajectory.csv ({len(traj)} samples)")
    else:
        ev, eigenvalues = _quantum_pipeline(cfg, want_eigenvalues=args.eigenvalues)
        csvio.write_evolution(ev, f"{args.out}_evolution.csv")
        print(
            f"wrote {args.out}_evolution.csv ({ev.times.size} samples, "
            f"n_max={ev.n_max}, max leakage {ev.max_leakage:.3e})"
        )
        if eigenvalues is not None:
            csvio.write_eigenvalues(eigenvalues, f"{args.out}_eigenvalues.csv")
            print(f"wrote {args.out}_eigenvalues.csv")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    base = _load_config(args)
    axis1 = parse_axis(args.axis1)
    axis2 = parse_axis(args.axis2) if args.axis2 else None
    sweep = SweepConfig(base=base, axis1=axis1, axis2=axis2, reducer=args.reduce, workers=args.workers)
    if sweep.reducer == "spectral_density":
        _, spectra, warnings = run_spectral_sweep(sweep)
        rows = []
        for value, (freqs, dens) in spectra:
            for nu, g in zip(freqs, dens):
                rows.append((value, nu, g))
        csvio.write_rows(f"{args.out}_spectral_map.csv", [axis1.name, "nu", "g"], rows)
        print(f"wrote {args.out}_spectral_map.csv ({len(spectra)} spectra)")
    else:
        a1, a2, grid, warnings = run_grid(sweep)
        csvio.write_sweep(f"{args.out}_sweep.csv", a1, a2, grid)
        print(f"wrote {args.out}_sweep.csv ({grid.size} cells, {len(warnings)} failed)")
    if warnings:
        path = f"{args.out}_warnings.txt"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(warnings) + "\n")
        print(f"wrote {path} ({len(warnings)} warnings)", file=sys.stderr)
    return EXIT_OK


def _cmd_poincare(args) -> int:
    cfg = _load_config(args)
    if cfg.mode != "classical":
        raise ConfigError("poincare sections are classical diagnostics")
    traj = integrate(cfg.classical_initial(), cfg.model_params(), cfg.integrator_config(keep_dense=True))
    section = analysis.poincare_section(traj)
    csvio.write_poincare(section, f"{args.out}_poincare.csv")
    print(
        f"wrote {args.out}_poincare.csv ({section.points.shape[0]} points, "
        f"section level N={section.section_level:.6g})"
    )
    return EXIT_OK


def _cmd_lyapunov(args) -> int:
    cfg = _load_config(args)
    if cfg.mode != "classical":
        raise ConfigError("lyapunov exponents are classical diagnostics")
    lam = analysis.lyapunov_max(
        cfg.classical_initial(),
        cfg.model_params(),
        cfg.integrator_config(keep_dense=False),
        renorm_dt=args.t_renorm,
    )
    csvio.write_rows(f"{args.out}_lyapunov.csv", ["lambda_max"], [(lam,)])
    print(f"lambda_max = {lam:.6g} (t_end={cfg.t_end}, renorm={args.t_renorm})")
    return EXIT_OK


def _cmd_spectrum(args) -> int:
    cfg = _load_config(args)
    positive_only = (cfg.mode == "quantum") and not args.full_spectrum
    if args.gamma_range:
        gammas = _parse_range(args.gamma_range)
        labeled = []
        for gamma in gammas:
            one = cfg.with_values(gamma=gamma)
            labeled.append((gamma, _single_spectrum(one, args.hann)))
        csvio.write_spectral_rows(
            f"{args.out}_spectral_map.csv", labeled, positive_only=positive_only
        )
        print(f"wrote {args.out}_spectral_map.csv ({len(gammas)} gamma points)")
    else:
        sd = _single_spectrum(cfg, args.hann)
        csvio.write_spectral_rows(
            f"{args.out}_spectrum.csv", [(cfg.gamma, sd)], positive_only=positive_only
        )
        print(f"wrote {args.out}_spectrum.csv")
    return EXIT_OK


def _single_spectrum(cfg: RunConfig, hann: bool):
    if cfg.mode == "classical":
        traj = integrate(cfg.classical_initial(), cfg.model_params(), cfg.integrator_config(keep_dense=False))
        return analysis.spectral_density(traj.psi0, traj.psi1, cfg.resolved_dt_sample(), gamma=cfg.gamma, hann=hann)
    ev, _ = _quantum_pipeline(cfg)
    return analysis.spectral_density(
        ev.n0_t, ev.n1_t, cfg.resolved_dt_sample(), gamma=cfg.gamma, subtract_mean=True, hann=hann
    )


def _cmd_tunneling(args) -> int:
    cfg = _load_config(args)
    j = abs(cfg.j_coupling)
    if cfg.mode == "classical":
        traj = integrate(cfg.classical_initial(), cfg.model_params(), cfg.integrator_config(keep_dense=False))
        stats = analysis.tunneling_stats(
            j * traj.times, traj.imbalance_rho, bins=args.bins, bin_width=args.bin_width
        )
    else:
        ev, _ = _quantum_pipeline(cfg)
        stats = analysis.tunneling_stats(
            j * ev.times, ev.rho_t, bins=args.bins, bin_width=args.bin_width
        )
    csvio.write_tunneling(stats, f"{args.out}_tunneling.csv")
    csvio.write_histogram(stats, f"{args.out}_tunneling_hist.csv")
    first = "not reached" if not stats.reached else f"{stats.tau_first:.6g}"
    print(
        f"wrote {args.out}_tunneling.csv and _tunneling_hist.csv "
        f"({stats.crossings.size} crossings, first tau = {first})"
    )
    return EXIT_OK


def _cmd_modes(args) -> int:
    params = ModelParams(omega=args.omega, j_coupling=args.j, theta=args.theta)
    gammas = _parse_range(args.gamma_range)
    modes = [analysis.mode_frequencies(params, g) for g in gammas]
    if args.out:
        csvio.write_modes_table(f"{args.out}_modes.csv", gammas, modes)
        print(f"wrote {args.out}_modes.csv ({len(gammas)} rows)")
    else:
        header = "gamma,nu_sym_plus,nu_sym_minus,nu_anti_plus,nu_anti_minus,sym_exists,anti_exists"
        print(header)
        for g, m in zip(gammas, modes):
            sym = m.nu_sym.real if m.sym_exists else float("nan")
            anti = m.nu_anti.real if m.anti_exists else float("nan")
            row = (g, sym, -sym, anti, -anti, int(m.sym_exists), int(m.anti_exists))
            print(",".join(csvio.fmt(x) for x in row))
    if args.theta == 1:
        window = analysis.chaos_window(params)
        if window is None:
            print("# mode-loss window: empty", file=sys.stderr)
        else:
            print(f"# mode-loss window: ({window[0]:.17g}, {window[1]:.17g})", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="usc-dimer", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_options(p):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override one configuration key (repeatable)")
        p.add_argument("--out", required=True, help="output path prefix")

    p = sub.add_parser("run", help="one classical trajectory or quantum evolution")
    add_config_options(p)
    p.add_argument("--eigenvalues", action="store_true",
                   help="also export the Hamiltonian eigenvalues (quantum mode)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="evaluate a reducer over a parameter grid")
    add_config_options(p)
    p.add_argument("--axis1", required=True, metavar="NAME:MIN:MAX:COUNT")
    p.add_argument("--axis2", metavar="NAME:MIN:MAX:COUNT")
    p.add_argument("--reduce", required=True, choices=SweepConfig.REDUCERS)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("poincare", help="mean-norm section in the (rho/N, phi) plane")
    add_config_options(p)
    p.set_defaults(func=_cmd_poincare)

    p = sub.add_parser("lyapunov", help="maximal Lyapunov exponent of one trajectory")
    add_config_options(p)
    p.add_argument("--t-renorm", type=float, default=1.0,
                   help="tangent renormalization interval (default 1.0)")
    p.set_defaults(func=_cmd_lyapunov)

    p = sub.add_parser("spectrum", help="normalized spectral density (single run or gamma map)")
    add_config_options(p)
    p.add_argument("--gamma-range", metavar="MIN:MAX:COUNT",
                   help="sweep gamma and emit a long-format spectral map")
    p.add_argument("--hann", action="store_true", help="apply a Hann window (presentation)")
    p.add_argument("--full-spectrum", action="store_true",
                   help="emit negative frequencies for quantum runs too")
    p.set_defaults(func=_cmd_spectrum)

    p = sub.add_parser("tunneling", help="imbalance zero crossings and interval histogram")
    add_config_options(p)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--bin-width", type=float, default=None)
    p.set_defaults(func=_cmd_tunneling)

    p = sub.add_parser("modes", help="mode-continuation table and existence window")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--j", type=float, default=1.0)
    p.add_argument("--theta", type=int, required=True, choices=(0, 1))
    p.add_argument("--gamma-range", required=True, metavar="MIN:MAX:COUNT")
    p.add_argument("--out", help="output path prefix (stdout when omitted)")
    p.set_defaults(func=_cmd_modes)

    return parser


_DASH_VALUE_OPTIONS = ("--gamma-range", "--axis1", "--axis2")


def _merge_dash_values(argv):
    """Join range options with their values so leading '-' cannot confuse
    the parser (e.g. --gamma-range -10:10:401)."""
    merged = []
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok in _DASH_VALUE_OPTIONS and i + 1 < len(argv):
            merged.append(f"{tok}={argv[i + 1]}")
            skip = True
        else:
            merged.append(tok)
    return merged


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    args = parser.parse_args(_merge_dash_values(list(argv)))
    try:
        return args.func(args)
    except (ConfigError, NotApplicable, EmptySeries) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepSizeUnderflow, DegenerateNorm) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except UnconvergedCutoff as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CUTOFF
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

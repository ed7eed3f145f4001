"""Command-line entry point: ``mblsim <subcommand> ...``.

Exit codes: 0 success, 2 configuration error, 3 capacity error,
4 numerical-convergence error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .errors import ConfigError, MBLError
from .lattice import CouplingMatrix, TrapSpec, coupling_from_modes, equilibrium_positions, fit_alpha, transverse_modes

log = logging.getLogger("mblsim")


def _load_config(args) -> harness.ExperimentConfig:
    if args.preset and args.config:
        raise ConfigError("give either a config file or --preset, not both")
    if args.preset:
        cfg = harness.preset(args.preset)
    elif args.config:
        cfg = harness.ExperimentConfig.load(args.config)
    else:
        raise ConfigError("a config file or --preset is required")
    changes = {}
    if getattr(args, "realizations", None) is not None:
        changes["realizations"] = args.realizations
    if getattr(args, "seed", None) is not None:
        changes["master_seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        changes["workers"] = args.workers
    return cfg.replace(**changes) if changes else cfg


def _outdir(args, cfg) -> Path:
    out = args.output or cfg.output
    if out is None:
        raise ConfigError("no output directory: pass --output or set 'output' in the config")
    return Path(out)


def cmd_modes(args):
    trap = TrapSpec(
        ion_count=args.ions,
        anisotropy=args.anisotropy,
        rabi_frequency=args.rabi,
        recoil_frequency=args.recoil,
        beatnote_detuning=args.detuning,
        axial_frequency=args.axial,
    )
    pos = equilibrium_positions(trap.ion_count)
    modes = transverse_modes(pos, trap.anisotropy, trap.axial_frequency)
    j = coupling_from_modes(trap, scale=args.scale)
    j_max, alpha = fit_alpha(j, trim_edges=args.trim_edges)
    print("positions:", " ".join(f"{x:.10g}" for x in pos))
    print("frequencies:", " ".join(f"{x:.10g}" for x in modes.frequencies))
    print(f"fit: j_max={j_max:.10g} alpha={alpha:.10g}")
    if args.output:
        Path(args.output).write_text(j.to_csv())
        print(f"couplings written to {args.output}")
    else:
        sys.stdout.write(j.to_csv())
    return 0


def cmd_fit_alpha(args):
    try:
        text = Path(args.couplings).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {args.couplings}: {exc}") from exc
    try:
        j_max, alpha = fit_alpha(CouplingMatrix.from_csv(text), trim_edges=args.trim_edges)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(f"j_max={j_max:.17g}")
    print(f"alpha={alpha:.17g}")
    return 0


def _print_derived(derived):
    for k, v in derived.items():
        if isinstance(v, list):
            v = "[" + ", ".join(f"{x:.6g}" for x in v) + "]"
        elif isinstance(v, float):
            v = f"{v:.6g}"
        print(f"{k}: {v}")


def cmd_run(args):
    cfg = _load_config(args)
    out = _outdir(args, cfg)
    result = harness.run_ensemble(cfg)
    for p in harness.emit(result, out):
        log.info("wrote %s", p)
    _print_derived(result.derived)
    print(f"content_hash: {result.content_hash}")
    return 0


def cmd_sweep(args):
    cfg = _load_config(args)
    out = _outdir(args, cfg)
    values = None
    if args.values:
        values = [float(v) for v in args.values.split(",")]
        if args.axis == "N":
            values = [int(v) for v in values]
    sw = harness.sweep(cfg, axis=args.axis, values=values)
    harness.write_sweep(sw, out)
    sys.stdout.write(sw.summary_csv())
    return 0


def cmd_levelstats(args):
    cfg = _load_config(args)
    res = harness.level_statistics(cfg, sectors=args.sectors, unfold=args.unfold,
                                   central_fraction=args.central_fraction)
    if res.symmetry_warning:
        log.warning(res.symmetry_warning)
    print(f"mean_r: {res.mean_r:.6g} +- {res.mean_r_stderr:.2g}")
    print(f"chi2: {res.histogram.chi2:.6g} (dof {res.histogram.dof}, p={res.histogram.pvalue:.3g})")
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(res.config, indent=2, sort_keys=True) + "\n")
        (out / "spacing_histogram.csv").write_text(res.histogram.to_csv())
        (out / "summary.csv").write_text(res.summary_csv())
    return 0


def cmd_replay(args):
    try:
        result = harness.load_result(args.result)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.result}: {exc}") from exc
    rp = harness.replay(result, args.index)
    print(f"realization {rp.index} seed {rp.seed}: max deviation {rp.max_deviation:.3g}")
    if args.output:
        from .observables import TimeSeries, series_to_csv

        series = [TimeSeries(result.times, np.asarray(v), k) for k, v in rp.series.items()]
        Path(args.output).write_text(series_to_csv(result.times, series))
    return 0 if rp.matches else 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mblsim", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("modes", help="couplings from the transverse phonon modes of an ion chain")
    m.add_argument("--ions", type=int, required=True)
    m.add_argument("--anisotropy", type=float, required=True, help="omega_x / omega_z")
    m.add_argument("--detuning", type=float, required=True, help="beatnote detuning mu")
    m.add_argument("--rabi", type=float, default=1.0)
    m.add_argument("--recoil", type=float, default=1.0)
    m.add_argument("--axial", type=float, default=1.0, help="omega_z in the chosen unit")
    m.add_argument("--scale", type=float, default=1.0)
    m.add_argument("--trim-edges", type=int, default=0)
    m.add_argument("-o", "--output")
    m.set_defaults(func=cmd_modes)

    f = sub.add_parser("fit-alpha", help="fit a power law to a coupling-matrix CSV")
    f.add_argument("couplings")
    f.add_argument("--trim-edges", type=int, default=0)
    f.set_defaults(func=cmd_fit_alpha)

    def common(sp):
        sp.add_argument("config", nargs="?")
        sp.add_argument("--preset", choices=sorted(harness.PRESETS))
        sp.add_argument("-R", "--realizations", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("-o", "--output")

    r = sub.add_parser("run", help="run one disorder ensemble")
    common(r)
    r.add_argument("-j", "--workers", type=int)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="one ensemble per value of W, alpha, B or N")
    common(s)
    s.add_argument("-j", "--workers", type=int)
    s.add_argument("--axis", choices=sorted(harness.SWEEP_AXES))
    s.add_argument("--values", help="comma-separated axis values")
    s.set_defaults(func=cmd_sweep)

    ls = sub.add_parser("levelstats", help="gap-ratio and spacing statistics")
    common(ls)
    ls.add_argument("--sectors", action="store_true", help="resolve the two parity blocks")
    ls.add_argument("--unfold", choices=["polynomial", "mean"], default="polynomial")
    ls.add_argument("--central-fraction", type=float, default=0.8)
    ls.set_defaults(func=cmd_levelstats)

    rp = sub.add_parser("replay", help="regenerate one realization of a stored result")
    rp.add_argument("result", help="result.json or its directory")
    rp.add_argument("--index", type=int, required=True)
    rp.add_argument("-o", "--output", help="CSV for the raw series")
    rp.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except MBLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (IndexError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``schurnorm {estimate,sweep,baselines,plot}``.

Exit codes: 0 success, 2 configuration error, 3 degenerate denominator,
4 solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, DegenerateDenominator, MissingColumn, SchurNormError, SolverFailure
from .plots import plot_convergence, plot_profiles, plot_sweep
from .sweep import RunConfig, cmd_baselines, cmd_estimate, cmd_sweep, fmt, load_config

EXIT_CONFIG = 2
EXIT_DENOMINATOR = 3
EXIT_SOLVER = 4


def _config(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "output", None) is not None:
        overrides["output_dir"] = args.output
    return replace(config, **overrides) if overrides else config


def _estimate(args) -> int:
    config = _config(args)
    record = cmd_estimate(config, args.omega)
    print(f"omega={fmt(record.omega)} schur={record.schur_estimate:.8g} "
          f"l2={record.l2_norm_k:.8g} truncation={record.truncation_norm:.8g} "
          f"iterations={record.iterations} refs={record.ref_points} "
          f"converged={record.converged}")
    threshold = config.threshold()
    if threshold is not None:
        print(f"threshold 1/Lambda={threshold:.8g} satisfied={record.schur_estimate < threshold}")
    return 0


def _sweep(args) -> int:
    config = _config(args)

    def progress(idx, rec):
        logging.getLogger("schurnorm").info(
            "[%d] omega=%s schur=%.6g iterations=%d refs=%d",
            idx, fmt(rec.omega), rec.schur_estimate, rec.iterations, rec.ref_points)

    records = cmd_sweep(config, resume=args.resume, progress=progress)
    print(f"{len(records)} frequencies computed; results in {Path(config.output_dir) / 'sweep.csv'}")
    return 0


def _baselines(args) -> int:
    result = cmd_baselines(_config(args))
    print(json.dumps(result, sort_keys=True))
    return 0


def _plot(args) -> int:
    src = Path(args.input or args.output or RunConfig().output_dir)
    out = Path(args.output or src)
    out.mkdir(parents=True, exist_ok=True)
    made = 0
    if (src / "sweep.csv").exists():
        base = src / "baselines.json"
        baselines = json.loads(base.read_text()) if base.exists() else None
        plot_sweep(src / "sweep.csv", out / "sweep.svg", baselines)
        made += 1
    if (src / "history.csv").exists():
        plot_convergence(src / "history.csv", out / "convergence.svg")
        made += 1
    if (src / "profiles.csv").exists():
        plot_profiles(src / "profiles.csv", out / "profiles.svg")
        made += 1
    if not made:
        raise SchurNormError(f"no sweep.csv, history.csv or profiles.csv in {src}")
    print(f"wrote {made} plot(s) to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schurnorm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON or TOML run configuration")
        p.add_argument("--output", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="model initialization seed")

    p = sub.add_parser("estimate", help="optimize the Schur test functions at one frequency")
    common(p)
    p.add_argument("--omega", type=float, default=0.0)
    p.set_defaults(func=_estimate)

    p = sub.add_parser("sweep", help="warm-started sweep over the configured frequencies")
    common(p)
    p.add_argument("--resume", action="store_true", help="continue after the last finished frequency")
    p.set_defaults(func=_sweep)

    p = sub.add_parser("baselines", help="frequency-independent reference norms")
    common(p)
    p.set_defaults(func=_baselines)

    p = sub.add_parser("plot", help="render SVG plots from result CSVs")
    p.add_argument("--input", help="directory holding the CSV files (default: --output)")
    p.add_argument("--output", help="directory for the SVG files")
    p.set_defaults(func=_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateDenominator as exc:
        print(f"degenerate denominator: {exc}", file=sys.stderr)
        return EXIT_DENOMINATOR
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (MissingColumn, SchurNormError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 invariant
breach.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import engine
from .data_io import TraceProfile, load_trace_csv, synthesize_traces, write_report, write_trace_csv
from .errors import ConfigError, DataError, InvariantBreach

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INVARIANT = 4

log = logging.getLogger("dairy_p2p")


def _load(config_path, seed):
    config, raw = engine.load_config_file(config_path)
    if seed is not None:
        config = replace(config, seed=seed)
    traces = engine.load_traces(config, Path(config_path).parent)
    return config, raw, traces


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    config, _, traces = _load(args.config, args.seed)
    report = engine.run_simulation(config, traces)
    paths = engine.write_scenario_outputs(report, _out_dir(args.out), args.format)
    print(f"wrote {paths['report']} and {paths['audit']}")
    return EXIT_OK


def cmd_compare(args) -> int:
    config, raw, traces = _load(args.config, args.seed)
    variants = engine.variants_from_dict(config, raw)
    comparison = engine.run_comparison(config, variants, traces)
    out = _out_dir(args.out)
    for report in comparison.reports.values():
        engine.write_scenario_outputs(report, out, args.format)
    write_report(comparison, out / f"comparison.{args.format}", args.format)
    for row in comparison.rows():
        deltas = ", ".join(
            f"{k}={'n/a' if row[k] is None else format(row[k], '+.2f') + '%'}"
            for k in ("cost_delta_pct", "revenue_delta_pct", "peak_delta_pct"))
        print(f"{row['scenario_id']}: {deltas}")
    return EXIT_OK


def cmd_synth_data(args) -> int:
    if args.horizon < 1:
        raise ConfigError("--horizon must be >= 1")
    if args.farms < 1:
        raise ConfigError("--farms must be >= 1")
    out = _out_dir(args.out)
    profile = TraceProfile(farm_scale=args.farm_scale, pv_peak_kw=args.pv_peak_kw,
                           wind_mean_kw=args.wind_mean_kw)
    for k in range(args.farms):
        farm_id = f"farm{k + 1:02d}"
        for kind, trace in zip(("load", "pv", "wind"),
                               synthesize_traces(args.seed + k, profile, args.horizon)):
            write_trace_csv(trace, out / f"{farm_id}_{kind}.csv")
    print(f"wrote {3 * args.farms} trace files to {out}")
    return EXIT_OK


def cmd_validate_data(args) -> int:
    if args.config:
        config, _, traces = _load(args.config, None)
        print(f"{len(traces)} farms, {config.horizon_steps} steps: ok")
    for path in args.files:
        if args.horizon is None:
            raise ConfigError("--horizon is required when validating trace files")
        load_trace_csv(path, args.horizon)
        print(f"{path}: ok")
    if not args.config and not args.files:
        raise ConfigError("nothing to validate: give --config or trace files")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dairy-p2p",
                                     description="P2P energy trading simulator for prosumer farms")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        p.add_argument("--config", required=needs_config, help="scenario JSON file")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")

    p = sub.add_parser("simulate", help="run one scenario")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run a base scenario and its variants")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synth-data", help="write synthetic load/pv/wind traces")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=8760)
    p.add_argument("--farms", type=int, default=1)
    p.add_argument("--farm-scale", type=float, default=1.0)
    p.add_argument("--pv-peak-kw", type=float, default=20.0)
    p.add_argument("--wind-mean-kw", type=float, default=8.0)
    p.add_argument("--out", default="traces")
    p.set_defaults(func=cmd_synth_data)

    p = sub.add_parser("validate-data", help="check a scenario's traces or standalone trace files")
    p.add_argument("--config")
    p.add_argument("--horizon", type=int)
    p.add_argument("files", nargs="*")
    p.set_defaults(func=cmd_validate_data)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except InvariantBreach as exc:
        where = f" (step {exc.step}, farm {exc.farm_id})" if exc.step is not None else ""
        print(f"invariant breach: {exc}{where}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

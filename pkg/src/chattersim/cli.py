"""Command-line front end.

Subcommands: run, trace-run, bench, inspect, plot. Exit codes are 0 on
success, 1 on simulation or I/O failure, 2 on invalid usage or config.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import bench as benchmod
from .core import (ConfigError, SessionConfig, SimulationError, config_from_mapping,
                   load_config, overflow_condition, validate_config)
from .engine import run_session
from .metrics import compute_metrics
from .svgplot import NUMERIC_COLUMNS, grouped_bar_svg
from .traceio import TraceFormatError, read_loss_trace

SEED_ENV = "CHATTERSIM_SEED"

_ALIASES = {
    "rtt_ms": ["--rtt"],
    "packet_token_capacity": ["-T"],
    "n_tokens": ["--tokens"],
}
_BOOL_FIELDS = ("loop_trace", "ack_path_lossy")


class UsageError(Exception):
    pass


def _add_session_flags(parser):
    group = parser.add_argument_group("session")
    group.add_argument("--config", help="flat 'key = value' config file; flags override it")
    for f in dataclasses.fields(SessionConfig):
        flags = ["--" + f.name.replace("_", "-")] + _ALIASES.get(f.name, [])
        if f.name in _BOOL_FIELDS:
            group.add_argument(*flags, dest=f.name, action="store_const", const="true")
        else:
            group.add_argument(*flags, dest=f.name, metavar=f.name.upper())
    group.add_argument("--stall-excess", action="store_true",
                       help="count only the part of a stall beyond the threshold")
    group.add_argument("--denominator", choices=("span", "session"), default="span",
                       help="stall ratio denominator: render span or session length")


def config_from_args(args) -> SessionConfig:
    base = load_config(args.config) if args.config else SessionConfig()
    values = {f.name: getattr(args, f.name) for f in dataclasses.fields(SessionConfig)
              if getattr(args, f.name, None) is not None}
    if "seed" not in values and os.environ.get(SEED_ENV) and not (
            args.config and "seed" in _config_keys(args.config)):
        values["seed"] = os.environ[SEED_ENV]
    if values.get("trace") and "channel" not in values:
        values["channel"] = "trace"
    try:
        cfg = config_from_mapping(values, base)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError([str(exc)]) from None
    return validate_config(cfg)


def _config_keys(path):
    from .core import parse_config_text
    with open(path, encoding="utf-8") as fh:
        return {k.replace("-", "_") for k in parse_config_text(fh.read())}


def cmd_run(args) -> int:
    cfg = config_from_args(args)
    if getattr(args, "require_trace", False) and cfg.channel != "trace":
        raise ConfigError(["trace-run requires --trace"])
    result = run_session(cfg)
    report = compute_metrics(result, stall_excess=args.stall_excess,
                             stall_denominator=args.denominator)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(result.to_json(indent=1))
    if args.json:
        print(result.to_json())
    else:
        print(f"protocol: {cfg.protocol_label}  rtt: {cfg.rtt_ms} ms  tokens: {result.n_tokens}"
              f"  seed: {cfg.seed}")
        print(report.format_table())
        if args.timeline:
            print("render_times: " + " ".join(str(t) for t in result.render_times))
    return 0


def _split(text, conv):
    return tuple(conv(x) for x in text.split(",") if x.strip())


def _channel(text):
    p, q = text.split(":")
    return float(p), float(q)


def cmd_bench(args) -> int:
    base = config_from_args(args)
    traces = None
    if args.traces:
        traces = tuple(read_loss_trace(path) for path in args.traces)
    try:
        grid = benchmod.ExperimentGrid(
            protocols=_split(args.protocols, str),
            rtts=_split(args.rtts, int),
            channels=_split(args.channels, _channel),
            n_sessions=args.sessions,
            base_seed=args.base_seed if args.base_seed is not None else base.seed,
            base_config=base,
            traces=traces,
        )
        grid.validate()
        for cell in grid.cells():
            validate_config(benchmod._cell_config(grid, *cell))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError([str(exc)]) from None
    rows = benchmod.run_experiment(grid, workers=args.workers)
    benchmod.write_csv(rows, args.out)
    print(benchmod.format_rows(rows))
    print()
    baseline = "tcp_like" if args.baseline in ("tcp", "tcp-like") else args.baseline
    if any(r.protocol == baseline for r in rows):
        print(benchmod.format_comparison(benchmod.compare(rows, baseline), baseline))
    print(f"\nwrote {args.out}")
    return 0


def cmd_inspect(args) -> int:
    try:
        diag = overflow_condition(args.G, args.T, args.rtt, args.L)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from None
    print(diag)
    return 0


def cmd_plot(args) -> int:
    rows = benchmod.read_csv(args.csv)
    if not rows:
        raise UsageError(f"{args.csv}: no rows")
    if args.metric not in NUMERIC_COLUMNS:
        raise UsageError(f"unknown metric column {args.metric!r}; "
                         f"choose from {', '.join(NUMERIC_COLUMNS)}")
    out = args.out or os.path.splitext(args.csv)[0] + f"_{args.metric}.svg"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(grouped_bar_svg(rows, args.metric))
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chattersim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    for name, help_ in (("run", "simulate one session"),
                        ("trace-run", "simulate one session over a loss trace")):
        p = sub.add_parser(name, help=help_)
        _add_session_flags(p)
        p.add_argument("--out", help="write the full session result as JSON")
        p.add_argument("--json", action="store_true", help="print the result JSON to stdout")
        p.add_argument("--timeline", action="store_true", help="print per-token render times")
        p.set_defaults(func=cmd_run, require_trace=name == "trace-run")

    p = sub.add_parser("bench", help="run a protocol x rtt x channel sweep")
    _add_session_flags(p)
    p.add_argument("--protocols", default=",".join(benchmod.DEFAULT_PROTOCOLS))
    p.add_argument("--rtts", default="100,200,400")
    p.add_argument("--channels", default="0.9:0.5,0.5:0.5,0.9:0.8", help="p:q pairs")
    p.add_argument("--traces", nargs="+", help="loss-trace CSVs; session k replays trace k")
    p.add_argument("--sessions", type=int, default=30)
    p.add_argument("--base-seed", type=int)
    p.add_argument("--baseline", default="tcp")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="bench.csv")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inspect", help="evaluate the packet-overflow condition")
    p.add_argument("-G", type=int, default=100, help="token gap (ms)")
    p.add_argument("-T", type=int, default=10, help="tokens per packet")
    p.add_argument("--rtt", type=int, default=400)
    p.add_argument("-L", type=int, default=200, help="loss period (ms)")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("plot", help="grouped bar chart of a bench CSV column")
    p.add_argument("csv")
    p.add_argument("--metric", default="stall_ratio_mean")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        for msg in exc.errors:
            print(f"error: {msg}", file=sys.stderr)
        return 2
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, TraceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``bench run`` and ``bench gen``.

``bench run`` replays a stream file through an estimator grid against the
exact ground truth and writes a CSV report plus optional per-cell trace
files.  ``bench gen`` writes a synthetic stream to file from a named preset.
Flags may also be supplied through a flat ``key=value`` config file via
``--config``; explicit flags win.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import BenchConfig, ReportRow, run_benchmark, write_report, write_stream
from .errors import StreamQuantError
from .streams import gen_burst_preset, gen_heavy_preset, gen_stationary_preset, materialize

#: Share of the burst preset spent in the quiet regime (matches the reference
#: burst phenomenology of a long quiet phase followed by a short burst).
BURST_QUIET_FRAC = 190_000 / 253_000

PRESETS = ("burst", "stationary", "table1-s2")


def _parse_floats(s: str) -> tuple:
    return tuple(float(v) for v in s.split(",") if v)


def _parse_ints(s: str) -> tuple:
    return tuple(int(v) for v in s.split(",") if v)


def _parse_names(s: str) -> tuple:
    return tuple(v.strip() for v in s.split(",") if v.strip())


def _read_config_file(path) -> dict:
    """Flat key=value file; '#' starts a comment, blank lines ignored."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise StreamQuantError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _apply_config_defaults(args: argparse.Namespace, parser: argparse.ArgumentParser,
                           passed: set) -> None:
    if not args.config:
        return
    file_vals = _read_config_file(args.config)
    for key, val in file_vals.items():
        if not hasattr(args, key):
            raise StreamQuantError(f"unknown config key {key!r}")
        if key in passed:  # explicit flag overrides the file
            continue
        setattr(args, key, val)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Streaming quantile estimation benchmark harness.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay a stream through an estimator grid")
    run.add_argument("--config", default=None, help="flat key=value config file")
    run.add_argument("--stream", default=None, help="input stream file")
    run.add_argument("--format", dest="fmt", default="text",
                     choices=("text", "f64le"), help="stream file format")
    run.add_argument("--quantile", default="0.95",
                     help="comma-separated target quantiles in (0,1)")
    run.add_argument("--capacity", default="100",
                     help="comma-separated buffer capacities (>= 3)")
    run.add_argument("--estimator", default="tas",
                     help="comma-separated subset of tas,p2,reservoir,eqhist")
    run.add_argument("--trace-every", default="1", help="trace emission stride (>= 1)")
    run.add_argument("--seed", default="0", help="base seed for per-cell seeds")
    run.add_argument("--report", default=None, help="report CSV output path")
    run.add_argument("--trace-dir", default=None, help="directory for per-cell traces")
    run.add_argument("--jobs", default="1", help="parallel grid cells")

    gen = sub.add_parser("gen", help="write a synthetic stream to file")
    gen.add_argument("--config", default=None, help="flat key=value config file")
    gen.add_argument("--preset", default=None, choices=PRESETS)
    gen.add_argument("--n", default=None, help="total stream length")
    gen.add_argument("--seed", default="0")
    gen.add_argument("--jump", default="10",
                     help="burst preset scale multiplier (>= 1)")
    gen.add_argument("--out", default=None, help="output stream path")
    gen.add_argument("--format", dest="fmt", default="text",
                     choices=("text", "f64le"))
    return parser


def _passed_flags(argv) -> set:
    out = set()
    for tok in argv:
        if tok.startswith("--"):
            out.add(tok[2:].split("=", 1)[0].replace("-", "_"))
    return out


def _cmd_run(args) -> int:
    if not args.stream:
        raise StreamQuantError("run needs --stream (or stream= in --config)")
    config = BenchConfig(
        source=args.stream,
        fmt=args.fmt,
        quantiles=_parse_floats(str(args.quantile)),
        capacities=_parse_ints(str(args.capacity)),
        estimators=_parse_names(str(args.estimator)),
        trace_every=int(args.trace_every),
        seed=int(str(args.seed), 0),
        report_path=args.report,
        trace_dir=args.trace_dir,
        jobs=int(args.jobs),
    )
    rows = run_benchmark(config)
    _print_table(rows)
    return 0


def _print_table(rows: list[ReportRow]) -> None:
    print(f"{'estimator':<10} {'q':>7} {'m':>6} {'rel_l1':>8} {'abs_linf':>12} "
          f"{'steps':>9} {'runtime':>10}")
    for r in rows:
        s = r.summary
        print(f"{r.estimator:<10} {r.q:>7} {r.m:>6} {s.rel_l1_pct:>7.1f}% "
              f"{s.abs_linf:>12.4g} {s.steps_evaluated:>9} {s.runtime_ms:>8.1f}ms")


def _cmd_gen(args) -> int:
    if not args.preset:
        raise StreamQuantError("gen needs --preset (or preset= in --config)")
    if not args.n or not args.out:
        raise StreamQuantError("gen needs --n and --out")
    n = int(str(args.n).replace("_", ""))
    seed = int(str(args.seed), 0)
    if args.preset == "burst":
        n_quiet = max(1, round(n * BURST_QUIET_FRAC))
        n_burst = max(1, n - n_quiet)
        spec = gen_burst_preset(n_quiet, n_burst, float(args.jump), seed)
    elif args.preset == "stationary":
        spec = gen_stationary_preset(n, seed)
    else:
        spec = gen_heavy_preset(n, seed)
    write_stream(materialize(spec), args.out, args.fmt)
    print(f"wrote {spec.length} values to {args.out} ({args.fmt})")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config_defaults(args, parser, _passed_flags(argv))
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_gen(args)
    except (StreamQuantError, OSError, ValueError) as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

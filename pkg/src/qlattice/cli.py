"""Command line entry point.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import U64_MAX, ConfigError, load_config, parse_formats
from .results import dumps, emit, write_atomic
from .runner import ExperimentError, execute, run_sweep
from .selftest import run_selftest

log = logging.getLogger("qlattice")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value <= U64_MAX:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlattice", description="Quantum games on 2D lattices of agents.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_overrides(p):
        p.add_argument("config", type=Path)
        p.add_argument("--seed", type=_u64, help="override the config seed")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--engine", choices=("dense", "sparse"))
        p.add_argument("--format", dest="formats", help="comma list from csv,json")
        return p

    with_overrides(sub.add_parser("run", help="run one experiment"))
    with_overrides(sub.add_parser("sweep", help="run every cell of the sweep block"))
    sub.add_parser("validate", help="check a config and exit").add_argument("config", type=Path)
    st = sub.add_parser("selftest", help="run the built-in oracle checks")
    st.add_argument("--out", help="write selftest.json into this directory")
    return parser


def _load(args):
    cfg = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    if getattr(args, "engine", None):
        if cfg.parrondo is None:
            raise ConfigError("--engine", f"not applicable to kind {cfg.kind!r}")
        cfg.parrondo.engine = args.engine
    if getattr(args, "formats", None):
        cfg.formats = parse_formats(args.formats)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load(args)
    bundle = execute(cfg)
    for path in emit(bundle, cfg.out_dir, cfg.formats):
        print(path)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    if not cfg.sweep:
        raise ConfigError("sweep", "config has no sweep block")
    rows = run_sweep(cfg)
    lines = ["cell,final_average_capital"] + [f"{n},{v:.12g}" for n, v in rows]
    summary = Path(cfg.out_dir) / "sweep_summary.csv"
    write_atomic(summary, "\n".join(lines) + "\n")
    print("\n".join(lines))
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"ok: {cfg.kind} on {cfg.rows}x{cfg.cols} {cfg.boundary.value}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    report = run_selftest()
    for name, res in report.items():
        print(f"{'PASS' if res['passed'] else 'FAIL'} {name}: {res['detail']}")
    if args.out:
        write_atomic(Path(args.out) / "selftest.json", dumps(report))
    return EXIT_OK if all(r["passed"] for r in report.values()) else EXIT_RUNTIME


COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep,
            "validate": _cmd_validate, "selftest": _cmd_selftest}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ExperimentError, OSError) as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

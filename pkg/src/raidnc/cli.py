"""Command line entry point: ``raidnc run | sweep | verify``.

Exit codes: 0 success, 2 bad configuration or usage, 3 file I/O error,
4 a verification check failed, 5 an episode did not complete.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from raidnc.config import ConfigError, load_config
from raidnc.schedulers import SCHEDULERS
from raidnc.sim import AXES, DEFAULT_SCHEMES, EpisodeConfig, SweepSpec, emit_csv, emit_plot_script, episode_row, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_VERIFY = 4
EXIT_INCOMPLETE = 5

log = logging.getLogger("raidnc")


def _base_config(args) -> EpisodeConfig:
    return load_config(args.config) if args.config else EpisodeConfig()


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def cmd_run(args) -> int:
    cfg = _base_config(args)
    overrides = {
        "users": args.users,
        "messages": args.messages,
        "msg_size_bits": args.msg_size,
        "scheduler": args.scheduler,
        "seed": args.seed,
    }
    cfg = dataclasses.replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    row = episode_row(None, cfg)
    if args.csv:
        emit_csv([row], args.csv)
        log.info("wrote %s", args.csv)
    print(",".join(row.csv_fields()))
    if row.error:
        log.error("episode failed: %s", row.error)
    return EXIT_OK if row.completed else EXIT_INCOMPLETE


def cmd_sweep(args) -> int:
    if len(args.axis) != len(args.values):
        raise ConfigError("give one --values list per --axis")
    base = _base_config(args)
    schemes = _csv_list(args.schemes) if args.schemes else list(DEFAULT_SCHEMES)
    out = Path(args.out)
    incomplete = 0
    for axis, values in zip(args.axis, args.values):
        spec = SweepSpec(axis, [float(v) for v in _csv_list(values)], args.seeds, base, tuple(schemes))
        table = run_sweep(spec, workers=args.workers)
        csv_path = emit_csv(table, out / f"{axis}.csv")
        emit_plot_script(table, out / f"plot_{axis}.py", csv_path)
        for a in table.aggregate():
            log.info("%s %s=%g mean %.6g s (std %.3g, n=%d)", a["scheme"], axis, a["value"], a["mean"], a["std"], a["n"])
        incomplete += sum(not r.completed for r in table.rows)
        print(csv_path)
    if incomplete:
        log.warning("%d episodes did not complete", incomplete)
        return EXIT_INCOMPLETE
    return EXIT_OK


def cmd_verify(args) -> int:
    from raidnc.verify import run_all

    reports = run_all(args.trials, args.bijection_trials, args.seed)
    for r in reports:
        print(r.summary())
        for v in r.violations[:10]:
            print("  " + v)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="raidnc", description="Rate-aware IDNC simulator")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one episode and print its CSV row")
    run.add_argument("--users", type=int)
    run.add_argument("--messages", type=int)
    run.add_argument("--msg-size", type=float, help="message size in bits")
    run.add_argument("--scheduler", choices=sorted(SCHEDULERS))
    run.add_argument("--seed", type=int)
    run.add_argument("--config", help="key = value file")
    run.add_argument("--csv", help="also write the row, with header, to this file")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="sweep one or more axes and write CSV plus plot scripts")
    sweep.add_argument("--axis", action="append", required=True, choices=sorted(AXES))
    sweep.add_argument("--values", action="append", required=True, help="comma-separated, one list per --axis")
    sweep.add_argument("--seeds", type=int, default=20)
    sweep.add_argument("--schemes", help="comma-separated scheduler names")
    sweep.add_argument("--out", default="results")
    sweep.add_argument("--config")
    sweep.add_argument("--workers", type=int, default=1)
    sweep.set_defaults(func=cmd_sweep)

    ver = sub.add_parser("verify", help="oracle-equivalence and graph bijection checks")
    ver.add_argument("--trials", type=int, default=1000)
    ver.add_argument("--bijection-trials", type=int, default=200)
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``nfisac run | sweep | validate``.

Exit codes: 0 when every run completed, 1 when any run failed, 2 for
configuration or usage errors.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import FC_GRID_HZ, PRESETS, ConfigError, load_config, preset_config
from .game_controller import CONTROLLER_NAMES
from .runner import emit_results, run_campaign

EXIT_OK, EXIT_RUN_FAILURE, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("nfisac")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nfisac", description="Secure near-field ISAC slot simulator.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML scenario file (missing keys keep defaults)")
        p.add_argument("--preset", choices=sorted(PRESETS), default=None,
                       help="built-in parameter set used when --config is absent")
        p.add_argument("-v", "--verbose", action="store_true")

    run = sub.add_parser("run", help="seed campaign over the configured carriers")
    sweep = sub.add_parser("sweep", help="campaign over the 7-carrier grid")
    for p in (run, sweep):
        common(p)
        p.add_argument("--out", default="results", help="output directory (default: results)")
        p.add_argument("--controllers", nargs="+", default=list(CONTROLLER_NAMES), choices=CONTROLLER_NAMES)
        p.add_argument("--seeds", type=int, help="number of seeds (starting at scenario.first_seed)")
        p.add_argument("--slots", type=int, help="slots per episode")
        p.add_argument("--workers", type=int, help="process pool size (default: $NFISAC_WORKERS or 1)")
        p.add_argument("--beliefs", action="store_true", help="also write beliefs.csv")
        p.add_argument("--no-timing", action="store_true",
                       help="zero the wall-clock columns so outputs are byte-reproducible")
    run.add_argument("--fc", type=float, nargs="+", metavar="GHZ", help="carrier frequencies in GHz")
    val = sub.add_parser("validate", help="load and check a configuration")
    common(val)
    return ap


def _load(args):
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset, not both")
    if args.config:
        return load_config(args.config)
    return preset_config(args.preset or "default")


def _campaign(args, cfg, fc_list) -> int:
    sc = cfg.scenario
    changes = {}
    if args.seeds is not None:
        changes["num_seeds"] = args.seeds
    if args.slots is not None:
        changes["num_slots"] = args.slots
    if changes:
        cfg = cfg.with_overrides(scenario=changes)
        sc = cfg.scenario
    fc_list = [f * 1e9 for f in fc_list] if fc_list else list(cfg.system.fc_list)
    cfg = dataclasses.replace(cfg, system=dataclasses.replace(cfg.system, fc_list=tuple(fc_list)))
    log.info("running %s over %d carrier(s), %d seed(s), %d slot(s)", ", ".join(args.controllers),
             len(fc_list), sc.num_seeds, sc.num_slots)
    res = run_campaign(cfg, args.controllers, workers=args.workers, keep_beliefs=args.beliefs)
    if not res.rows:
        log.error("no run completed")
        return EXIT_RUN_FAILURE
    paths = emit_results(res, args.out, cfg, beliefs=args.beliefs, timing=not args.no_timing)
    for name, p in paths.items():
        print(f"{name}: {p}")
    if res.failures:
        log.error("%d run(s) failed", len(res.failures))
        return EXIT_RUN_FAILURE
    return EXIT_OK


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load(args)
        if args.command == "validate":
            print(f"configuration OK ({'file ' + args.config if args.config else 'preset ' + (args.preset or 'default')})")
            return EXIT_OK
        fc = getattr(args, "fc", None) if args.command == "run" else [f / 1e9 for f in FC_GRID_HZ]
        return _campaign(args, cfg, fc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILURE


if __name__ == "__main__":
    sys.exit(main())

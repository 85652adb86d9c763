"""Command-line entry point: ``flowmac --config exp.cfg --out results/run.csv``."""
from __future__ import annotations

import argparse
import logging
import sys

from .flows import ConfigError
from .harness import MODES, SCENARIOS, ExperimentConfig, parse_config, run_experiment, write_outputs

log = logging.getLogger("flowmac")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flowmac", description=__doc__)
    ap.add_argument("--config", help="key = value experiment file; omitted keys take defaults")
    ap.add_argument("--mode", help=f"comma-separated subset of {','.join(MODES)}")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="rows CSV path; the summary CSV and JSON sidecar sit next to it")
    ap.add_argument("--scenario", choices=sorted(SCENARIOS))
    ap.add_argument("--frames", type=int, help="frames per (lambda, replication)")
    ap.add_argument("--replications", type=int)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = dict(
        modes=tuple(m.strip() for m in args.mode.split(",")) if args.mode else None,
        seed=args.seed, out=args.out, frames=args.frames, replications=args.replications,
    )
    try:
        if args.config:
            config = parse_config(args.config, **overrides)
        else:
            config = ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
        if args.scenario:
            config.scenario, config.load = args.scenario, None
            config.validate()
        if not config.out:
            raise ConfigError("no output path: pass --out or set 'out' in the config")

        def progress(mode, rate, rep):
            log.info("%s lambda=%g replication=%d done", mode, rate, rep)

        result = run_experiment(config, progress=progress)
        paths = write_outputs(result, config.out)
    except ConfigError as exc:
        print(f"flowmac: error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    return 0

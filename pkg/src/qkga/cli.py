"""Command-line entry point: ``qkga run --config FILE``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import APPROACHES, ConfigError, load_config

EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkga", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the genetic feature-map experiment")
    run.add_argument("--config", required=True, help="flat key = value config file")
    run.add_argument("--approach", action="append", choices=APPROACHES,
                     help="approach to run; repeat for several (default: from config)")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--out", default="results", help="output directory (default: results)")
    run.add_argument("--refine-top-k", type=int, help="refine only the k best individuals")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.approach:
            cfg.approaches = list(args.approach)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.refine_top_k is not None:
            cfg.refine_top_k = args.refine_top_k
        cfg.check()
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return EXIT_CONFIG

    from .harness import run_experiment
    from .report import emit_report

    try:
        report = run_experiment(cfg)
        paths = emit_report(report, args.out)
    except Exception as exc:  # noqa: BLE001 - surfaced as exit code 3
        logging.getLogger("qkga").error("run failed: %s", exc, exc_info=args.verbose)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for aid, entry in report.data["approaches"].items():
        acc = entry["best"]["accuracy"]
        print(f"approach {aid}: train {acc['train']:.4f}  test {acc['test']:.4f}  "
              f"validation {acc['validation']:.4f}  SM {entry['best']['sm']:.3f}")
    print(f"wrote {len(paths)} files to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

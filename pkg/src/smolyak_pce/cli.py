"""Command-line entry point ``smolyak-pce``.

Exit codes: 0 on success, 2 for configuration errors, 3 for model failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .evalcache import CacheFormatError, ModelAbort, ModelEvaluationError
from .experiments import OUT_ENV, cmd_aliasing_report, cmd_approximate, cmd_convergence, cmd_genz_suite

EXIT_OK, EXIT_CONFIG, EXIT_MODEL = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smolyak-pce",
        description="Sparse pseudospectral polynomial approximation of black-box functions.",
        epilog=f"Outputs go to --out, else ${OUT_ENV}, else the working directory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "approximate": "build one expansion; writes expansion.json, coefficients.csv, summary.csv",
        "convergence": "adaptive run or total-order sweep; writes convergence.csv",
        "genz-suite": "convergence runs over seeded Genz instances; writes genz_suite.csv",
        "aliasing-report": "list aliasing-prone coefficient pairs; writes aliasing_report.json",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--jobs", type=int, default=1, metavar="N", help="concurrent model evaluations")
        p.add_argument("--cache", metavar="PATH", help="evaluation cache file (read and updated)")
        p.add_argument("--seed", type=int, metavar="N", help="override the config's seed")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "genz-suite":
            try:
                raw = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError("", f"cannot load {args.config}: {exc}") from None
            cmd_genz_suite(raw, args.out, args.jobs, args.seed)
            return EXIT_OK
        cfg = load_config(args.config, args.seed)
        if args.command == "approximate":
            cmd_approximate(cfg, args.out, args.jobs, args.cache)
        elif args.command == "convergence":
            cmd_convergence(cfg, args.out, args.jobs, args.cache)
        else:
            cmd_aliasing_report(cfg, args.out)
    except (ConfigError, CacheFormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ModelEvaluationError, ModelAbort) as exc:
        print(f"model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

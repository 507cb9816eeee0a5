"""Command-line entry point: ``lcfl run | bounds | compare``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .bounds import FAIL, compute_bounds
from .config import ConfigError, load_config
from .oracle import InfeasibleFairness, max_slack
from .runner import compare_policies, run

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_GUARANTEE = 0, 2, 3, 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcfl", description="Fairness-constrained combinatorial bandit experiments.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a sweep and write traces plus summary.json")
    r.add_argument("--config", default="default", help="JSON config path, or 'default' for the bundled one")
    r.add_argument("--out", help="output directory (overrides output_dir)")
    r.add_argument("--threads", type=int, default=1, help="worker processes per sweep entry")
    r.add_argument("--strict", action="store_true", help="exit 4 if any guarantee check fails")

    b = sub.add_parser("bounds", help="print the bound constants for each sweep entry")
    b.add_argument("--config", default="default")

    c = sub.add_parser("compare", help="M and eta monotonicity verdicts over summaries")
    c.add_argument("--summaries", nargs="+", required=True)
    c.add_argument("--strict", action="store_true", help="exit 4 if a trend verdict fails")
    return p


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    summary = run(config, out_dir=args.out, threads=args.threads)
    out = Path(args.out or config.output_dir)
    print(f"wrote {out / 'summary.json'}")
    for e in summary["entries"]:
        print(f"{e['label']}: regret {e['regret']['mean']:.6g} +- {e['regret']['stderr']:.3g}, "
              f"t* {e['zero_violation_point']['mean_service']}, verdicts {e['verdicts']}")
    if args.strict and summary["verdict"] == FAIL:
        return EXIT_GUARANTEE
    return EXIT_OK


def _cmd_bounds(args) -> int:
    config = load_config(args.config)
    delta = max_slack(config.instance)
    reports = []
    for cfg in config.sweep:
        rep = compute_bounds(config.instance, None, cfg, config.horizon, delta)
        reports.append({"label": cfg.name, "bounds": rep.to_dict()})
    json.dump({"delta_max": delta, "entries": reports}, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return EXIT_OK


def _cmd_compare(args) -> int:
    summaries = []
    for path in args.summaries:
        try:
            summaries.append(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read summary {path}: {exc}") from exc
    report = compare_policies(summaries)
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    if args.strict and report["verdict"] == FAIL:
        return EXIT_GUARANTEE
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = {"run": _cmd_run, "bounds": _cmd_bounds, "compare": _cmd_compare}[args.command]
    try:
        return handler(args)
    except InfeasibleFairness as exc:
        print(f"infeasible instance: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``scmdetect {null-dist,roc,phase-sweep,spectrum}``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from ..errors import ConfigError, DeadChannelError, NumericalError
from . import experiments, output
from .config import load_config

log = logging.getLogger("scmdetect")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scmdetect",
        description="Largest-eigenvalue detection on spectral coherence matrices.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="flat TOML experiment configuration")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--trials", type=int, help="override the configured number of trials")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("null-dist", parents=[common], help="null distribution of the scan statistic")
    sub.add_parser("roc", parents=[common], help="ROC curve of the detector")
    sub.add_parser("phase-sweep", parents=[common], help="spike eigenvalue against phi(gamma)")
    sub.add_parser("spectrum", parents=[common], help="per-frequency largest eigenvalue of one realization")
    return parser


def _run(args) -> None:
    cfg = load_config(args.config, seed=args.seed, trials=args.trials, mode=args.command)
    if args.workers < 1:
        raise ConfigError("--workers must be at least 1")
    log.info("M=%d N=%d B=%d c=%.6g trials=%d", cfg.M, cfg.N, cfg.B, cfg.c, cfg.trials)

    if args.command == "null-dist":
        summary = experiments.null_distribution(cfg, workers=args.workers)
        paths = output.write_null(args.out, summary)
        print(f"KS distance to Marchenko-Pastur: {summary.ks:.4f}")
        print(f"median lambda_max={summary.median_lambda_max:.4f} "
              f"lambda_min={summary.median_lambda_min:.4f} edges={summary.edges[0]:.4f},{summary.edges[1]:.4f}")
    elif args.command == "roc":
        curve = experiments.roc_curve(cfg, workers=args.workers)
        paths = (output.write_roc(args.out, curve),)
        auc = -np.trapezoid([p.pd for p in curve], [p.pfa for p in curve])
        print(f"{len(curve)} ROC points, AUC={auc:.4f}")
    elif args.command == "phase-sweep":
        rows = experiments.phase_sweep(cfg, workers=args.workers)
        paths = (output.write_phase(args.out, rows),)
        for row in rows:
            print(f"gamma={row.gamma:.4f} median_lambda1={row.median_lambda1:.4f} phi={row.phi:.4f}")
    else:
        scan = experiments.spectrum(cfg)
        paths = (output.write_spectrum(args.out, scan),)
        print(f"statistic={scan.statistic:.6f} at nu={scan.nu_hat:.6f}")
    for path in paths:
        print(f"wrote {path}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DeadChannelError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

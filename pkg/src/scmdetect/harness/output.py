"""CSV persistence. Floats are written with 17 significant digits."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def write_roc(out_dir, curve) -> Path:
    return write_csv(Path(out_dir) / "roc.csv", ["threshold", "pfa", "pd", "trials"],
                     ((p.threshold, p.pfa, p.pd, p.trials) for p in curve))


def write_null(out_dir, summary) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    q = write_csv(out_dir / "null.csv", ["quantile", "value"], summary.quantiles)
    esd = write_csv(out_dir / "null_esd.csv", ["eigenvalue"], ((x,) for x in summary.eigenvalues))
    return q, esd


def write_phase(out_dir, rows) -> Path:
    return write_csv(Path(out_dir) / "phase.csv", ["gamma", "median_lambda1", "phi", "c"],
                     ((r.gamma, r.median_lambda1, r.phi, r.c) for r in rows))


def write_spectrum(out_dir, scan) -> Path:
    return write_csv(Path(out_dir) / "spectrum.csv", ["nu", "lambda1"],
                     zip(scan.frequencies, scan.trace))

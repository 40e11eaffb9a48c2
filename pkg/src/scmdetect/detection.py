"""
Largest-eigenvalue detection on spectral coherence matrices.

The detector declares a signal when ``max_nu lambda_1(C_hat(nu))`` strictly
exceeds ``(1 + sqrt(c))**2 + epsilon``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NumericalError
from .rmt import mp_edges, phi
from .spectral import DEFAULT_FLOOR, CoherenceMatrix, fft_frame, iter_scan

__all__ = [
    "EigenSpectrum",
    "ScanResult",
    "DetectorConfig",
    "hermitian_eigs",
    "scan_statistic",
    "scan_block",
    "decide",
    "consistency_window",
    "threshold",
]

HERMITIAN_TOL = 1e-10
BACKWARD_TOL = 1e-8
TRACE_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EigenSpectrum:
    nu: float | None
    eigenvalues: np.ndarray  # descending

    @property
    def largest(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues[-1])


@dataclass(frozen=True, eq=False)
class ScanResult:
    """Maximum over the Fourier grid of the largest coherence eigenvalue."""

    statistic: float
    nu_hat: float
    trace: np.ndarray = field(repr=False)

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.trace.size) / self.trace.size


@dataclass(frozen=True)
class DetectorConfig:
    epsilon: float
    c: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        mp_edges(self.c)


def hermitian_eigs(A, nu: float | None = None) -> EigenSpectrum:
    """Full spectrum of a Hermitian matrix, sorted descending.

    Raises ``ValueError`` for non-Hermitian input and ``NumericalError`` if any
    eigenpair has backward error above ``1e-8 * ||A||``.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    norm = np.linalg.norm(A, 2) if A.size else 0.0
    if np.linalg.norm(A - A.conj().T, 2) > HERMITIAN_TOL * max(norm, np.finfo(float).tiny):
        raise ValueError("matrix is not Hermitian")
    lam, V = np.linalg.eigh(A)
    resid = np.linalg.norm(A @ V - V * lam, axis=0)
    if np.any(~np.isfinite(lam)) or np.any(resid > BACKWARD_TOL * max(norm, 1e-300)):
        raise NumericalError(f"eigen-solver backward error {resid.max():.3e} exceeds {BACKWARD_TOL:g} * ||A||")
    return EigenSpectrum(nu=nu, eigenvalues=lam[::-1].copy())


def _top_eigenvalues(C: np.ndarray) -> np.ndarray:
    lam = np.linalg.eigvalsh(C)
    M = C.shape[-1]
    # unit diagonal: the eigenvalues must sum to M
    drift = np.abs(lam.sum(axis=-1) - M)
    if not np.all(np.isfinite(lam)) or np.any(drift > TRACE_TOL * M):
        raise NumericalError(f"coherence eigenvalues violate the trace identity (drift {np.nanmax(drift):.3e})")
    return lam[..., -1]


def _reduce(trace: np.ndarray) -> ScanResult:
    j = int(np.argmax(trace))  # first maximum, i.e. smallest frequency on ties
    return ScanResult(statistic=float(trace[j]), nu_hat=j / trace.size, trace=trace)


def scan_statistic(scan: Sequence[CoherenceMatrix]) -> ScanResult:
    """Largest eigenvalue per frequency, then the maximum over frequencies."""
    if len(scan) == 0:
        raise ValueError("scan is empty")
    C = np.stack([item.C_hat for item in scan])
    top = _top_eigenvalues(C)
    order = np.argsort([item.nu for item in scan], kind="stable")
    j = int(order[np.argmax(top[order])])
    return ScanResult(statistic=float(top[j]), nu_hat=float(scan[j].nu), trace=top)


def scan_block(y, B: int, floor: float = DEFAULT_FLOOR) -> ScanResult:
    """Scan statistic of a block without materializing every coherence matrix."""
    frame = fft_frame(y)
    trace = np.empty(frame.shape[1])
    for j0, C in iter_scan(frame, B, floor):
        trace[j0 : j0 + C.shape[0]] = _top_eigenvalues(C)
    return _reduce(trace)


def threshold(cfg: DetectorConfig) -> float:
    return mp_edges(cfg.c)[1] + cfg.epsilon


def decide(scan: ScanResult | float, cfg: DetectorConfig) -> int:
    """1 iff the statistic lies in the open interval above the threshold."""
    stat = scan.statistic if isinstance(scan, ScanResult) else float(scan)
    return int(stat > threshold(cfg))


def consistency_window(gamma1: float, c: float) -> tuple[float, float]:
    """Open interval of thresholds ``epsilon`` for which the detector is consistent.

    Returns ``(0, phi(gamma1) - (1 + sqrt(c))**2)``; below the phase transition
    the interval is empty and ``(0.0, 0.0)`` is returned.
    """
    if gamma1 <= np.sqrt(c):
        mp_edges(c)
        return 0.0, 0.0
    return 0.0, phi(gamma1, c) - mp_edges(c)[1]

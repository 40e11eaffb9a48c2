"""
Seeded Monte-Carlo experiments: null distributions, ROC curves, phase sweeps.

Trial ``t`` under H0 uses stream id ``t``; under H1 it uses ``t + H1_OFFSET``
so the two hypotheses draw disjoint streams. Within a stream, substream 0
feeds the noise and substream 1 the signal, so ``run_trial`` called with the
same stream under both hypotheses observes the same noise realization.
"""

from __future__ import annotations

import functools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from ..detection import ScanResult, scan_block
from ..errors import ConfigError
from ..rmt import mp_cdf, mp_edges, nu_star, phi, transfer_function
from ..signal_model import RngStream, generate_noise, generate_signal, superpose
from ..spectral import FourierGrid, coherence, fft_frame, smoothed_periodogram, window_matrix
from .config import ExperimentConfig

__all__ = [
    "H1_OFFSET",
    "RocPoint",
    "NullSummary",
    "PhaseRow",
    "observe",
    "run_trial",
    "simulate_statistics",
    "roc_thresholds",
    "roc_from_statistics",
    "roc_curve",
    "pd_at_pfa",
    "error_probability",
    "null_distribution",
    "phase_sweep",
    "spectrum",
    "coherence_eigenvalues",
    "transfer_residual",
]

H1_OFFSET = 2**32
NULL_QUANTILES = (0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99)
MIN_ROC_TRIALS = 100


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    pfa: float
    pd: float
    trials: int


@dataclass(frozen=True, eq=False)
class NullSummary:
    c: float
    edges: tuple[float, float]
    statistics: np.ndarray
    quantiles: tuple[tuple[float, float], ...]
    eigenvalues: np.ndarray
    ks: float
    median_lambda_max: float
    median_lambda_min: float


@dataclass(frozen=True)
class PhaseRow:
    gamma: float
    median_lambda1: float
    phi: float
    c: float


def _stream_id(trial: int, hypothesis: str) -> int:
    return trial + (H1_OFFSET if hypothesis == "H1" else 0)


def _check_hypothesis(hypothesis):
    if hypothesis not in ("H0", "H1"):
        raise ValueError(f"hypothesis must be 'H0' or 'H1', got {hypothesis!r}")


def observe(cfg: ExperimentConfig, hypothesis: str, stream: RngStream, filt=None) -> np.ndarray:
    """One ``(M, N)`` observation block under the given hypothesis."""
    _check_hypothesis(hypothesis)
    v = generate_noise(cfg.noise_model(), cfg.M, cfg.N, stream.substream(0))
    if hypothesis == "H0":
        return v
    filt = cfg.signal_filter() if filt is None else filt
    u, _ = generate_signal(filt, cfg.N, stream.substream(1))
    return superpose(u, v)


def run_trial(cfg: ExperimentConfig, hypothesis: str, stream: RngStream, filt=None) -> ScanResult:
    return scan_block(observe(cfg, hypothesis, stream, filt), cfg.B)


def _map(fn, items, workers):
    items = list(items)
    if workers is None or workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (4 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _statistic_job(cfg, hypothesis, filt, trial):
    stream = RngStream(cfg.seed, _stream_id(trial, hypothesis))
    return run_trial(cfg, hypothesis, stream, filt).statistic


def simulate_statistics(cfg: ExperimentConfig, hypothesis: str, trials: int | None = None,
                        workers: int = 1) -> np.ndarray:
    """Scan statistics of ``trials`` independent realizations, in trial order."""
    _check_hypothesis(hypothesis)
    trials = cfg.trials if trials is None else trials
    if trials < 1:
        raise ConfigError("at least one trial is required")
    filt = cfg.signal_filter() if hypothesis == "H1" else None
    job = functools.partial(_statistic_job, cfg, hypothesis, filt)
    return np.asarray(_map(job, range(trials), workers), dtype=float)


def roc_thresholds(h0, h1, points: int = 200, extra=()) -> np.ndarray:
    """Quantile grid over the pooled statistics plus any extra thresholds and +-inf."""
    pooled = np.concatenate([np.asarray(h0, float), np.asarray(h1, float)])
    grid = np.quantile(pooled, np.linspace(0.0, 1.0, points))
    return np.unique(np.concatenate([[-np.inf], grid, np.asarray(extra, float), [np.inf]]))


def roc_from_statistics(h0, h1, thresholds) -> list[RocPoint]:
    """Empirical exceedance fractions ``P(stat > t)`` under each hypothesis."""
    h0 = np.sort(np.asarray(h0, float))
    h1 = np.sort(np.asarray(h1, float))
    t = np.asarray(thresholds, float)
    pfa = 1.0 - np.searchsorted(h0, t, side="right") / h0.size
    pd = 1.0 - np.searchsorted(h1, t, side="right") / h1.size
    trials = int(min(h0.size, h1.size))
    return [RocPoint(float(a), float(b), float(c), trials) for a, b, c in zip(t, pfa, pd)]


def roc_curve(cfg: ExperimentConfig, workers: int = 1, return_statistics: bool = False):
    """ROC of the scan statistic from ``cfg.trials`` trials under each hypothesis."""
    if cfg.trials < MIN_ROC_TRIALS:
        raise ConfigError(f"ROC curves need at least {MIN_ROC_TRIALS} trials, got {cfg.trials}")
    h0 = simulate_statistics(cfg, "H0", workers=workers)
    h1 = simulate_statistics(cfg, "H1", workers=workers)
    edge = mp_edges(cfg.c)[1]
    thresholds = roc_thresholds(h0, h1, cfg.roc_points, [edge + e for e in cfg.epsilon])
    curve = roc_from_statistics(h0, h1, thresholds)
    return (curve, h0, h1) if return_statistics else curve


def pd_at_pfa(h0, h1, pfa: float) -> float:
    """Detection probability at the smallest empirical threshold with false-alarm rate <= ``pfa``."""
    h0 = np.sort(np.asarray(h0, float))
    h1 = np.asarray(h1, float)
    k = int(np.ceil((1.0 - pfa) * h0.size)) - 1
    t = h0[min(max(k, 0), h0.size - 1)]
    return float(np.mean(h1 > t))


def error_probability(h0, h1, thresh: float) -> float:
    """``max(Pfa, 1 - Pd)`` of the rule ``stat > thresh``."""
    pfa = float(np.mean(np.asarray(h0) > thresh))
    pd = float(np.mean(np.asarray(h1) > thresh))
    return max(pfa, 1.0 - pd)


def coherence_eigenvalues(y, nu: float, B: int) -> np.ndarray:
    """Descending eigenvalues of the coherence matrix of ``y`` at grid frequency ``nu``."""
    C = coherence(smoothed_periodogram(fft_frame(y), nu, B)).C_hat
    return np.linalg.eigvalsh(C)[::-1]


def _null_job(cfg, trial):
    y = observe(cfg, "H0", RngStream(cfg.seed, _stream_id(trial, "H0")))
    stat = scan_block(y, cfg.B).statistic
    return stat, coherence_eigenvalues(y, cfg.nu0, cfg.B)


def null_distribution(cfg: ExperimentConfig, workers: int = 1) -> NullSummary:
    """H0 trials: quantiles of the scan statistic and the pooled spectrum at ``cfg.nu0``."""
    if cfg.trials < 1:
        raise ConfigError("at least one trial is required")
    results = _map(functools.partial(_null_job, cfg), range(cfg.trials), workers)
    statistics = np.array([r[0] for r in results])
    spectra = np.stack([r[1] for r in results])
    pooled = np.sort(spectra.ravel())
    c = cfg.c
    ks = stats.kstest(pooled, lambda x: mp_cdf(x, c)).statistic
    return NullSummary(
        c=c,
        edges=mp_edges(c),
        statistics=statistics,
        quantiles=tuple((q, float(np.quantile(statistics, q))) for q in NULL_QUANTILES),
        eigenvalues=pooled,
        ks=float(ks),
        median_lambda_max=float(np.median(spectra[:, 0])),
        median_lambda_min=float(np.median(spectra[:, -1])),
    )


def _spike_job(cfg, filt, nu, trial):
    y = observe(cfg, "H1", RngStream(cfg.seed, _stream_id(trial, "H1")), filt)
    return coherence_eigenvalues(y, nu, cfg.B)[0]


def spike_eigenvalues(cfg: ExperimentConfig, workers: int = 1) -> tuple[float, np.ndarray]:
    """``(nu*, lambda_1(C_hat(nu*)) per trial)`` under H1 for the configured signal."""
    filt = cfg.signal_filter()
    nu = nu_star(filt, cfg.noise_model(), cfg.grid)
    lam = _map(functools.partial(_spike_job, cfg, filt, nu), range(cfg.trials), workers)
    return nu, np.asarray(lam)


def default_gamma_grid(c: float) -> tuple[float, ...]:
    r = np.sqrt(c)
    return tuple(float(k * r) for k in (0, 0.5, 1, 1.5, 2, 3, 4))


def phase_sweep(cfg: ExperimentConfig, gamma_grid=None, workers: int = 1) -> list[PhaseRow]:
    """Median ``lambda_1(C_hat(nu*))`` against ``phi(gamma)`` for each target spike.

    Every row reuses the same trial streams, so rows differ only through the
    signal amplitude.
    """
    if gamma_grid is None:
        gamma_grid = cfg.gamma_grid or default_gamma_grid(cfg.c)
    rows = []
    for gamma in gamma_grid:
        _, lam = spike_eigenvalues(cfg.replace(gamma=float(gamma), c_snr=None), workers)
        rows.append(PhaseRow(float(gamma), float(np.median(lam)), phi(float(gamma), cfg.c), cfg.c))
    return rows


def spectrum(cfg: ExperimentConfig, hypothesis: str | None = None, trial: int = 0) -> ScanResult:
    """Per-frequency largest coherence eigenvalue for a single realization."""
    hypothesis = cfg.hypothesis if hypothesis is None else hypothesis
    return run_trial(cfg, hypothesis, RngStream(cfg.seed, _stream_id(trial, hypothesis)))


def transfer_residual(filt, N: int, B: int, nu: float, stream: RngStream) -> float:
    """Operator norm of ``Sigma_u(nu) - H(nu) Sigma_eps(nu)`` for one signal-only block.

    ``Sigma_x(nu)`` is the ``(., B + 1)`` matrix of finite Fourier transforms of
    ``x`` around ``nu`` scaled by ``1/sqrt(B + 1)``; ``eps`` is the driving noise
    aligned with the block.
    """
    u, eps = generate_signal(filt, N, stream)
    j = FourierGrid(N).index(nu)
    Su = window_matrix(fft_frame(u), j, B)
    Se = window_matrix(fft_frame(eps[:, filt.length - 1:]), j, B)
    return float(np.linalg.norm(Su - transfer_function(filt, j / N) @ Se, 2))

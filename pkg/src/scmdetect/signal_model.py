"""
Observation model: a low-rank MIMO-filtered signal plus independent colored noise.

The observed M-variate series is ``y_n = u_n + v_n`` where

* ``u_n = sum_k H_k eps_{n-k}`` is the output of a causal M x K filter driven by
  standard circular complex Gaussian white noise ``eps_n``;
* ``v_{m,n} = sum_q theta_m(q) z_{m,n-q}`` are M mutually independent stationary
  moving-average series with standard circular complex Gaussian innovations.

Blocks are plain ``(M, N)`` complex arrays; column ``n`` is the sample at time
``n + 1``. Both generators draw the pre-window innovations they need, so every
returned block is an exact stationary realization (no burn-in).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import signal

__all__ = [
    "FilterBank",
    "NoiseModel",
    "RngStream",
    "complex_normal",
    "geometric_filter",
    "generate_noise",
    "generate_signal",
    "superpose",
    "check_block",
]

# Density positivity is checked on this many uniformly spaced frequencies.
_DENSITY_GRID = 4096


@dataclass(frozen=True)
class RngStream:
    """Reproducible random stream identified by ``(seed, stream)``.

    Identical pairs give bit-identical draws; distinct stream ids map to
    independent ``SeedSequence`` children of the same root entropy. ``path``
    extends the key for tagged substreams (see :meth:`substream`).
    """

    seed: int
    stream: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("seed", "stream"):
            value = getattr(self, name)
            if int(value) != value or not 0 <= value < 2**64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def substream(self, tag: int) -> "RngStream":
        """Independent child stream, e.g. one for noise and one for the signal."""
        return replace(self, path=(*self.path, int(tag)))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream), *self.path))
        return np.random.Generator(np.random.PCG64(seq))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard circular complex Gaussian draws: E|z|^2 = 1, real/imag ~ N(0, 1/2)."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * np.sqrt(0.5)


@dataclass(frozen=True, eq=False)
class FilterBank:
    """Truncated causal MIMO impulse response.

    Attributes
    ----------
    taps : ndarray, shape (L, M, K)
        ``taps[k]`` is the M x K matrix ``H_k``.
    """

    taps: np.ndarray

    def __post_init__(self):
        taps = np.asarray(self.taps, dtype=complex)
        if taps.ndim == 2:
            taps = taps[:, :, None]
        if taps.ndim != 3 or taps.shape[0] < 1:
            raise ValueError("taps must have shape (L, M, K) with L >= 1")
        if not np.all(np.isfinite(taps)):
            raise ValueError("taps must be finite")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def length(self) -> int:
        return self.taps.shape[0]

    @property
    def num_sensors(self) -> int:
        return self.taps.shape[1]

    @property
    def rank(self) -> int:
        return self.taps.shape[2]

    def power(self) -> float:
        """Total output power ``sum_k ||H_k||_F^2`` (= E||u_n||^2)."""
        return float(np.sum(np.abs(self.taps) ** 2))


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Per-sensor moving-average filters for the additive noise.

    Attributes
    ----------
    coefficients : ndarray, shape (M, Q + 1) or (1, Q + 1)
        Row ``m`` holds ``theta_m(0..Q)``; shorter filters are zero padded.
        A single row is shared by every sensor.
    """

    coefficients: np.ndarray

    def __post_init__(self):
        coef = np.atleast_2d(np.asarray(self.coefficients, dtype=complex))
        if coef.ndim != 2 or coef.shape[1] < 1 or coef.shape[0] < 1:
            raise ValueError("coefficients must have shape (M, Q + 1)")
        if not np.all(np.isfinite(coef)):
            raise ValueError("coefficients must be finite")
        nu = np.arange(_DENSITY_GRID) / _DENSITY_GRID
        phase = np.exp(-2j * np.pi * np.outer(np.arange(coef.shape[1]), nu))
        density = np.abs(coef @ phase) ** 2
        worst = density.min(axis=1)
        if np.any(worst <= 1e-12):
            m = int(np.argmin(worst))
            raise ValueError(
                f"noise filter for sensor {m} has a spectral null "
                f"(min density {worst[m]:.3e}); densities must stay positive"
            )
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)

    @classmethod
    def shared(cls, theta) -> "NoiseModel":
        """One filter ``theta`` applied independently on every sensor."""
        return cls(np.asarray(theta, dtype=complex)[None, :])

    @classmethod
    def per_sensor(cls, thetas) -> "NoiseModel":
        """Heterogeneous filters; ``thetas`` is a sequence of coefficient lists."""
        width = max(len(t) for t in thetas)
        coef = np.zeros((len(thetas), width), dtype=complex)
        for m, t in enumerate(thetas):
            coef[m, : len(t)] = t
        return cls(coef)

    @property
    def order(self) -> int:
        return self.coefficients.shape[1] - 1

    @property
    def is_shared(self) -> bool:
        return self.coefficients.shape[0] == 1

    def for_sensors(self, M: int) -> np.ndarray:
        """Coefficient matrix broadcast to exactly ``M`` rows."""
        coef = self.coefficients
        if coef.shape[0] == 1:
            return np.broadcast_to(coef, (M, coef.shape[1]))
        if coef.shape[0] != M:
            raise ValueError(f"noise model describes {coef.shape[0]} sensors, expected {M}")
        return coef

    def autocovariance(self, lag: int) -> np.ndarray:
        """``r_m(k) = sum_q theta_m(q) conj(theta_m(q + k))`` for k >= 0, per row."""
        coef = self.coefficients
        if lag < 0:
            return np.conj(self.autocovariance(-lag))
        if lag > self.order:
            return np.zeros(coef.shape[0], dtype=complex)
        return np.sum(coef[:, : coef.shape[1] - lag] * np.conj(coef[:, lag:]), axis=1)


def geometric_filter(M: int, c_snr: float, beta: float, length: int | None = None) -> FilterBank:
    """Rank-one geometric filter ``H_k = c_snr * beta**k / sqrt(M) * ones(M, 1)``.

    When ``length`` is omitted the response is truncated at the first ``L``
    with ``beta**L < 1e-12``.
    """
    if M < 1:
        raise ValueError("M must be positive")
    if c_snr < 0:
        raise ValueError("c_snr must be nonnegative")
    if not 0 <= beta < 1:
        raise ValueError(f"beta must lie in [0, 1) for a stable filter, got {beta}")
    if length is None:
        length = 1 if beta == 0 else int(np.floor(np.log(1e-12) / np.log(beta))) + 1
    if length < 1:
        raise ValueError("filter length must be positive")
    gains = c_snr * beta ** np.arange(length) / np.sqrt(M)
    taps = np.repeat(gains[:, None, None], M, axis=1).astype(complex)
    return FilterBank(taps)


def check_block(y, M: int | None = None) -> np.ndarray:
    """Validate an observation block: 2-D, finite, optionally with ``M`` rows."""
    y = np.asarray(y)
    if y.ndim != 2 or y.shape[1] < 1:
        raise ValueError(f"expected an (M, N) block, got shape {y.shape}")
    if M is not None and y.shape[0] != M:
        raise ValueError(f"block has {y.shape[0]} sensors, expected {M}")
    if not np.all(np.isfinite(y)):
        raise ValueError("block contains NaN or Inf")
    return y


def generate_noise(model: NoiseModel, M: int, N: int, rng: RngStream) -> np.ndarray:
    """Draw an exactly stationary ``(M, N)`` noise block.

    ``Q`` pre-window innovations per sensor are drawn so that the first
    returned sample already has the stationary distribution.
    """
    if M < 1 or N < 1:
        raise ValueError("M and N must be positive")
    coef = model.for_sensors(M)
    Q = coef.shape[1] - 1
    z = complex_normal(rng.generator(), (M, N + Q))
    v = coef[:, :1] * z[:, Q:]
    for q in range(1, Q + 1):
        v = v + coef[:, q : q + 1] * z[:, Q - q : Q - q + N]
    return v


def generate_signal(filt: FilterBank, N: int, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
    """Filter complex white noise through ``filt``.

    Returns
    -------
    u : ndarray, shape (M, N)
        The signal block, stationary from the first sample.
    eps : ndarray, shape (K, N + L - 1)
        Driving noise; ``eps[:, L - 1:]`` is aligned with ``u`` and the first
        ``L - 1`` columns are the pre-window innovations.
    """
    if N < 1:
        raise ValueError("N must be positive")
    L, M, K = filt.taps.shape
    eps = complex_normal(rng.generator(), (K, N + L - 1))
    if L == 1:
        return filt.taps[0] @ eps, eps
    # u[:, n] = sum_k taps[k] @ eps[:, L - 1 + n - k], i.e. a "valid" convolution
    u = np.zeros((M, N), dtype=complex)
    for j in range(K):
        u += signal.fftconvolve(filt.taps[:, :, j].T, eps[j][None, :], mode="valid", axes=1)
    return u, eps


def superpose(u, v) -> np.ndarray:
    """Entrywise sum of equally shaped signal and noise blocks."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    return u + v

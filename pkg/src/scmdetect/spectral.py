"""
Finite Fourier transforms, frequency-smoothed periodograms and spectral
coherence matrices on the Fourier grid ``j / N``.

The smoothing window around grid index ``j`` is ``j - B/2 .. j + B/2`` taken
modulo ``N`` (the finite Fourier transform is periodic in frequency).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import ConfigError, DeadChannelError
from .signal_model import check_block

__all__ = [
    "FourierGrid",
    "SpectralEstimate",
    "CoherenceMatrix",
    "fft_frame",
    "dft_direct",
    "smoothed_periodogram",
    "coherence",
    "full_scan",
    "iter_scan",
    "window_matrix",
    "normalize_stack",
    "check_span",
    "even_span",
]

DEFAULT_FLOOR = 1e-12
_CHUNK = 128


@dataclass(frozen=True)
class FourierGrid:
    """The ``N`` Fourier frequencies ``j / N`` in cycles per sample."""

    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("grid size must be positive")

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.N) / self.N

    def __len__(self):
        return self.N

    def index(self, nu: float) -> int:
        """Grid index of ``nu`` (taken modulo 1); raises if ``nu`` is off-grid."""
        pos = float(nu) * self.N
        j = round(pos)
        if abs(pos - j) > 1e-9 * max(1.0, abs(pos)):
            raise ValueError(f"frequency {nu!r} is not on the {self.N}-point Fourier grid")
        return j % self.N

    def frequency(self, j: int) -> float:
        return (j % self.N) / self.N


@dataclass(frozen=True, eq=False)
class SpectralEstimate:
    nu: float
    S_hat: np.ndarray
    B: int


@dataclass(frozen=True, eq=False)
class CoherenceMatrix:
    nu: float
    C_hat: np.ndarray


def even_span(B: int) -> int:
    """Round a requested smoothing span down to an even integer."""
    B = int(B)
    return B - (B % 2)


def check_span(B: int, N: int) -> None:
    if B < 0 or B % 2:
        raise ConfigError(f"smoothing span B must be a nonnegative even integer, got {B}")
    if B + 1 > N:
        raise ConfigError(f"smoothing span B={B} needs B + 1 <= N = {N}")


def fft_frame(y) -> np.ndarray:
    """Column ``j`` is ``N**-0.5 * sum_n y_n exp(-2i pi j (n - 1) / N)``."""
    y = check_block(y)
    return np.fft.fft(y, axis=1) / np.sqrt(y.shape[1])


def dft_direct(y, j: int) -> np.ndarray:
    """Finite Fourier transform at grid index ``j`` by explicit summation."""
    y = np.asarray(y)
    N = y.shape[1]
    phase = np.exp(-2j * np.pi * j * np.arange(N) / N)
    return y @ phase / np.sqrt(N)


def _window(j: int, B: int, N: int) -> np.ndarray:
    return (j + np.arange(-(B // 2), B // 2 + 1)) % N


def window_matrix(frame: np.ndarray, j: int, B: int) -> np.ndarray:
    """``(M, B + 1)`` matrix of transforms around index ``j``, scaled by ``1/sqrt(B + 1)``."""
    check_span(B, frame.shape[1])
    return frame[:, _window(j, B, frame.shape[1])] / np.sqrt(B + 1)


def _hermitize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def smoothed_periodogram(frame: np.ndarray, nu: float, B: int) -> SpectralEstimate:
    """Average of the ``B + 1`` periodogram matrices centred on grid frequency ``nu``."""
    N = frame.shape[1]
    check_span(B, N)
    j = FourierGrid(N).index(nu)
    W = frame[:, _window(j, B, N)]
    S = _hermitize(W @ W.conj().T / (B + 1))
    return SpectralEstimate(nu=j / N, S_hat=S, B=B)


def normalize_stack(S: np.ndarray, floor: float = DEFAULT_FLOOR, offset: int = 0) -> np.ndarray:
    """Coherence normalization of a stack ``(..., M, M)`` of spectral matrices.

    The diagonal of the result is set to exactly one. ``offset`` is only used
    to report the frequency index of a dead channel.
    """
    d = np.real(np.diagonal(S, axis1=-2, axis2=-1))
    bad = d < floor
    if np.any(bad):
        where = np.argwhere(bad)[0]
        freq = int(offset + where[0]) if d.ndim > 1 else None
        raise DeadChannelError(where[-1], d[tuple(where)], floor, frequency_index=freq)
    scale = 1.0 / np.sqrt(d)
    C = _hermitize(S * (scale[..., :, None] * scale[..., None, :]))
    idx = np.arange(S.shape[-1])
    C[..., idx, idx] = 1.0
    return C


def coherence(est: SpectralEstimate, floor: float = DEFAULT_FLOOR) -> CoherenceMatrix:
    """Spectral coherence matrix ``diag(S)^-1/2 S diag(S)^-1/2`` with unit diagonal."""
    return CoherenceMatrix(nu=est.nu, C_hat=normalize_stack(est.S_hat, floor))


def iter_scan(frame: np.ndarray, B: int, floor: float = DEFAULT_FLOOR,
              chunk: int = _CHUNK) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(j0, C)`` with ``C[i]`` the coherence matrix at grid index ``j0 + i``.

    Each chunk starts from a fresh window sum and advances by rank-one
    add/drop updates, so accumulated round-off stays bounded by the chunk length.
    """
    M, N = frame.shape
    check_span(B, N)
    half = B // 2
    for j0 in range(0, N, chunk):
        n = min(chunk, N - j0)
        W = frame[:, _window(j0, B, N)]
        S = np.empty((n, M, M), dtype=complex)
        S[0] = W @ W.conj().T
        if n > 1:
            steps = np.arange(j0 + 1, j0 + n)
            enter = frame[:, (steps + half) % N].T
            leave = frame[:, (steps - half - 1) % N].T
            # rank-two increment: enter enter^* - leave leave^*
            left = np.stack([enter, leave], axis=2)
            right = np.stack([enter, -leave], axis=1).conj()
            np.cumsum(left @ right, axis=0, out=S[1:])
            S[1:] += S[0]
        S /= B + 1
        yield j0, normalize_stack(S, floor, offset=j0)


def full_scan(y, B: int, floor: float = DEFAULT_FLOOR) -> list[CoherenceMatrix]:
    """Coherence matrices at every Fourier frequency of the block ``y``."""
    frame = fft_frame(y)
    N = frame.shape[1]
    out = []
    for j0, C in iter_scan(frame, B, floor):
        out.extend(CoherenceMatrix(nu=(j0 + i) / N, C_hat=C[i]) for i in range(C.shape[0]))
    return out

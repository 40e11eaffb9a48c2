"""
Deterministic random-matrix reference quantities for the coherence detector.

Covers the true transfer function and noise densities, the scale matrix
``Xi(nu) = S_v^-1/2 H H^* S_v^-1/2 + I`` of the equivalent spiked Wishart model,
its spike strengths, the phase-transition map ``phi`` and the
Marchenko-Pastur law with ratio ``c = M / (B + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .signal_model import FilterBank, NoiseModel, complex_normal
from .spectral import FourierGrid

__all__ = [
    "TrueSpectrum",
    "SpikedReference",
    "transfer_function",
    "noise_spectral_density",
    "xi_matrix",
    "spike_gammas",
    "whitened_spike_curve",
    "nu_star",
    "phi",
    "mp_edges",
    "mp_density",
    "mp_cdf",
    "snr_freq",
    "aspect_ratio",
    "spiked_reference",
    "sample_spiked_wishart",
]


def _check_ratio(c):
    if not 0 < c < 1:
        raise ValueError(f"aspect ratio c must lie in (0, 1), got {c}")


def aspect_ratio(M: int, B: int) -> float:
    """``M / (B + 1)``: dimension over the number of averaged periodogram snapshots."""
    return M / (B + 1)


def _transfer_many(filt: FilterBank, nus) -> np.ndarray:
    nus = np.atleast_1d(np.asarray(nus, dtype=float))
    phase = np.exp(-2j * np.pi * np.outer(nus, np.arange(filt.length)))
    return np.tensordot(phase, filt.taps, axes=(1, 0))


def transfer_function(filt: FilterBank, nu: float) -> np.ndarray:
    """``H(nu) = sum_k H_k exp(-2i pi nu k)``, an M x K matrix."""
    return _transfer_many(filt, [nu])[0]


def _density_many(model: NoiseModel, nus) -> np.ndarray:
    nus = np.atleast_1d(np.asarray(nus, dtype=float))
    phase = np.exp(-2j * np.pi * np.outer(np.arange(model.order + 1), nus))
    return np.abs(model.coefficients @ phase).T ** 2


def noise_spectral_density(model: NoiseModel, nu: float, M: int | None = None) -> np.ndarray:
    """Per-sensor densities ``s_m(nu) = |sum_q theta_m(q) exp(-2i pi nu q)|^2``.

    A shared model returns a single value unless ``M`` asks for it broadcast.
    """
    s = _density_many(model, [nu])[0]
    if M is not None:
        s = np.broadcast_to(s, (M,)).copy() if s.size == 1 else s
        if s.size != M:
            raise ValueError(f"noise model describes {s.size} sensors, expected {M}")
    return s


@dataclass(frozen=True, eq=False)
class TrueSpectrum:
    """Population quantities at one frequency.

    ``S_v`` holds the diagonal noise density matrix, ``signal`` the whitened
    signal matrix ``S_v^-1/2 H H^* S_v^-1/2`` and ``Xi`` its identity shift.
    """

    nu: float
    H: np.ndarray
    S_v: np.ndarray
    signal: np.ndarray

    @property
    def Xi(self) -> np.ndarray:
        return self.signal + np.eye(self.signal.shape[0])


def _whitened_factor(filt: FilterBank, model: NoiseModel, nus):
    H = _transfer_many(filt, nus)
    s = _density_many(model, nus)
    if s.shape[1] not in (1, filt.num_sensors):
        raise ValueError(f"noise model describes {s.shape[1]} sensors, filter has {filt.num_sensors}")
    if np.any(s <= 0):
        raise ValueError("noise spectral density vanishes")
    return H / np.sqrt(s)[:, :, None], H, s


def xi_matrix(filt: FilterBank, model: NoiseModel, nu: float) -> TrueSpectrum:
    G, H, s = _whitened_factor(filt, model, [nu])
    G, H = G[0], H[0]
    sig = G @ G.conj().T
    sig = 0.5 * (sig + sig.conj().T)
    dens = np.broadcast_to(s[0], (filt.num_sensors,))
    return TrueSpectrum(nu=float(nu), H=H, S_v=np.diag(dens), signal=sig)


def spike_gammas(ts: TrueSpectrum, K: int) -> np.ndarray:
    """Top-``K`` eigenvalues of ``Xi - I``, clipped at zero, in descending order."""
    lam = np.linalg.eigvalsh(ts.signal)[::-1]
    return np.clip(lam[:K], 0.0, None)


def whitened_spike_curve(filt: FilterBank, model: NoiseModel, nus) -> np.ndarray:
    """Largest whitened signal eigenvalue ``lambda_1(Xi(nu) - I)`` at each ``nu``.

    Uses the K x K Gram matrix of the whitened transfer function, which carries
    the same nonzero spectrum as the M x M matrix.
    """
    G, _, _ = _whitened_factor(filt, model, nus)
    gram = np.conj(np.swapaxes(G, 1, 2)) @ G
    return np.linalg.eigvalsh(gram)[:, -1]


def nu_star(filt: FilterBank, model: NoiseModel, grid: FourierGrid) -> float:
    """Grid frequency maximizing the top whitened signal eigenvalue.

    Values within a relative 1e-12 of the maximum count as ties, resolved
    toward the smallest frequency.
    """
    curve = whitened_spike_curve(filt, model, grid.frequencies)
    top = curve.max()
    j = int(np.flatnonzero(curve >= top - 1e-12 * abs(top))[0])
    return grid.frequency(j)


def snr_freq(filt: FilterBank, model: NoiseModel, grid: FourierGrid) -> float:
    """``max_nu sum_m ||h_m(nu)||^2 / s_m(nu)`` over the grid."""
    G, _, _ = _whitened_factor(filt, model, grid.frequencies)
    return float(np.max(np.sum(np.abs(G) ** 2, axis=(1, 2))))


def phi(gamma: float, c: float) -> float:
    """Almost-sure limit of a sample eigenvalue attached to spike ``gamma``."""
    _check_ratio(c)
    if gamma > np.sqrt(c):
        return (gamma + 1.0) * (gamma + c) / gamma
    return (1.0 + np.sqrt(c)) ** 2


def mp_edges(c: float) -> tuple[float, float]:
    _check_ratio(c)
    r = np.sqrt(c)
    return (1.0 - r) ** 2, (1.0 + r) ** 2


def mp_density(x, c: float):
    lo, hi = mp_edges(c)
    x = np.asarray(x, dtype=float)
    inside = (x > lo) & (x < hi)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = np.sqrt((hi - xi) * (xi - lo)) / (2 * np.pi * c * xi)
    return out if out.ndim else float(out)


def _mp_cdf_scalar(x, c, lo, hi):
    if x <= lo:
        return 0.0
    if x >= hi:
        return 1.0
    val, _ = integrate.quad(lambda t: mp_density(t, c), lo, x, epsabs=1e-10, epsrel=1e-10, limit=200)
    return min(max(val, 0.0), 1.0)


def mp_cdf(x, c: float):
    """Marchenko-Pastur distribution function with ratio ``c`` (unit scale).

    Accepts a scalar or an array; evaluated by adaptive quadrature.
    """
    lo, hi = mp_edges(c)
    if np.ndim(x) == 0:
        return _mp_cdf_scalar(float(x), c, lo, hi)
    x = np.asarray(x, dtype=float)
    flat = [_mp_cdf_scalar(v, c, lo, hi) for v in x.ravel()]
    return np.asarray(flat).reshape(x.shape)


@dataclass(frozen=True)
class SpikedReference:
    c: float
    gammas: tuple[float, ...]
    bulk_edges: tuple[float, float]
    spike_limits: tuple[float, ...]

    @property
    def supercritical(self) -> tuple[int, ...]:
        """Indices of spikes that separate from the bulk (``gamma > sqrt(c)``)."""
        r = np.sqrt(self.c)
        return tuple(k for k, g in enumerate(self.gammas) if g > r)


def spiked_reference(c: float, gammas) -> SpikedReference:
    gammas = tuple(sorted((float(g) for g in gammas), reverse=True))
    if any(g < 0 for g in gammas):
        raise ValueError("spike strengths must be nonnegative")
    return SpikedReference(
        c=float(c),
        gammas=gammas,
        bulk_edges=mp_edges(c),
        spike_limits=tuple(phi(g, c) for g in gammas),
    )


def sample_spiked_wishart(M: int, n: int, gammas, rng: np.random.Generator) -> np.ndarray:
    """Complex sample covariance ``Xi^1/2 X X^* Xi^1/2 / n`` with ``Xi = I + sum_k gamma_k e_k e_k^*``."""
    gammas = np.asarray(gammas, dtype=float)
    X = complex_normal(rng, (M, n))
    scale = np.ones(M)
    scale[: gammas.size] += gammas
    X *= np.sqrt(scale)[:, None]
    S = X @ X.conj().T / n
    return 0.5 * (S + S.conj().T)

"""Detection of low-rank signals in high-dimensional time series through the
largest eigenvalue of the spectral coherence matrix."""

from .detection import (
    DetectorConfig,
    EigenSpectrum,
    ScanResult,
    consistency_window,
    decide,
    hermitian_eigs,
    scan_block,
    scan_statistic,
)
from .errors import ConfigError, DeadChannelError, NumericalError
from .rmt import (
    SpikedReference,
    TrueSpectrum,
    mp_cdf,
    mp_edges,
    noise_spectral_density,
    nu_star,
    phi,
    snr_freq,
    spike_gammas,
    spiked_reference,
    transfer_function,
    xi_matrix,
)
from .signal_model import (
    FilterBank,
    NoiseModel,
    RngStream,
    generate_noise,
    generate_signal,
    geometric_filter,
    superpose,
)
from .spectral import (
    CoherenceMatrix,
    FourierGrid,
    SpectralEstimate,
    coherence,
    fft_frame,
    full_scan,
    smoothed_periodogram,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DeadChannelError",
    "NumericalError",
    "DetectorConfig",
    "EigenSpectrum",
    "ScanResult",
    "consistency_window",
    "decide",
    "hermitian_eigs",
    "scan_block",
    "scan_statistic",
    "SpikedReference",
    "TrueSpectrum",
    "mp_cdf",
    "mp_edges",
    "noise_spectral_density",
    "nu_star",
    "phi",
    "snr_freq",
    "spike_gammas",
    "spiked_reference",
    "transfer_function",
    "xi_matrix",
    "FilterBank",
    "NoiseModel",
    "RngStream",
    "generate_noise",
    "generate_signal",
    "geometric_filter",
    "superpose",
    "CoherenceMatrix",
    "FourierGrid",
    "SpectralEstimate",
    "coherence",
    "fft_frame",
    "full_scan",
    "smoothed_periodogram",
]

"""Experiment configuration: a flat TOML table mirroring :class:`ExperimentConfig`."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..rmt import aspect_ratio, whitened_spike_curve
from ..signal_model import FilterBank, NoiseModel, geometric_filter
from ..spectral import FourierGrid, even_span

try:  # Python >= 3.11
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

__all__ = ["ExperimentConfig", "load_config", "MODES", "DEFAULT_BETA"]

MODES = ("null-dist", "roc", "phase-sweep", "spectrum")
DEFAULT_BETA = 10 / 11


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment at fixed dimensions.

    ``B`` is rounded down to an even span on construction. The signal strength
    is set either directly by ``c_snr`` or by ``gamma``, the target top spike
    ``lambda_1(Xi(nu*)) - 1``, which is inverted in closed form (the whitened
    spike is quadratic in ``c_snr``). ``alpha`` is informational only.
    """

    M: int
    N: int
    B: int
    K: int = 1
    c_snr: float | None = None
    gamma: float | None = None
    beta: float = DEFAULT_BETA
    filter_length: int | None = None
    theta: tuple[float, ...] = (1.0, 0.5)
    trials: int = 50
    seed: int = 0
    epsilon: tuple[float, ...] = ()
    mode: str = "null-dist"
    alpha: float | None = None
    nu0: float = 0.0
    gamma_grid: tuple[float, ...] = ()
    hypothesis: str = "H1"
    roc_points: int = 200

    def __post_init__(self):
        set_ = lambda name, value: object.__setattr__(self, name, value)  # noqa: E731
        for name in ("M", "N", "B", "K", "trials", "seed", "roc_points"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{name} must be an integer, got {value!r}")
            set_(name, int(value))
        set_("B", even_span(self.B))
        set_("theta", tuple(float(t) for t in self.theta))
        set_("epsilon", tuple(float(e) for e in self.epsilon))
        set_("gamma_grid", tuple(float(g) for g in self.gamma_grid))

        if self.M < 1 or self.N < 1:
            raise ConfigError("M and N must be positive")
        if not self.M < self.B + 1 <= self.N:
            raise ConfigError(f"need M < B + 1 <= N, got M={self.M}, B={self.B}, N={self.N}")
        if self.K != 1:
            raise ConfigError("only the rank-one (K = 1) geometric filter is supported")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.c_snr is not None and self.gamma is not None:
            raise ConfigError("set at most one of c_snr and gamma")
        if self.c_snr is not None and not self.c_snr >= 0:
            raise ConfigError("c_snr must be nonnegative")
        if self.gamma is not None and not self.gamma >= 0:
            raise ConfigError("gamma must be nonnegative")
        if not 0 <= self.beta < 1:
            raise ConfigError("beta must lie in [0, 1)")
        if self.filter_length is not None and self.filter_length < 1:
            raise ConfigError("filter_length must be positive")
        if any(e <= 0 for e in self.epsilon):
            raise ConfigError("epsilon values must be positive")
        if any(g < 0 for g in self.gamma_grid):
            raise ConfigError("gamma_grid values must be nonnegative")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.hypothesis not in ("H0", "H1"):
            raise ConfigError("hypothesis must be 'H0' or 'H1'")
        if self.roc_points < 2:
            raise ConfigError("roc_points must be at least 2")
        try:
            FourierGrid(self.N).index(self.nu0)
            NoiseModel.shared(self.theta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def c(self) -> float:
        return aspect_ratio(self.M, self.B)

    @property
    def grid(self) -> FourierGrid:
        return FourierGrid(self.N)

    def noise_model(self) -> NoiseModel:
        return NoiseModel.shared(self.theta)

    def resolved_c_snr(self) -> float:
        if self.gamma is None:
            return 0.0 if self.c_snr is None else float(self.c_snr)
        if self.gamma == 0:
            return 0.0
        unit = geometric_filter(self.M, 1.0, self.beta, self.filter_length)
        top = whitened_spike_curve(unit, self.noise_model(), self.grid.frequencies).max()
        return math.sqrt(self.gamma / top)

    def signal_filter(self) -> FilterBank:
        return geometric_filter(self.M, self.resolved_c_snr(), self.beta, self.filter_length)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def scaling_regime(cls, N: int, **kwargs) -> "ExperimentConfig":
        """``B = N**0.7`` (rounded down to even) with ``M = floor(N**0.7) // 2``."""
        span = math.floor(N**0.7)
        return cls(M=span // 2, N=N, B=even_span(span), **kwargs)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_SEQUENCES = {"theta", "epsilon", "gamma_grid"}


def config_from_mapping(data: dict, **overrides) -> ExperimentConfig:
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
    values = dict(data)
    values.update({k: v for k, v in overrides.items() if v is not None})
    for key in _SEQUENCES & set(values):
        if not isinstance(values[key], (list, tuple)):
            raise ConfigError(f"{key} must be a list of numbers")
    missing = [name for name in ("M", "N", "B") if name not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, **overrides) -> ExperimentConfig:
    """Read a flat TOML file; unknown keys and nested tables are rejected."""
    try:
        with open(Path(path), "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"config must be flat; found tables: {', '.join(nested)}")
    return config_from_mapping(data, **overrides)

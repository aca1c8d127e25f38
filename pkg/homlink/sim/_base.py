# sim/_base.py
import math

import numpy as np
from scipy.constants import c as C_LIGHT

from homlink.core.errors import InvalidParameterError

# Fourier limit of a Gaussian pulse, FWHM(t) * FWHM(nu).
GAUSSIAN_TIME_BANDWIDTH = 2.0 * math.log(2.0) / math.pi
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


def require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameterError(f"{name} must be finite, got {value!r}")
    return value


def require_positive(name: str, value: float) -> float:
    value = require_finite(name, value)
    if value <= 0.0:
        raise InvalidParameterError(f"{name} must be > 0, got {value!r}")
    return value


def require_non_negative(name: str, value: float) -> float:
    value = require_finite(name, value)
    if value < 0.0:
        raise InvalidParameterError(f"{name} must be >= 0, got {value!r}")
    return value


def require_fraction(name: str, value: float) -> float:
    value = require_finite(name, value)
    if not 0.0 <= value <= 1.0:
        raise InvalidParameterError(f"{name} must lie in [0, 1], got {value!r}")
    return value


def counter_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, stream); streams never share state."""
    if seed < 0 or stream < 0:
        raise InvalidParameterError("seed and stream must be non-negative")
    return np.random.Generator(np.random.Philox(key=[int(seed), int(stream)]))


__all__ = [
    "C_LIGHT",
    "counter_rng",
    "FWHM_PER_SIGMA",
    "GAUSSIAN_TIME_BANDWIDTH",
    "require_finite",
    "require_fraction",
    "require_non_negative",
    "require_positive",
]

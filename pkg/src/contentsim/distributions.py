"""Inverse-transform samplers and min-max normalization.

Every sampler takes its uniform variate(s) as an argument, so the functions
are pure and the caller owns the random stream.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, UnsupportedParameterError

# largest double below 1; keeps the Beta output half-open so that b < v can't tie at 1
_ONE_MINUS = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class BetaParams:
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ParameterError(
                f"Beta shape parameters must be positive, got alpha={self.alpha}, beta={self.beta}"
            )


@dataclass(frozen=True)
class TruncatedPowerLawParams:
    """Density proportional to ``x**-gamma`` on ``[x_min, x_max]``."""

    gamma: float = 1.5
    x_min: float = 1.0
    x_max: float = 1e4

    def __post_init__(self):
        if not self.gamma > 1:
            raise ParameterError(f"power-law exponent must be > 1, got gamma={self.gamma}")
        if not (0 < self.x_min < self.x_max) or not np.isfinite(self.x_max):
            raise ParameterError(
                f"need 0 < x_min < x_max < inf, got x_min={self.x_min}, x_max={self.x_max}"
            )


def sample_beta(params: BetaParams, u):
    """Map uniform variate(s) ``u`` in [0, 1) to Be(1, beta) by exact inversion.

    Uses ``v = 1 - (1 - u)**(1/beta)``, evaluated as ``-expm1(log1p(-u)/beta)``
    so that very large ``beta`` does not lose all precision. Scalars in give a
    float out; arrays give arrays.
    """
    if params.alpha != 1:
        raise UnsupportedParameterError(
            f"only alpha = 1 is supported (closed-form inverse), got alpha={params.alpha}"
        )
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u >= 1)):
        raise ParameterError("uniform variates must lie in [0, 1)")
    v = -np.expm1(np.log1p(-u) / params.beta)
    v = np.minimum(v, _ONE_MINUS)
    return float(v) if v.ndim == 0 else v


def beta_cdf(params: BetaParams, v):
    """CDF of Be(1, beta): ``1 - (1 - v)**beta`` clipped to [0, 1]."""
    v = np.clip(np.asarray(v, dtype=float), 0.0, 1.0)
    return -np.expm1(params.beta * np.log1p(-v))


def sample_truncated_power_law(params: TruncatedPowerLawParams, u):
    """Inverse CDF of the truncated power law; ``u=0 -> x_min``, ``u=1 -> x_max``."""
    u = np.asarray(u, dtype=float)
    if np.any((u < 0) | (u > 1)):
        raise ParameterError("uniform variates must lie in [0, 1]")
    e = 1.0 - params.gamma
    lo, hi = params.x_min**e, params.x_max**e
    x = (lo + u * (hi - lo)) ** (1.0 / e)
    x = np.clip(x, params.x_min, params.x_max)
    return float(x) if x.ndim == 0 else x


def truncated_power_law_cdf(params: TruncatedPowerLawParams, x):
    x = np.clip(np.asarray(x, dtype=float), params.x_min, params.x_max)
    e = 1.0 - params.gamma
    lo, hi = params.x_min**e, params.x_max**e
    return (x**e - lo) / (hi - lo)


def unity_normalize(values) -> np.ndarray:
    """Min-max rescale to [0, 1]. A constant input maps to all zeros."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise ValueError("cannot normalize an empty sequence")
    lo, hi = x.min(), x.max()
    if hi == lo:
        return np.zeros_like(x)
    out = (x - lo) / (hi - lo)
    # exact endpoints regardless of rounding in the division
    out[x == lo] = 0.0
    out[x == hi] = 1.0
    return out

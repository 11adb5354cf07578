"""Generalised Pareto distribution primitives.

All routines work on threshold *excesses* ``y >= 0`` with distribution
function ``H(y; sigma, xi) = 1 - (1 + xi*y/sigma)_+^(-1/xi)`` and use the
exponential-limit formulas once ``|xi|`` falls below ``SHAPE_SMALL``;
elsewhere evaluation goes through ``log1p``/``expm1`` so the crossover is
smooth to well below the switch tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError

# |xi| below this uses the exponential-limit formulas.
SHAPE_SMALL = 1e-8


@dataclass(frozen=True)
class GpdParams:
    """Scale/shape pair of the excess model."""

    scale: float
    shape: float

    def __post_init__(self) -> None:
        if not (self.scale > 0.0) or not math.isfinite(self.scale):
            raise InputError(f"scale must be a positive finite real, got {self.scale}")
        if not math.isfinite(self.shape):
            raise InputError(f"shape must be finite, got {self.shape}")

    @property
    def upper_endpoint(self) -> float:
        """Upper support endpoint of the excess distribution (inf for shape >= 0)."""
        if self.shape < 0.0:
            return -self.scale / self.shape
        return math.inf


def _as_nonneg_array(y, name: str = "y") -> np.ndarray:
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0.0):
        raise InputError(f"{name} must be non-negative")
    return arr


def gpd_cdf(y, p: GpdParams):
    """Distribution function H(y; scale, shape) for excesses ``y >= 0``.

    Values at or beyond a finite upper endpoint (shape < 0) map to exactly 1.
    Accepts scalars or arrays; returns the matching shape.
    """
    arr = _as_nonneg_array(y)
    sigma, xi = p.scale, p.shape
    if abs(xi) < SHAPE_SMALL:
        out = -np.expm1(-arr / sigma)
    else:
        z = xi * arr / sigma
        with np.errstate(invalid="ignore", divide="ignore"):
            out = -np.expm1(-np.log1p(z) / xi)
        if xi < 0.0:
            out = np.where(z <= -1.0, 1.0, out)
    out = np.clip(out, 0.0, 1.0)
    return out if isinstance(out, np.ndarray) and out.ndim else float(out)


def gpd_log_density(y, p: GpdParams):
    """Log of the GPD density; ``-inf`` for points outside the support.

    Out-of-support points are reported rather than raised so likelihood code
    can traverse infeasible parameter values.
    """
    arr = _as_nonneg_array(y)
    sigma, xi = p.scale, p.shape
    if abs(xi) < SHAPE_SMALL:
        out = -math.log(sigma) - arr / sigma
    else:
        z = xi * arr / sigma
        with np.errstate(invalid="ignore", divide="ignore"):
            logp = np.log1p(z)
            out = -math.log(sigma) - (1.0 + 1.0 / xi) * logp
        out = np.where(z <= -1.0, -np.inf, out)
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def gpd_quantile(prob, p: GpdParams, allow_endpoint: bool = False):
    """Quantile function H^{-1}(prob) for ``0 <= prob < 1``.

    ``prob = 1`` is rejected unless ``allow_endpoint`` and the shape is
    negative, in which case the finite endpoint ``-scale/shape`` is returned.
    """
    arr = np.asarray(prob, dtype=float)
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InputError("prob must lie in [0, 1]")
    if np.any(arr == 1.0) and not (allow_endpoint and p.shape < 0.0):
        raise InputError("prob = 1 maps to the upper endpoint; pass allow_endpoint=True "
                         "for a negative-shape model")
    sigma, xi = p.scale, p.shape
    if abs(xi) < SHAPE_SMALL:
        out = -sigma * np.log1p(-arr)
    else:
        with np.errstate(invalid="ignore", divide="ignore"):
            out = sigma * np.expm1(-xi * np.log1p(-arr)) / xi
        if xi < 0.0:
            out = np.where(arr == 1.0, -sigma / xi, out)
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def gpd_sample(n: int, p: GpdParams, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` independent excesses by inverse-CDF, one uniform per draw."""
    if n < 0:
        raise InputError("n must be non-negative")
    u = rng.random(int(n))
    if n == 0:
        return np.empty(0, dtype=float)
    return np.asarray(gpd_quantile(u, p), dtype=float)


def shift_threshold(p: GpdParams, delta: float) -> GpdParams:
    """Parameters of excesses of a threshold raised by ``delta``.

    Threshold stability: excesses of u follow GPD(scale, shape) implies
    excesses of u + delta follow GPD(scale + shape*delta, shape).  Below the
    small-shape switch the model is the memoryless exponential, so the scale
    is left unchanged; this keeps the stability identity exact across the
    switch used by the other operations.
    """
    if delta < 0.0:
        raise InputError("delta must be non-negative")
    if p.shape < 0.0 and delta >= p.upper_endpoint:
        raise InputError(
            f"delta={delta} reaches the upper endpoint {p.upper_endpoint} of the model"
        )
    if abs(p.shape) < SHAPE_SMALL:
        return GpdParams(scale=p.scale, shape=p.shape)
    return GpdParams(scale=p.scale + p.shape * delta, shape=p.shape)

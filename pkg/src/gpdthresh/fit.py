"""Maximum-likelihood GPD fitting and the full tail model.

The tail model combines a threshold u, the sample exceedance proportion
lambda_u, and GPD parameters for the excesses, which together determine
unconditional quantiles ``x_p`` solving ``lambda_u * (1 - H(x_p - u)) = p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleError, InputError
from .gpd import SHAPE_SMALL, GpdParams, gpd_log_density, gpd_quantile
from .simplex import fit_gpd_batch, pad_samples

#: Fewest excesses we are willing to fit two parameters to.
MIN_FIT_SIZE = 10


@dataclass(frozen=True)
class GpdFit:
    """Result of a maximum-likelihood GPD fit."""

    params: GpdParams
    neg_log_lik: float
    n_excess: int
    converged: bool
    iterations: int


@dataclass(frozen=True)
class ThresholdModel:
    """Fitted tail model: threshold, exceedance rate and excess distribution."""

    threshold: float
    exceed_prob: float
    params: GpdParams
    n_total: int
    n_excess: int

    def __post_init__(self) -> None:
        if not (0.0 < self.exceed_prob <= 1.0):
            raise InputError("exceed_prob must lie in (0, 1]")
        if self.n_total > 0 and abs(self.exceed_prob - self.n_excess / self.n_total) > 1e-12:
            raise InputError("exceed_prob must equal n_excess / n_total")


def neg_log_likelihood(p: GpdParams, excesses) -> float:
    """Negative GPD log-likelihood; ``+inf`` when any excess leaves the support."""
    arr = np.asarray(excesses, dtype=float)
    if arr.size == 0:
        raise InputError("need at least one excess")
    if np.any(arr <= 0.0):
        raise InputError("excesses must be strictly positive")
    return float(-np.sum(gpd_log_density(arr, p)))


def fit_gpd(excesses, min_size: int = MIN_FIT_SIZE) -> GpdFit:
    """Fit GPD parameters to threshold excesses by a simplex search.

    The search runs on (log scale, shape) from the exponential-fit start plus
    two jittered restarts, keeping the lowest negative log-likelihood; shape
    is confined to (-1, 5).  Non-convergence is reported through the flag,
    with the best point still returned.
    """
    arr = np.asarray(excesses, dtype=float)
    if np.any(arr <= 0.0):
        raise InputError("excesses must be strictly positive")
    if arr.size < min_size:
        raise InfeasibleError(f"need at least {min_size} excesses to fit, got {arr.size}")
    y, n = pad_samples([arr])
    res = fit_gpd_batch(y, n, lazy=False)
    return GpdFit(
        params=GpdParams(scale=float(res.sigma[0]), shape=float(res.xi[0])),
        neg_log_lik=float(res.nll[0]),
        n_excess=int(arr.size),
        converged=bool(res.converged[0]),
        iterations=int(res.iterations[0]),
    )


def fit_threshold_model(data, u: float, min_size: int = MIN_FIT_SIZE) -> ThresholdModel:
    """Fit the tail model at threshold ``u`` from raw data.

    Excesses are the strictly positive differences ``x - u``; values equal to
    the threshold are excluded (continuous-data convention).
    """
    arr = np.asarray(data, dtype=float)
    if arr.size == 0:
        raise InputError("data is empty")
    excesses = arr[arr > u] - u
    if excesses.size < min_size:
        raise InfeasibleError(
            f"only {excesses.size} values exceed u={u}; need at least {min_size}"
        )
    fit = fit_gpd(excesses, min_size=min_size)
    return ThresholdModel(
        threshold=float(u),
        exceed_prob=excesses.size / arr.size,
        params=fit.params,
        n_total=int(arr.size),
        n_excess=int(excesses.size),
    )


def unconditional_quantile(model: ThresholdModel, p: float) -> float:
    """Quantile of X with exceedance probability ``p`` under the tail model.

    Solves ``lambda_u * (1 - H(x - u)) = p``, valid for ``0 < p < lambda_u``.
    """
    if not (0.0 < p < model.exceed_prob):
        raise InputError(
            f"p must lie in (0, {model.exceed_prob}) for a threshold-excess model"
        )
    return model.threshold + float(gpd_quantile(1.0 - p / model.exceed_prob, model.params))


def quantile_given_rate(u, lam, sigma, xi, p):
    """Vectorised tail quantile ``u + (sigma/xi) * ((p/lam)^(-xi) - 1)``.

    Unlike :func:`unconditional_quantile` this does not restrict ``p < lam``:
    for ``p >= lam`` it returns the model's continuous extension below the
    threshold, which keeps bootstrap summaries defined when the resampled
    exceedance rate drops below the target probability.
    """
    lam = np.asarray(lam, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    xi = np.asarray(xi, dtype=float)
    logr = np.log(p / lam)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        out = u + sigma * np.expm1(-xi * logr) / xi
    small = np.abs(xi) < SHAPE_SMALL
    if np.any(small):
        out = np.where(small, u - sigma * logr, out)
    return out


def nll_gradient(p: GpdParams, excesses, rel_step: float = 1e-6) -> np.ndarray:
    """Central finite-difference gradient of the negative log-likelihood.

    Step sizes scale with the parameter magnitudes; used as an independent
    check that a fit sits at a stationary point.
    """
    arr = np.asarray(excesses, dtype=float)
    h_s = rel_step * (abs(p.scale) + rel_step)
    h_x = rel_step * (abs(p.shape) + rel_step)
    ds = (
        neg_log_likelihood(GpdParams(p.scale + h_s, p.shape), arr)
        - neg_log_likelihood(GpdParams(p.scale - h_s, p.shape), arr)
    ) / (2.0 * h_s)
    dx = (
        neg_log_likelihood(GpdParams(p.scale, p.shape + h_x), arr)
        - neg_log_likelihood(GpdParams(p.scale, p.shape - h_x), arr)
    ) / (2.0 * h_x)
    return np.array([ds, dx])

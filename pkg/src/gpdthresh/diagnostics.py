"""Data products behind the standard threshold-diagnostic figures.

Everything here returns plain column arrays ready for CSV emission; no
rendering.  All outputs are pure functions of (inputs, stream).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bootalg import _alg1_draws, _alg2_draws, SummarySpec, percentile_ci, BootstrapSummary
from .empq import interp_rows, plotting_points
from .errors import InfeasibleError, InputError
from .eqd import CandidateGrid, EqdConfig, SkippedCandidate, select_threshold
from .fit import MIN_FIT_SIZE, ThresholdModel, fit_gpd, quantile_given_rate
from .gpd import gpd_quantile
from .streams import generator, root_stream, substream


@dataclass(frozen=True)
class StabilityCurve:
    """Shape-parameter estimates with bootstrap CIs across candidate thresholds."""

    thresholds: np.ndarray
    n_excess: np.ndarray
    xi_hat: np.ndarray
    ci_lo: np.ndarray
    ci_hi: np.ndarray
    skipped: list[SkippedCandidate] = field(default_factory=list)


def parameter_stability(data, grid: CandidateGrid, B: int, level: float,
                        stream: np.random.SeedSequence | None = None,
                        seed: int = 0) -> StabilityCurve:
    """Per-candidate shape MLE with a parametric-bootstrap percentile CI."""
    arr = np.asarray(data, dtype=float)
    root = stream if stream is not None else root_stream(seed)
    spec = SummarySpec.parameter("shape")

    rows_t, rows_n, rows_xi, rows_lo, rows_hi = [], [], [], [], []
    skipped: list[SkippedCandidate] = []
    for i, u in enumerate(grid.thresholds):
        excesses = arr[arr > u] - u
        if excesses.size < MIN_FIT_SIZE:
            skipped.append(SkippedCandidate(
                float(u), f"{excesses.size} exceedances < {MIN_FIT_SIZE}"))
            continue
        fit = fit_gpd(excesses)
        draws = _alg1_draws(arr, float(u), B, substream(root, i))
        lo, hi = percentile_ci(draws.summarise(spec), level)
        rows_t.append(float(u))
        rows_n.append(excesses.size)
        rows_xi.append(fit.params.shape)
        rows_lo.append(lo)
        rows_hi.append(hi)
    if not rows_t:
        raise InfeasibleError("no candidate threshold had enough exceedances")
    return StabilityCurve(
        thresholds=np.array(rows_t), n_excess=np.array(rows_n, dtype=np.intp),
        xi_hat=np.array(rows_xi), ci_lo=np.array(rows_lo), ci_hi=np.array(rows_hi),
        skipped=skipped,
    )


@dataclass(frozen=True)
class QqData:
    """QQ-plot rows: model quantiles, observed order statistics, tolerance bounds."""

    model_q: np.ndarray
    empirical_q: np.ndarray
    tol_lo: np.ndarray
    tol_hi: np.ndarray


def qq_data(model: ThresholdModel, excesses, B: int, level: float,
            stream: np.random.SeedSequence | None = None, seed: int = 0) -> QqData:
    """Model-vs-empirical quantiles at the plotting positions with a
    pointwise simulation envelope of the order statistics.

    The top plotting position is 1; for a non-negative shape the model
    quantile there is unbounded and reported as ``inf``.
    """
    if B < 20:
        raise InputError("envelope needs B >= 20 simulated samples")
    exc = np.sort(np.asarray(excesses, dtype=float))
    n_u = exc.size
    if n_u != model.n_excess:
        raise InputError("excesses do not match the fitted model's count")
    root = stream if stream is not None else root_stream(seed)

    q = plotting_points(n_u)
    model_q = np.empty(n_u)
    model_q[:-1] = np.asarray(gpd_quantile(q[:-1], model.params))
    if model.params.shape < 0.0:
        model_q[-1] = float(gpd_quantile(1.0, model.params, allow_endpoint=True))
    else:
        model_q[-1] = math.inf

    sims = np.empty((B, n_u))
    for b in range(B):
        rng = generator(substream(root, b))
        sims[b] = gpd_quantile(rng.random(n_u), model.params)
    sims.sort(axis=1)

    # pointwise envelope: per position, equal-tailed interval over the B draws
    cols = np.sort(sims.T, axis=1)
    alpha = (1.0 - level) / 2.0
    bounds = interp_rows(cols, np.array([alpha, 1.0 - alpha]))
    return QqData(model_q=model_q, empirical_q=exc,
                  tol_lo=bounds[:, 0], tol_hi=bounds[:, 1])


@dataclass(frozen=True)
class ReturnLevelCurve:
    """Return-level point estimates with single- and double-bootstrap bands."""

    T: np.ndarray
    point: np.ndarray
    alg1_lo: np.ndarray
    alg1_hi: np.ndarray
    alg2_lo: np.ndarray
    alg2_hi: np.ndarray
    threshold: float


def return_level_curve(data, grid: CandidateGrid, cfg: EqdConfig,
                       T_min: float, T_max: float, n_points: int,
                       obs_per_year: float, B2: int, B1: int, level: float,
                       stream: np.random.SeedSequence | None = None,
                       workers: int = 1) -> ReturnLevelCurve:
    """Return levels at log-spaced periods with parameter-only (alg1) and
    threshold-aware (alg2) percentile bands."""
    if not (0.0 < T_min < T_max) or n_points < 2 or obs_per_year <= 0.0:
        raise InputError("need 0 < T_min < T_max, n_points >= 2, obs_per_year > 0")
    arr = np.asarray(data, dtype=float)
    root = stream if stream is not None else root_stream(cfg.seed)

    sel = select_threshold(arr, grid, cfg, stream=substream(root, 0))
    m = sel.model
    draws1 = _alg1_draws(arr, sel.chosen, B1, substream(root, 1), model=m,
                         min_size=cfg.min_excess)
    draws2 = _alg2_draws(arr, grid, cfg, B2, B1, substream(root, 2), workers=workers)

    T = np.geomspace(T_min, T_max, int(n_points))
    point = np.empty(T.size)
    lo1 = np.empty(T.size)
    hi1 = np.empty(T.size)
    lo2 = np.empty(T.size)
    hi2 = np.empty(T.size)
    for k, t in enumerate(T):
        p = 1.0 / (t * obs_per_year)
        point[k] = float(quantile_given_rate(
            m.threshold, m.exceed_prob, m.params.scale, m.params.shape, p))
        spec = SummarySpec.return_level(float(t), obs_per_year)
        lo1[k], hi1[k] = percentile_ci(draws1.summarise(spec), level)
        lo2[k], hi2[k] = percentile_ci(draws2.summarise(spec), level)
    return ReturnLevelCurve(T=T, point=point, alg1_lo=lo1, alg1_hi=hi1,
                            alg2_lo=lo2, alg2_hi=hi2, threshold=sel.chosen)

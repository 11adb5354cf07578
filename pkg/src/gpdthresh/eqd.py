"""Expected-quantile-discrepancy threshold selection.

For a candidate threshold u the goodness-of-fit score of one bootstrap
resample of the excesses is the mean absolute gap, over m equally spaced
probabilities p_j = j/(m+1), between fitted-model quantiles and the sample
quantile function of the calibration sample.  Averaging over B resamples
gives d_E(u); the selected threshold minimises d_E over the candidate grid.

Two metric variants are supported: ``eqd`` compares on the data scale,
``varty`` first maps the calibration sample to Exponential(1) margins with
the fitted parameters and compares against unit-exponential quantiles.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .empq import interp_rows, sample_quantile
from .errors import InfeasibleError, InputError, NumericalError
from .fit import MIN_FIT_SIZE, GpdFit, ThresholdModel
from .gpd import SHAPE_SMALL, GpdParams
from .simplex import fit_gpd_batch, pad_samples
from .streams import generator, root_stream, substream

VARIANTS = ("eqd", "varty")
CALIBRATIONS = ("bootstrap-sample", "observed-sample")


@dataclass(frozen=True)
class CandidateGrid:
    """Ordered candidate thresholds, optionally with their sample-quantile levels (%)."""

    thresholds: np.ndarray
    levels: np.ndarray | None = None

    def __post_init__(self) -> None:
        thr = np.asarray(self.thresholds, dtype=float)
        if thr.ndim != 1 or thr.size == 0:
            raise InputError("candidate grid must be a nonempty 1-D array")
        if np.any(np.diff(thr) <= 0.0):
            raise InputError("candidate thresholds must be strictly increasing")
        object.__setattr__(self, "thresholds", thr)
        if self.levels is not None:
            lev = np.asarray(self.levels, dtype=float)
            if lev.shape != thr.shape:
                raise InputError("levels must align with thresholds")
            object.__setattr__(self, "levels", lev)

    def __len__(self) -> int:
        return int(self.thresholds.size)


@dataclass(frozen=True)
class EqdConfig:
    """Tuning of the selector: bootstrap count B, evaluation grid size m, variant."""

    n_boot: int = 100
    n_eval: int = 500
    variant: str = "eqd"
    calibration: str = "bootstrap-sample"
    use_bootstrap: bool = True
    min_excess: int = MIN_FIT_SIZE
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_boot < 1:
            raise InputError("n_boot must be >= 1")
        if self.n_eval < 2:
            raise InputError("n_eval must be >= 2")
        if self.variant not in VARIANTS:
            raise InputError(f"variant must be one of {VARIANTS}")
        if self.calibration not in CALIBRATIONS:
            raise InputError(f"calibration must be one of {CALIBRATIONS}")
        if self.min_excess < MIN_FIT_SIZE:
            raise InputError(f"min_excess must be >= {MIN_FIT_SIZE}")


@dataclass(frozen=True)
class CandidateScore:
    threshold: float
    d_e: float
    n_excess: int
    fit: GpdFit
    n_failed: int


@dataclass(frozen=True)
class SkippedCandidate:
    threshold: float
    reason: str


@dataclass(frozen=True)
class ThresholdSelection:
    """Outcome of minimising d_E over a candidate grid."""

    chosen: float
    chosen_index: int
    model: ThresholdModel
    scores: list[CandidateScore] = field(default_factory=list)
    skipped: list[SkippedCandidate] = field(default_factory=list)


@dataclass(frozen=True)
class DEDetails:
    """Per-replicate diagnostics of a d_E evaluation (NaN marks failures)."""

    d_b: np.ndarray
    n_failed: int
    observed_fit: GpdFit


def exp_margin_transform(x, p: GpdParams):
    """Map a point in the GPD support to Exponential(1) margins, -log(1 - H(x))."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.0):
        raise InputError("x must be non-negative")
    sigma, xi = p.scale, p.shape
    if abs(xi) < SHAPE_SMALL:
        out = arr / sigma
    else:
        z = xi * arr / sigma
        if np.any(z <= -1.0):
            raise InputError("x lies outside the support of the fitted model")
        out = np.log1p(z) / xi
    out = np.asarray(out, dtype=float)
    return out if out.ndim else float(out)


def _eval_probs(m: int) -> np.ndarray:
    return np.arange(1, m + 1, dtype=float) / (m + 1)


def _metric_rows(calib_sorted: np.ndarray, sigma: np.ndarray, xi: np.ndarray,
                 m: int, variant: str) -> np.ndarray:
    """d_b for each row of sorted calibration samples under per-row parameters."""
    probs = _eval_probs(m)
    log1mp = np.log1p(-probs)
    small = np.abs(xi) < SHAPE_SMALL
    if variant == "eqd":
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            model_q = sigma[:, None] * np.expm1(-xi[:, None] * log1mp[None, :]) / xi[:, None]
        if small.any():
            model_q = np.where(small[:, None], -sigma[:, None] * log1mp[None, :], model_q)
        emp_q = interp_rows(calib_sorted, probs)
    else:  # varty: compare on Exponential(1) margins
        model_q = np.broadcast_to(-log1mp, (len(sigma), m))
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            t = xi[:, None] * calib_sorted / sigma[:, None]
            transformed = np.log1p(t) / xi[:, None]
        if small.any():
            transformed = np.where(small[:, None], calib_sorted / sigma[:, None], transformed)
        emp_q = interp_rows(transformed, probs)
    return np.abs(model_q - emp_q).mean(axis=1)


def metric_d_b(boot_excesses, fitted: GpdParams, m: int, variant: str = "eqd",
               calibration_sample=None) -> float:
    """Quantile-discrepancy score of one sample against one fitted model.

    ``calibration_sample`` defaults to the bootstrap sample itself; passing
    the observed excesses instead gives the observed-sample calibration.
    """
    boot = np.asarray(boot_excesses, dtype=float)
    if boot.size < 2:
        raise InputError("need at least 2 excesses to evaluate the metric")
    if variant not in VARIANTS:
        raise InputError(f"variant must be one of {VARIANTS}")
    if fitted.shape <= -1.0:
        raise InputError("fitted shape <= -1 is outside the admissible region")
    calib = boot if calibration_sample is None else np.asarray(calibration_sample, dtype=float)
    rows = np.sort(calib)[None, :]
    val = _metric_rows(rows, np.array([fitted.scale]), np.array([fitted.shape]), m, variant)
    return float(val[0])


def _observed_fit(excesses: np.ndarray) -> GpdFit:
    y, n = pad_samples([excesses])
    res = fit_gpd_batch(y, n, lazy=False)
    return GpdFit(
        params=GpdParams(float(res.sigma[0]), float(res.xi[0])),
        neg_log_lik=float(res.nll[0]),
        n_excess=int(excesses.size),
        converged=bool(res.converged[0]),
        iterations=int(res.iterations[0]),
    )


def _d_e_excesses(excesses: np.ndarray, cfg: EqdConfig,
                  stream: np.random.SeedSequence) -> tuple[float, DEDetails]:
    """d_E for a prepared excess sample; raises NumericalError if nothing succeeds."""
    obs_fit = _observed_fit(excesses)

    if not cfg.use_bootstrap:
        if not obs_fit.converged:
            raise NumericalError("observed-sample fit did not converge")
        val = metric_d_b(excesses, obs_fit.params, cfg.n_eval, cfg.variant)
        if not np.isfinite(val):
            raise NumericalError("metric on the observed sample is not finite")
        return val, DEDetails(d_b=np.array([val]), n_failed=0, observed_fit=obs_fit)

    n_u = excesses.size
    B = cfg.n_boot
    boot = np.empty((B, n_u))
    for b in range(B):
        rng = generator(substream(stream, b))
        boot[b] = excesses[rng.integers(0, n_u, size=n_u)]
    boot.sort(axis=1)

    warm = np.tile([np.log(obs_fit.params.scale), obs_fit.params.shape], (B, 1))
    fits = fit_gpd_batch(boot, np.full(B, n_u), warm_start=warm, lazy=True)

    if cfg.calibration == "bootstrap-sample":
        calib = boot
    else:
        calib = np.broadcast_to(np.sort(excesses), (B, n_u))
    d_b = _metric_rows(calib, fits.sigma, fits.xi, cfg.n_eval, cfg.variant)

    ok = fits.converged & np.isfinite(d_b)
    d_b = np.where(ok, d_b, np.nan)
    n_failed = int(B - ok.sum())
    if n_failed == B:
        raise NumericalError("every bootstrap replicate failed to fit")
    if n_failed > 0.1 * B:
        warnings.warn(
            f"{n_failed}/{B} bootstrap replicates failed while evaluating d_E",
            RuntimeWarning,
            stacklevel=3,
        )
    return float(np.nanmean(d_b)), DEDetails(d_b=d_b, n_failed=n_failed, observed_fit=obs_fit)


def d_E(data, u: float, cfg: EqdConfig, stream: np.random.SeedSequence | None = None,
        return_details: bool = False):
    """Bootstrap-averaged quantile discrepancy of the excesses of ``u``.

    For b = 1..B the excesses are resampled with replacement, refitted, and
    scored with :func:`metric_d_b`; failed replicates are skipped and counted.
    With ``use_bootstrap`` off the observed excesses are scored once instead.
    """
    arr = np.asarray(data, dtype=float)
    excesses = arr[arr > u] - u
    if excesses.size < cfg.min_excess:
        raise InfeasibleError(
            f"only {excesses.size} exceedances of u={u}; need at least {cfg.min_excess}"
        )
    if stream is None:
        stream = root_stream(cfg.seed)
    val, details = _d_e_excesses(excesses, cfg, stream)
    return (val, details) if return_details else val


def select_threshold(data, grid: CandidateGrid, cfg: EqdConfig,
                     stream: np.random.SeedSequence | None = None) -> ThresholdSelection:
    """Minimise d_E over the candidate grid; ties break to the lowest threshold.

    Candidates with fewer than ``cfg.min_excess`` exceedances (or with no
    surviving bootstrap replicate) are skipped with a reason.  Each candidate
    consumes the substream (seed, candidate index, replicate index), so the
    outcome does not depend on evaluation order.
    """
    arr = np.asarray(data, dtype=float)
    if arr.size == 0:
        raise InputError("data is empty")
    root = stream if stream is not None else root_stream(cfg.seed)

    scores: list[CandidateScore] = []
    skipped: list[SkippedCandidate] = []
    kept_fit: dict[int, GpdFit] = {}
    kept_val: dict[int, float] = {}

    for i, u in enumerate(grid.thresholds):
        excesses = arr[arr > u] - u
        if excesses.size < cfg.min_excess:
            skipped.append(SkippedCandidate(
                float(u), f"{excesses.size} exceedances < min_excess={cfg.min_excess}"))
            continue
        try:
            val, details = _d_e_excesses(excesses, cfg, substream(root, i))
        except NumericalError as err:
            skipped.append(SkippedCandidate(float(u), str(err)))
            continue
        scores.append(CandidateScore(
            threshold=float(u), d_e=val, n_excess=int(excesses.size),
            fit=details.observed_fit, n_failed=details.n_failed,
        ))
        kept_fit[i] = details.observed_fit
        kept_val[i] = val

    if not scores:
        raise InfeasibleError("every candidate threshold was skipped")

    best_i = min(kept_val, key=lambda i: (kept_val[i], i))
    chosen = float(grid.thresholds[best_i])
    fit = kept_fit[best_i]
    n_excess = fit.n_excess
    model = ThresholdModel(
        threshold=chosen,
        exceed_prob=n_excess / arr.size,
        params=fit.params,
        n_total=int(arr.size),
        n_excess=n_excess,
    )
    return ThresholdSelection(
        chosen=chosen, chosen_index=int(best_i), model=model,
        scores=scores, skipped=skipped,
    )


_GRID_RANGE = re.compile(r"^\s*([0-9.eE+-]+)\s*\(\s*([0-9.eE+-]+)\s*\)\s*([0-9.eE+-]+)\s*$")


def parse_grid_spec(spec: str):
    """Parse a grid spec string.

    ``"A(B)C"`` means sample-quantile percents from A to C in steps of B,
    ``"a,b,c"`` an explicit percent list, and ``"@v1,v2"`` raw thresholds in
    data units.  Returns ("quantile", levels) or ("raw", values).
    """
    text = spec.strip()
    if text.startswith("@"):
        try:
            values = np.array([float(tok) for tok in text[1:].split(",") if tok.strip()])
        except ValueError as err:
            raise InputError(f"bad raw-threshold grid spec {spec!r}") from err
        if values.size == 0:
            raise InputError("raw-threshold grid spec is empty")
        return "raw", values
    m = _GRID_RANGE.match(text)
    if m:
        start, inc, end = (float(g) for g in m.groups())
        if inc <= 0.0 or end < start:
            raise InputError(f"bad grid range spec {spec!r}")
        k = int(round((end - start) / inc))
        levels = start + inc * np.arange(k + 1)
        levels = levels[levels <= end + 1e-9]
        return "quantile", levels
    try:
        levels = np.array([float(tok) for tok in text.split(",") if tok.strip()])
    except ValueError as err:
        raise InputError(f"could not parse grid spec {spec!r}") from err
    if levels.size == 0:
        raise InputError("grid spec is empty")
    return "quantile", levels


def quantile_grid(data, spec) -> CandidateGrid:
    """Candidate thresholds at sample quantiles of the data.

    ``spec`` is a spec string (see :func:`parse_grid_spec`), a
    (start, increment, end) percent triple, or an explicit sequence of
    percent levels.  Duplicate thresholds (ties in the data) are dropped,
    keeping the first occurrence.
    """
    arr = np.sort(np.asarray(data, dtype=float))
    if arr.size < 2:
        raise InputError("need at least 2 data values to build a quantile grid")

    if isinstance(spec, str):
        kind, values = parse_grid_spec(spec)
        if kind == "raw":
            return CandidateGrid(thresholds=values)
        levels = values
    elif isinstance(spec, tuple) and len(spec) == 3:
        _, levels = parse_grid_spec(f"{spec[0]}({spec[1]}){spec[2]}")
    else:
        levels = np.asarray(spec, dtype=float)

    if np.any(levels < 0.0) or np.any(levels >= 100.0):
        raise InputError("quantile levels must lie in [0, 100)")
    if np.any(np.diff(levels) <= 0.0):
        raise InputError("quantile levels must be strictly increasing")

    thresholds = np.asarray(sample_quantile(levels / 100.0, arr), dtype=float)
    keep = np.concatenate([[True], np.diff(thresholds) > 0.0])
    return CandidateGrid(thresholds=thresholds[keep], levels=levels[keep])

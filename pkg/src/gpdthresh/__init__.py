"""Automated GPD threshold selection with bootstrap uncertainty propagation.

The package covers the full peaks-over-threshold workflow: GPD primitives
(:mod:`gpdthresh.gpd`), empirical quantiles (:mod:`gpdthresh.empq`),
likelihood fitting (:mod:`gpdthresh.fit`), the quantile-discrepancy
threshold selector (:mod:`gpdthresh.eqd`), bootstrap uncertainty for return
levels (:mod:`gpdthresh.bootalg`), diagnostic data products
(:mod:`gpdthresh.diagnostics`), simulation cases with known truth
(:mod:`gpdthresh.simcases`) and the replicated study harness
(:mod:`gpdthresh.study`).
"""

from .bootalg import (
    BootstrapSummary,
    SummarySpec,
    alg1,
    alg1b,
    alg2,
    percentile_ci,
)
from .empq import SortedSample, plotting_points, resample_with_replacement, sample_quantile
from .eqd import (
    CandidateGrid,
    EqdConfig,
    ThresholdSelection,
    d_E,
    exp_margin_transform,
    metric_d_b,
    quantile_grid,
    select_threshold,
)
from .errors import GpdThreshError, InfeasibleError, InputError, NumericalError
from .fit import (
    GpdFit,
    ThresholdModel,
    fit_gpd,
    fit_threshold_model,
    neg_log_likelihood,
    unconditional_quantile,
)
from .gpd import GpdParams, gpd_cdf, gpd_log_density, gpd_quantile, gpd_sample, shift_threshold
from .simcases import CaseSpec, case_spec, compute_tau, inverse_normal_cdf, simulate_case, true_quantile

__version__ = "0.1.0"

__all__ = [
    "BootstrapSummary", "SummarySpec", "alg1", "alg1b", "alg2", "percentile_ci",
    "SortedSample", "plotting_points", "resample_with_replacement", "sample_quantile",
    "CandidateGrid", "EqdConfig", "ThresholdSelection", "d_E",
    "exp_margin_transform", "metric_d_b", "quantile_grid", "select_threshold",
    "GpdThreshError", "InfeasibleError", "InputError", "NumericalError",
    "GpdFit", "ThresholdModel", "fit_gpd", "fit_threshold_model",
    "neg_log_likelihood", "unconditional_quantile",
    "GpdParams", "gpd_cdf", "gpd_log_density", "gpd_quantile", "gpd_sample",
    "shift_threshold",
    "CaseSpec", "case_spec", "compute_tau", "inverse_normal_cdf",
    "simulate_case", "true_quantile",
    "__version__",
]

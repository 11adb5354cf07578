"""Simulation-study harness: accuracy and coverage over replicated samples.

Replicates are embarrassingly parallel over derived substreams; aggregation
uses population (divide-by-N) moments so ``rmse^2 = bias^2 + variance``
holds exactly in the reports.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bootalg import SummarySpec, _alg1_draws, _alg2_draws, percentile_ci
from .eqd import EqdConfig, quantile_grid, select_threshold
from .errors import InfeasibleError, InputError, NumericalError
from .fit import quantile_given_rate
from .parallel import pmap
from .simcases import GAUSSIAN, TRUE_THRESHOLD, CaseSpec, simulate_case, true_quantile
from .streams import generator, root_stream, substream

COVERAGE_LEVELS = (0.5, 0.8, 0.95)
ALGORITHMS = ("Alg1", "Alg1b", "Alg2")

#: Tuning presets: desk scale finishes on a workstation, full matches the
#: reference study scale.
PRESETS = {
    "desk": dict(n_reps=100, n_boot=50, B1=100, B2=100),
    "full": dict(n_reps=500, n_boot=100, B1=200, B2=200),
}


def default_grid_spec(case_spec: CaseSpec) -> str:
    """Grid binding per scenario: whole-sample grids for the threshold cases,
    upper-half grids for the Gaussian scenario."""
    if case_spec.case_id == GAUSSIAN:
        return "50(5)95" if case_spec.n_total <= 2000 else "50(0.5)95"
    return "0(5)95"


@dataclass(frozen=True)
class MetricRow:
    """One accuracy line: RMSE with its exact bias/variance split."""

    case_id: str
    variant: str
    target: str
    rmse: float
    bias: float
    variance: float
    n_replicates: int
    n_failed: int


@dataclass(frozen=True)
class CoverageRow:
    """One coverage line for an algorithm at a confidence level and p-level j."""

    case_id: str
    algorithm: str
    level: float
    j: int
    coverage: float
    width_ratio: float
    n_replicates: int
    n_failed: int


def _error_row(case_id, variant, target, errors, n_reps, n_failed) -> MetricRow:
    e = np.asarray(errors, dtype=float)
    bias = float(e.mean())
    msq = float((e * e).mean())
    return MetricRow(
        case_id=case_id, variant=variant, target=target,
        rmse=float(np.sqrt(msq)), bias=bias, variance=msq - bias * bias,
        n_replicates=int(e.size), n_failed=int(n_failed),
    )


def _select_task(args):
    spec, grid_spec, cfg, entropy, key, r = args
    rstream = substream(np.random.SeedSequence(entropy=entropy, spawn_key=key), r)
    sample = simulate_case(spec, generator(substream(rstream, 0)))
    grid = quantile_grid(sample, grid_spec)
    try:
        sel = select_threshold(sample, grid, cfg, stream=substream(rstream, 1))
    except (InfeasibleError, NumericalError):
        return r, None
    m = sel.model
    return r, (sel.chosen, m.exceed_prob, m.params.scale, m.params.shape, m.n_total)


def _run_selections(spec, n_reps, grid_spec, cfg, stream, workers):
    tasks = [
        (spec, grid_spec, cfg, stream.entropy, tuple(stream.spawn_key), r)
        for r in range(n_reps)
    ]
    results = pmap(_select_task, tasks, workers=workers)
    results.sort(key=lambda item: item[0])
    return [res for _, res in results]


def threshold_study(spec: CaseSpec, n_reps: int, grid_spec, cfg: EqdConfig,
                    stream: np.random.SeedSequence | None = None,
                    workers: int = 1) -> MetricRow:
    """Accuracy of the selected threshold against the case's true threshold."""
    if not spec.has_true_threshold:
        raise InputError(f"{spec.case_id} has no true threshold")
    root = stream if stream is not None else root_stream(cfg.seed)
    outcomes = _run_selections(spec, n_reps, grid_spec, cfg, root, workers)
    chosen = [o[0] for o in outcomes if o is not None]
    if not chosen:
        raise NumericalError("selection failed on every replicate")
    errors = np.asarray(chosen) - TRUE_THRESHOLD
    return _error_row(spec.case_id, cfg.variant, "threshold", errors,
                      n_reps, n_reps - len(chosen))


def quantile_study(spec: CaseSpec, n_reps: int, j_levels, grid_spec, cfg: EqdConfig,
                   stream: np.random.SeedSequence | None = None,
                   workers: int = 1) -> list[MetricRow]:
    """Accuracy of tail quantiles at exceedance probabilities 1/(10^j n)."""
    root = stream if stream is not None else root_stream(cfg.seed)
    outcomes = _run_selections(spec, n_reps, grid_spec, cfg, root, workers)
    ok = [o for o in outcomes if o is not None]
    if not ok:
        raise NumericalError("selection failed on every replicate")
    n_failed = n_reps - len(ok)

    rows = []
    for j in j_levels:
        p = 1.0 / (10.0 ** j * spec.n_total)
        truth = true_quantile(spec, p)
        est = np.array([
            quantile_given_rate(u, lam, sigma, xi, p) for (u, lam, sigma, xi, _) in ok
        ])
        rows.append(_error_row(spec.case_id, cfg.variant, f"quantile j={int(j)}",
                               est - truth, n_reps, n_failed))
    return rows


def _coverage_task(args):
    (spec, grid_spec, cfg, B1, B2, algorithms, levels, j_levels,
     entropy, key, r) = args
    rstream = substream(np.random.SeedSequence(entropy=entropy, spawn_key=key), r)
    sample = simulate_case(spec, generator(substream(rstream, 0)))
    grid = quantile_grid(sample, grid_spec)
    try:
        sel = select_threshold(sample, grid, cfg, stream=substream(rstream, 1))
    except (InfeasibleError, NumericalError):
        return r, None

    draws = {}
    streams = {"Alg1": 2, "Alg1b": 3, "Alg2": 4}
    for alg in algorithms:
        try:
            if alg == "Alg1":
                draws[alg] = _alg1_draws(sample, sel.chosen, B1,
                                         substream(rstream, streams[alg]),
                                         model=sel.model, min_size=cfg.min_excess)
            elif alg == "Alg1b":
                draws[alg] = _alg1_draws(sample, sel.chosen, B1,
                                         substream(rstream, streams[alg]),
                                         vary_rate=True, model=sel.model,
                                         min_size=cfg.min_excess)
            else:
                draws[alg] = _alg2_draws(sample, grid, cfg, B2, B1,
                                         substream(rstream, streams[alg]))
        except (InfeasibleError, NumericalError):
            draws[alg] = None

    cis = {}
    for alg in algorithms:
        if draws[alg] is None:
            cis[alg] = None
            continue
        block = np.empty((len(levels), len(j_levels), 2))
        for jj, j in enumerate(j_levels):
            p = 1.0 / (10.0 ** j * spec.n_total)
            summary = draws[alg].summarise(SummarySpec.quantile(p))
            for li, level in enumerate(levels):
                block[li, jj] = percentile_ci(summary, level)
        cis[alg] = block
    return r, cis


def coverage_study(spec: CaseSpec, n_reps: int, algorithms, levels, j_levels,
                   grid_spec, cfg: EqdConfig, B1: int, B2: int,
                   stream: np.random.SeedSequence | None = None,
                   workers: int = 1) -> list[CoverageRow]:
    """Coverage of true quantiles by bootstrap CIs, with widths vs Alg1.

    ``width_ratio`` is the mean, over replicates where both succeeded, of the
    algorithm's CI width divided by Alg1's width at the same (level, j).
    """
    algorithms = tuple(algorithms)
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise InputError(f"unknown algorithm {alg!r}")
    root = stream if stream is not None else root_stream(cfg.seed)
    tasks = [
        (spec, grid_spec, cfg, B1, B2, algorithms, tuple(levels), tuple(j_levels),
         root.entropy, tuple(root.spawn_key), r)
        for r in range(n_reps)
    ]
    results = pmap(_coverage_task, tasks, workers=workers)
    results.sort(key=lambda item: item[0])

    truth = {
        j: true_quantile(spec, 1.0 / (10.0 ** j * spec.n_total)) for j in j_levels
    }

    rows = []
    for alg in algorithms:
        for li, level in enumerate(levels):
            for jj, j in enumerate(j_levels):
                covered, ratios = [], []
                n_failed = 0
                for _, cis in results:
                    if cis is None or cis.get(alg) is None:
                        n_failed += 1
                        continue
                    lo, hi = cis[alg][li, jj]
                    covered.append(lo <= truth[j] <= hi)
                    if alg != "Alg1" and cis.get("Alg1") is not None:
                        lo1, hi1 = cis["Alg1"][li, jj]
                        if hi1 > lo1:
                            ratios.append((hi - lo) / (hi1 - lo1))
                if not covered:
                    raise NumericalError(f"{alg} failed on every replicate")
                rows.append(CoverageRow(
                    case_id=spec.case_id, algorithm=alg, level=float(level), j=int(j),
                    coverage=float(np.mean(covered)),
                    width_ratio=float(np.mean(ratios)) if ratios else 1.0,
                    n_replicates=len(covered), n_failed=n_failed,
                ))
    return rows

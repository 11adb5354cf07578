"""Bootstrap uncertainty quantification for tail summaries.

Three procedures produce draws of a summary statistic s(u, lambda, sigma, xi):

* ``alg1``  - parametric bootstrap at a known threshold (parameter uncertainty);
* ``alg1b`` - as alg1 with the exceedance count redrawn Binomial(n, lambda)
  per replicate (adds rate uncertainty);
* ``alg2``  - double bootstrap: nonparametric outer resamples are re-selected
  with the EQD machinery, then alg1 runs inside each (adds threshold
  uncertainty).

Percentile confidence intervals are read off the resulting draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .empq import sample_quantile
from .errors import InfeasibleError, InputError, NumericalError
from .eqd import CandidateGrid, EqdConfig, select_threshold
from .fit import MIN_FIT_SIZE, ThresholdModel, fit_threshold_model, quantile_given_rate
from .gpd import gpd_quantile
from .parallel import pmap
from .simplex import fit_gpd_batch, pad_samples
from .streams import generator, root_stream, substream

BINOMIAL_RETRY_CAP = 10


@dataclass(frozen=True)
class SummarySpec:
    """A scalar summary of the tail model evaluated per bootstrap replicate."""

    kind: str
    p: float | None = None
    T: float | None = None
    obs_per_year: float | None = None
    which: str | None = None

    @classmethod
    def quantile(cls, p: float) -> "SummarySpec":
        if not (0.0 < p < 1.0):
            raise InputError("exceedance probability p must lie in (0, 1)")
        return cls(kind="quantile", p=p)

    @classmethod
    def return_level(cls, T: float, obs_per_year: float) -> "SummarySpec":
        if T <= 0.0 or obs_per_year <= 0.0:
            raise InputError("T and obs_per_year must be positive")
        return cls(kind="return-level", T=T, obs_per_year=obs_per_year)

    @classmethod
    def parameter(cls, which: str) -> "SummarySpec":
        if which not in ("scale", "shape"):
            raise InputError("which must be 'scale' or 'shape'")
        return cls(kind="parameter", which=which)

    @classmethod
    def threshold(cls) -> "SummarySpec":
        return cls(kind="threshold")

    @classmethod
    def exceed_prob(cls) -> "SummarySpec":
        return cls(kind="exceed-prob")

    def evaluate(self, u, lam, sigma, xi) -> np.ndarray:
        """Vectorised evaluation over replicate arrays."""
        sigma = np.asarray(sigma, dtype=float)
        if self.kind == "quantile":
            return np.asarray(quantile_given_rate(u, lam, sigma, xi, self.p), dtype=float)
        if self.kind == "return-level":
            p = 1.0 / (self.T * self.obs_per_year)
            return np.asarray(quantile_given_rate(u, lam, sigma, xi, p), dtype=float)
        if self.kind == "parameter":
            return sigma.copy() if self.which == "scale" else np.asarray(xi, dtype=float).copy()
        if self.kind == "threshold":
            return np.broadcast_to(np.asarray(u, dtype=float), sigma.shape).copy()
        if self.kind == "exceed-prob":
            return np.broadcast_to(np.asarray(lam, dtype=float), sigma.shape).copy()
        raise InputError(f"unknown summary kind {self.kind!r}")


@dataclass(frozen=True)
class BootstrapSummary:
    """Bootstrapped summary values (one per successful replicate)."""

    values: np.ndarray
    n_requested: int
    n_failed: int
    algorithm: str


@dataclass(frozen=True)
class ParamDraws:
    """Raw parameter draws behind a bootstrap run; reused to evaluate many summaries."""

    u: np.ndarray
    lam: np.ndarray
    sigma: np.ndarray
    xi: np.ndarray
    n_requested: int
    n_failed: int
    algorithm: str

    def summarise(self, spec: SummarySpec) -> BootstrapSummary:
        values = spec.evaluate(self.u, self.lam, self.sigma, self.xi)
        return BootstrapSummary(
            values=values, n_requested=self.n_requested,
            n_failed=self.n_failed, algorithm=self.algorithm,
        )


def _alg1_draws(data, u, B1, stream, *, vary_rate=False,
                model: ThresholdModel | None = None,
                min_size: int = MIN_FIT_SIZE) -> ParamDraws:
    """Parametric-bootstrap parameter draws at a known threshold."""
    if B1 < 1:
        raise InputError("B1 must be >= 1")
    if model is None:
        model = fit_threshold_model(data, u, min_size=min_size)
    if not np.isfinite(model.params.scale):
        raise NumericalError("initial fit produced non-finite parameters")
    n, n_u, lam = model.n_total, model.n_excess, model.exceed_prob

    # the excess sample and the exceedance-count draw use separate substream
    # children, so alg1 and alg1b see identical excess uniforms for a seed
    sizes = np.full(B1, n_u, dtype=np.intp)
    lam_b = np.full(B1, lam)
    dead = np.zeros(B1, dtype=bool)
    samples: list[np.ndarray] = []
    for b in range(B1):
        if vary_rate:
            rate_rng = generator(substream(stream, b, 1))
            nb = 0
            for _ in range(BINOMIAL_RETRY_CAP):
                nb = int(rate_rng.binomial(n, lam))
                if nb >= min_size:
                    break
            if nb < min_size:
                dead[b] = True
                samples.append(np.empty(0))
                continue
            sizes[b] = nb
            lam_b[b] = nb / n
        rng = generator(substream(stream, b, 0))
        samples.append(np.asarray(gpd_quantile(rng.random(sizes[b]), model.params)))

    live = ~dead
    y, ns = pad_samples([samples[b] for b in np.flatnonzero(live)])
    warm = np.tile([np.log(model.params.scale), model.params.shape], (int(live.sum()), 1))
    fits = fit_gpd_batch(y, ns, warm_start=warm, lazy=True)

    keep = fits.converged
    n_failed = int(B1 - keep.sum())
    if keep.sum() == 0:
        raise NumericalError("all bootstrap refits failed")
    alg = "Alg1b" if vary_rate else "Alg1"
    return ParamDraws(
        u=np.full(int(keep.sum()), float(u)),
        lam=lam_b[live][keep],
        sigma=fits.sigma[keep],
        xi=fits.xi[keep],
        n_requested=B1,
        n_failed=n_failed,
        algorithm=alg,
    )


def alg1(data, u: float, B1: int, spec: SummarySpec,
         stream: np.random.SeedSequence | None = None, seed: int = 0) -> BootstrapSummary:
    """Parameter uncertainty at a known threshold (parametric bootstrap).

    Fits the tail model once, then refits B1 simulated excess samples of the
    same size, evaluating ``spec`` with the original threshold and rate.
    """
    stream = stream if stream is not None else root_stream(seed)
    return _alg1_draws(data, u, B1, stream, vary_rate=False).summarise(spec)


def alg1b(data, u: float, B1: int, spec: SummarySpec,
          stream: np.random.SeedSequence | None = None, seed: int = 0) -> BootstrapSummary:
    """As :func:`alg1`, but each replicate redraws its exceedance count
    Binomial(n, lambda) and uses the refreshed rate in the summary."""
    stream = stream if stream is not None else root_stream(seed)
    return _alg1_draws(data, u, B1, stream, vary_rate=True).summarise(spec)


def _resample(data: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return data[rng.integers(0, data.size, size=data.size)]


def _alg2_outer(args):
    data, grid, cfg, B1, entropy, spawn_key, j = args
    ostream = substream(np.random.SeedSequence(entropy=entropy, spawn_key=spawn_key), j)
    resample = _resample(data, generator(substream(ostream, 0)))
    try:
        sel = select_threshold(resample, grid, cfg, stream=substream(ostream, 1))
        draws = _alg1_draws(
            resample, sel.chosen, B1, substream(ostream, 2),
            model=sel.model, min_size=cfg.min_excess,
        )
    except (NumericalError, InfeasibleError):
        return j, None
    return j, draws


def _alg2_draws(data, grid: CandidateGrid, cfg: EqdConfig, B2: int, B1: int,
                stream, workers: int = 1) -> ParamDraws:
    data = np.asarray(data, dtype=float)
    tasks = [
        (data, grid, cfg, B1, stream.entropy, tuple(stream.spawn_key), j)
        for j in range(B2)
    ]
    results = pmap(_alg2_outer, tasks, workers=workers)
    results.sort(key=lambda item: item[0])

    us, lams, sigmas, xis = [], [], [], []
    n_failed = 0
    for _, draws in results:
        if draws is None:
            n_failed += B1
            continue
        us.append(draws.u)
        lams.append(draws.lam)
        sigmas.append(draws.sigma)
        xis.append(draws.xi)
        n_failed += draws.n_failed
    if not us:
        raise NumericalError("every outer bootstrap replicate failed")
    return ParamDraws(
        u=np.concatenate(us),
        lam=np.concatenate(lams),
        sigma=np.concatenate(sigmas),
        xi=np.concatenate(xis),
        n_requested=B1 * B2,
        n_failed=n_failed,
        algorithm="Alg2",
    )


def alg2(data, grid: CandidateGrid, cfg: EqdConfig, B2: int, B1: int, spec: SummarySpec,
         stream: np.random.SeedSequence | None = None, workers: int = 1) -> BootstrapSummary:
    """Threshold and parameter uncertainty by double bootstrap.

    Each of B2 outer replicates nonparametrically resamples the data,
    re-selects a threshold on the resample, and runs :func:`alg1` inside;
    the B1 x B2 summary values are concatenated in outer-replicate order.
    """
    if B2 < 1:
        raise InputError("B2 must be >= 1")
    stream = stream if stream is not None else root_stream(cfg.seed)
    return _alg2_draws(data, grid, cfg, B2, B1, stream, workers=workers).summarise(spec)


def percentile_ci(s: BootstrapSummary, level: float) -> tuple[float, float]:
    """Equal-tailed percentile interval of the bootstrapped values."""
    if not (0.0 < level < 1.0):
        raise InputError("level must lie in (0, 1)")
    values = np.asarray(s.values, dtype=float)
    if values.size == 0:
        raise InputError("no bootstrap values to summarise")
    if values.size == 1:
        v = float(values[0])
        return v, v
    alpha = (1.0 - level) / 2.0
    srt = np.sort(values)
    lo = float(sample_quantile(alpha, srt))
    hi = float(sample_quantile(1.0 - alpha, srt))
    return lo, hi

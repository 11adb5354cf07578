"""Batched derivative-free simplex minimisation of GPD negative log-likelihoods.

Fitting happens on (log sigma, xi) with xi box-constrained to (-1, 5); the
lower limit excludes the non-regular region where the likelihood is
unbounded.  The same Nelder-Mead step rules are applied to a whole batch of
independent samples at once.  Every update is gated per row and frozen at
that row's convergence, so the result for a sample is bit-identical whether
it is fitted alone or inside any batch.  Samples of unequal length are
zero-padded; padded entries contribute ``log1p(0) = 0`` to the likelihood
sum, which leaves row values exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gpd import SHAPE_SMALL

XI_MIN = -1.0
XI_MAX = 5.0
LOGSIG_LIMIT = 350.0  # |log sigma| beyond this is treated as infeasible

# Fixed jitter applied to the canonical start for the two restart passes.
RESTART_OFFSETS = ((0.4, 0.3), (-0.4, -0.25))

_CHUNK = 16  # iterations between compactions of frozen rows


def pad_samples(samples) -> tuple[np.ndarray, np.ndarray]:
    """Stack unequal-length 1-D samples into a zero-padded matrix."""
    ns = np.array([len(s) for s in samples], dtype=np.intp)
    y = np.zeros((len(samples), int(ns.max())), dtype=float)
    for i, s in enumerate(samples):
        y[i, : ns[i]] = s
    return y, ns


def _nll_rows(y, n, ysum, logsig, xi):
    """Negative log-likelihood of row i of ``y`` at parameter row i."""
    sigma = np.exp(logsig)
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        t = y * (xi / sigma)[:, None]
        np.log1p(t, out=t)
        s = t.sum(axis=1)
        val = n * logsig + (1.0 + 1.0 / xi) * s
        small = np.abs(xi) < SHAPE_SMALL
        if small.any():
            val = np.where(small, n * logsig + ysum / sigma, val)
    bad = (
        ~np.isfinite(val)
        | (xi <= XI_MIN)
        | (xi >= XI_MAX)
        | (np.abs(logsig) > LOGSIG_LIMIT)
    )
    return np.where(bad, np.inf, val)


@dataclass
class BatchFit:
    """Per-row result of a batched likelihood minimisation."""

    sigma: np.ndarray
    xi: np.ndarray
    nll: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray


def _nm_pass(y, n, ysum, x0, max_iter, ftol, xtol, step):
    """One Nelder-Mead run per row from starts ``x0`` (K, 2).

    Returns (x_best, f_best, converged, iterations), each of length K.
    """
    K = x0.shape[0]
    out_x = np.empty((K, 2))
    out_f = np.full(K, np.inf)
    out_conv = np.zeros(K, dtype=bool)
    out_iter = np.zeros(K, dtype=np.intp)

    sim = np.repeat(x0[:, None, :], 3, axis=1)
    sim[:, 1, 0] += step[0]
    sim[:, 2, 1] += step[1]
    f = np.stack(
        [_nll_rows(y, n, ysum, sim[:, v, 0], sim[:, v, 1]) for v in range(3)], axis=1
    )

    idx = np.arange(K, dtype=np.intp)  # original row of each live slot
    alive = np.ones(K, dtype=bool)     # live slots (frozen rows wait for compaction)

    for it in range(1, max_iter + 1):
        rows = np.arange(f.shape[0])[:, None]
        order = np.argsort(f, axis=1, kind="stable")
        f = f[rows, order]
        sim = sim[rows, order]

        # Convergence: relative function spread and simplex bounding box.
        fbest = f[:, 0]
        spread_ok = (f[:, 2] - f[:, 0]) <= ftol * (1.0 + np.abs(fbest))
        box = sim.max(axis=1) - sim.min(axis=1)
        xscale = 1.0 + np.abs(sim[:, 0, :]).max(axis=1)
        diam_ok = box.max(axis=1) <= xtol * xscale
        newly = spread_ok & diam_ok & np.isfinite(fbest) & alive
        if newly.any():
            rows = idx[newly]
            out_x[rows] = sim[newly, 0, :]
            out_f[rows] = fbest[newly]
            out_conv[rows] = True
            out_iter[rows] = it
            alive &= ~newly
            if not alive.any():
                return out_x, out_f, out_conv, out_iter
        if (it % _CHUNK == 0 and not alive.all()) or alive.sum() * 4 <= alive.size:
            idx, sim, f, alive_new = idx[alive], sim[alive], f[alive], alive[alive]
            y, n, ysum = y[alive], n[alive], ysum[alive]
            alive = alive_new

        centroid = 0.5 * (sim[:, 0, :] + sim[:, 1, :])
        worst = sim[:, 2, :]
        xr = 2.0 * centroid - worst
        fr = _nll_rows(y, n, ysum, xr[:, 0], xr[:, 1])

        expand = (fr < f[:, 0]) & alive
        accept_r = ~expand & (fr < f[:, 1]) & alive
        out_con = ~expand & ~accept_r & (fr < f[:, 2]) & alive
        in_con = ~expand & ~accept_r & ~out_con & alive

        x2 = xr.copy()
        x2[expand] = 3.0 * centroid[expand] - 2.0 * worst[expand]
        x2[out_con] = 1.5 * centroid[out_con] - 0.5 * worst[out_con]
        x2[in_con] = 0.5 * centroid[in_con] + 0.5 * worst[in_con]
        f2 = _nll_rows(y, n, ysum, x2[:, 0], x2[:, 1])

        new_x = np.where((expand & (f2 < fr))[:, None], x2, xr)
        new_f = np.where(expand & (f2 < fr), f2, fr)
        con_ok = (out_con & (f2 <= fr)) | (in_con & (f2 < f[:, 2]))
        new_x[con_ok] = x2[con_ok]
        new_f[con_ok] = f2[con_ok]
        replace = expand | accept_r | con_ok
        sim[replace, 2, :] = new_x[replace]
        f[replace, 2] = new_f[replace]

        shrink = ~replace & alive
        if shrink.any():
            sim[shrink, 1, :] = sim[shrink, 0, :] + 0.5 * (sim[shrink, 1, :] - sim[shrink, 0, :])
            sim[shrink, 2, :] = sim[shrink, 0, :] + 0.5 * (sim[shrink, 2, :] - sim[shrink, 0, :])
            ys, nss, yss = y[shrink], n[shrink], ysum[shrink]
            for v in (1, 2):
                f[shrink, v] = _nll_rows(ys, nss, yss, sim[shrink, v, 0], sim[shrink, v, 1])

    # max_iter reached: report the best vertex of rows still alive, unconverged.
    if alive.any():
        rows = np.arange(f.shape[0])[:, None]
        order = np.argsort(f, axis=1, kind="stable")
        f = f[rows, order]
        sim = sim[rows, order]
        keep = idx[alive]
        out_x[keep] = sim[alive, 0, :]
        out_f[keep] = f[alive, 0]
        out_iter[keep] = max_iter
    return out_x, out_f, out_conv, out_iter


def exponential_start(y: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Canonical start: the exponential fit (log mean, 0.1) per sample row."""
    mean = y.sum(axis=1) / n
    return np.column_stack([np.log(mean), np.full(len(n), 0.1)])


def fit_gpd_batch(
    y: np.ndarray,
    n: np.ndarray,
    warm_start: np.ndarray | None = None,
    *,
    lazy: bool = True,
    max_iter: int = 300,
    ftol: float = 1e-8,
    xtol: float = 1e-4,
) -> BatchFit:
    """Fit a GPD to each (zero-padded) row of ``y`` by Nelder-Mead.

    Passes run from the warm start (if given), then the exponential-fit
    start, then jittered restarts.  With ``lazy=True`` later passes only
    revisit rows whose earlier passes did not converge; otherwise every pass
    runs for every row.  The lowest likelihood among completed passes wins.
    """
    y = np.asarray(y, dtype=float)
    n = np.asarray(n, dtype=float)
    ysum = y.sum(axis=1)
    K = y.shape[0]

    canonical = exponential_start(y, n)
    starts: list[tuple[np.ndarray, tuple[float, float]]] = []
    if warm_start is not None:
        starts.append((np.asarray(warm_start, dtype=float), (0.05, 0.05)))
    starts.append((canonical, (0.2, 0.15)))
    for off in RESTART_OFFSETS[: 3 - len(starts)]:
        starts.append((canonical + np.array(off), (0.2, 0.15)))

    if not lazy and warm_start is None:
        # Run all starts at once as extra batch rows; row independence makes
        # this identical to sequential passes, minus the per-pass overhead.
        S = len(starts)
        x0 = np.stack([x for x, _ in starts], axis=1).reshape(K * S, 2)
        x, fv, conv, iters = _nm_pass(
            np.repeat(y, S, axis=0), np.repeat(n, S), np.repeat(ysum, S),
            x0, max_iter, ftol, xtol, starts[0][1],
        )
        pick = np.argmin(fv.reshape(K, S), axis=1) + S * np.arange(K)
        return BatchFit(
            sigma=np.exp(x[pick, 0]), xi=x[pick, 1], nll=fv[pick],
            converged=conv[pick], iterations=iters[pick],
        )

    best_x = np.zeros((K, 2))
    best_f = np.full(K, np.inf)
    best_conv = np.zeros(K, dtype=bool)
    best_iter = np.zeros(K, dtype=np.intp)
    pending = np.ones(K, dtype=bool)

    for x0, step in starts:
        run = pending if lazy else np.ones(K, dtype=bool)
        if not run.any():
            break
        rows = np.flatnonzero(run)
        x, fv, conv, iters = _nm_pass(
            y[rows], n[rows], ysum[rows], x0[rows], max_iter, ftol, xtol, step
        )
        take = fv < best_f[rows]
        tr = rows[take]
        best_x[tr], best_f[tr] = x[take], fv[take]
        best_conv[tr], best_iter[tr] = conv[take], iters[take]
        pending[rows[conv]] = False

    return BatchFit(
        sigma=np.exp(best_x[:, 0]),
        xi=best_x[:, 1],
        nll=best_f,
        converged=best_conv,
        iterations=best_iter,
    )

"""Command-line surface: selection, fitting, uncertainty, diagnostics,
simulation and studies with machine-readable CSV/JSON output.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 infeasible
configuration.  All commands are deterministic for a given seed and worker
cap; machine output carries full float precision (shortest round-trip
representation).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import diagnostics, study
from .bootalg import SummarySpec, _alg1_draws, _alg2_draws, percentile_ci
from .eqd import EqdConfig, quantile_grid, select_threshold
from .errors import InfeasibleError, InputError, NumericalError
from .fit import fit_threshold_model
from .simcases import CASE_IDS, case_spec, simulate_case
from .streams import generator, root_stream, substream

SEED_ENV = "GPDTHRESH_SEED"


def read_numeric_file(path: str) -> np.ndarray:
    """One numeric value per row; a single non-numeric first row is treated
    as a header; blank lines are ignored."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as err:
        raise InputError(f"cannot read {path}: {err}") from err

    values = []
    header_allowed = True
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip().strip(",")
        if not text:
            continue
        try:
            values.append(float(text))
            header_allowed = False
        except ValueError:
            if header_allowed:
                header_allowed = False
                continue
            raise InputError(f"{path}:{lineno}: not a number: {text!r}") from None
    if not values:
        raise InputError(f"{path}: no numeric data found")
    return np.asarray(values, dtype=float)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if value is None:
        return ""
    return str(value)


def _jsonable(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value]
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def write_rows(rows: list[dict], fmt: str, out_path: str | None) -> None:
    """Emit a homogeneous list of row dicts as CSV or JSON."""
    if fmt == "json":
        text = json.dumps([_jsonable(r) for r in rows], indent=2) + "\n"
    else:
        buf = io.StringIO()
        if rows:
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(rows[0].keys())
            for row in rows:
                writer.writerow([_cell(v) for v in row.values()])
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as err:
            raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from err
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None,
                   help=f"random seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap for parallel sections (results identical for any cap)")


def _config(args, min_excess: int | None = None) -> EqdConfig:
    seed = args.seed if args.seed is not None else _default_seed()
    kwargs = dict(
        n_boot=args.B, n_eval=args.m, variant=args.variant, seed=seed,
        use_bootstrap=not getattr(args, "no_bootstrap", False),
        calibration=getattr(args, "calibration", "bootstrap-sample"),
    )
    if min_excess is not None:
        kwargs["min_excess"] = min_excess
    elif getattr(args, "min_excess", None) is not None:
        kwargs["min_excess"] = args.min_excess
    return EqdConfig(**kwargs)


def _selection_rows(sel, grid) -> list[dict]:
    if grid.levels is not None:
        level = {float(t): float(l) for t, l in zip(grid.thresholds, grid.levels)}
    else:
        level = {float(t): None for t in grid.thresholds}
    rows = []
    for s in sel.scores:
        rows.append({
            "threshold": s.threshold,
            "quantile_pct": level.get(s.threshold),
            "d_e": s.d_e,
            "n_excess": s.n_excess,
            "scale": s.fit.params.scale,
            "shape": s.fit.params.shape,
            "fit_converged": s.fit.converged,
            "n_failed": s.n_failed,
            "chosen": s.threshold == sel.chosen,
            "skip_reason": None,
        })
    for s in sel.skipped:
        rows.append({
            "threshold": s.threshold, "quantile_pct": level.get(s.threshold),
            "d_e": None, "n_excess": None, "scale": None, "shape": None,
            "fit_converged": None, "n_failed": None, "chosen": False,
            "skip_reason": s.reason,
        })
    rows.sort(key=lambda r: r["threshold"])
    return rows


def cmd_select(args) -> None:
    data = read_numeric_file(args.input)
    cfg = _config(args)
    grid = quantile_grid(data, args.grid)
    sel = select_threshold(data, grid, cfg)
    if args.format == "json":
        m = sel.model
        payload = {
            "chosen": sel.chosen,
            "chosen_index": sel.chosen_index,
            "chosen_quantile_pct": (float(grid.levels[sel.chosen_index])
                                    if grid.levels is not None else None),
            "model": {
                "threshold": m.threshold, "exceed_prob": m.exceed_prob,
                "scale": m.params.scale, "shape": m.params.shape,
                "n_total": m.n_total, "n_excess": m.n_excess,
            },
            "candidates": _jsonable(_selection_rows(sel, grid)),
        }
        text = json.dumps(_jsonable(payload), indent=2) + "\n"
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    else:
        write_rows(_selection_rows(sel, grid), "csv", args.out)
    lvl = (f" ({grid.levels[sel.chosen_index]:.4g}% quantile)"
           if grid.levels is not None else "")
    print(f"chosen threshold {sel.chosen:.4g}{lvl}; "
          f"scale {sel.model.params.scale:.4g}, shape {sel.model.params.shape:.4g}",
          file=sys.stderr)


def cmd_fit(args) -> None:
    data = read_numeric_file(args.input)
    model = fit_threshold_model(data, args.threshold)
    from .fit import fit_gpd

    fit = fit_gpd(data[data > args.threshold] - args.threshold)
    rows = [{
        "threshold": model.threshold,
        "n_total": model.n_total,
        "n_excess": model.n_excess,
        "exceed_prob": model.exceed_prob,
        "scale": model.params.scale,
        "shape": model.params.shape,
        "neg_log_lik": fit.neg_log_lik,
        "converged": fit.converged,
        "iterations": fit.iterations,
    }]
    write_rows(rows, args.format, args.out)


def cmd_rl(args) -> None:
    data = read_numeric_file(args.input)
    cfg = _config(args)
    root = root_stream(cfg.seed)
    grid = quantile_grid(data, args.grid)
    algs = [a.strip() for a in args.alg.split(",") if a.strip()]
    for a in algs:
        if a not in ("1", "1b", "2"):
            raise InputError(f"--alg must combine 1, 1b, 2; got {a!r}")

    if args.threshold is not None:
        model = fit_threshold_model(data, args.threshold, min_size=cfg.min_excess)
        chosen = float(args.threshold)
    else:
        sel = select_threshold(data, grid, cfg, stream=substream(root, 0))
        model, chosen = sel.model, sel.chosen

    if args.T:
        targets = [("T", float(t)) for t in args.T]
        if args.obs_per_year is None:
            raise InputError("--obs-per-year is required with --T")
    elif args.p:
        targets = [("p", float(p)) for p in args.p]
    else:
        raise InputError("pass --T or --p")

    draws = {}
    if "1" in algs:
        draws["1"] = _alg1_draws(data, chosen, args.B1, substream(root, 1),
                                 model=model, min_size=cfg.min_excess)
    if "1b" in algs:
        draws["1b"] = _alg1_draws(data, chosen, args.B1, substream(root, 2),
                                  vary_rate=True, model=model, min_size=cfg.min_excess)
    if "2" in algs:
        draws["2"] = _alg2_draws(data, grid, cfg, args.B2, args.B1,
                                 substream(root, 3), workers=args.threads)

    from .fit import quantile_given_rate

    rows = []
    for kind, value in targets:
        if kind == "T":
            p = 1.0 / (value * args.obs_per_year)
            spec = SummarySpec.return_level(value, args.obs_per_year)
        else:
            p = value
            spec = SummarySpec.quantile(value)
        row = {
            "kind": kind, "T": value if kind == "T" else None,
            "p": p,
            "threshold": chosen,
            "point": float(quantile_given_rate(
                model.threshold, model.exceed_prob,
                model.params.scale, model.params.shape, p)),
        }
        for a in algs:
            lo, hi = percentile_ci(draws[a].summarise(spec), args.level)
            row[f"alg{a}_lo"], row[f"alg{a}_hi"] = lo, hi
        rows.append(row)
    write_rows(rows, args.format, args.out)


def cmd_simulate(args) -> None:
    spec = case_spec(args.case, gaussian_n=args.n or 2000)
    seed = args.seed if args.seed is not None else _default_seed()
    rng = generator(root_stream(seed))
    sample = simulate_case(spec, rng)
    rows = [{"value": float(v)} for v in sample]
    write_rows(rows, args.format, args.out)


def cmd_diag(args) -> None:
    data = read_numeric_file(args.input)
    cfg = _config(args)
    root = root_stream(cfg.seed)
    if args.kind == "stability":
        grid = quantile_grid(data, args.grid)
        curve = diagnostics.parameter_stability(data, grid, args.B, args.level,
                                                stream=root)
        rows = [
            {"threshold": t, "n_excess": int(n), "xi_hat": x, "ci_lo": lo, "ci_hi": hi}
            for t, n, x, lo, hi in zip(curve.thresholds, curve.n_excess,
                                       curve.xi_hat, curve.ci_lo, curve.ci_hi)
        ]
    elif args.kind == "qq":
        if args.threshold is None:
            raise InputError("--threshold is required for --kind qq")
        model = fit_threshold_model(data, args.threshold, min_size=cfg.min_excess)
        excesses = data[data > args.threshold] - args.threshold
        qq = diagnostics.qq_data(model, excesses, args.B, args.level, stream=root)
        rows = [
            {"model_q": mq, "empirical_q": eq, "tol_lo": lo, "tol_hi": hi}
            for mq, eq, lo, hi in zip(qq.model_q, qq.empirical_q, qq.tol_lo, qq.tol_hi)
        ]
    else:  # rl-curve
        if args.obs_per_year is None:
            raise InputError("--obs-per-year is required for --kind rl-curve")
        grid = quantile_grid(data, args.grid)
        curve = diagnostics.return_level_curve(
            data, grid, cfg, args.T_min, args.T_max, args.n_points,
            args.obs_per_year, args.B2, args.B1, args.level,
            stream=root, workers=args.threads)
        rows = [
            {"T": t, "point": pt, "alg1_lo": l1, "alg1_hi": h1,
             "alg2_lo": l2, "alg2_hi": h2}
            for t, pt, l1, h1, l2, h2 in zip(curve.T, curve.point, curve.alg1_lo,
                                             curve.alg1_hi, curve.alg2_lo, curve.alg2_hi)
        ]
    write_rows(rows, args.format, args.out)


def cmd_study(args) -> None:
    preset = study.PRESETS[args.preset].copy()
    if args.reps is not None:
        preset["n_reps"] = args.reps
    if args.B is not None:
        preset["n_boot"] = args.B
    if args.B1 is not None:
        preset["B1"] = args.B1
    if args.B2 is not None:
        preset["B2"] = args.B2

    spec = case_spec(args.case, gaussian_n=args.n or 2000)
    seed = args.seed if args.seed is not None else _default_seed()
    cfg = EqdConfig(n_boot=preset["n_boot"], n_eval=args.m, variant=args.variant,
                    seed=seed)
    grid_spec = args.grid or study.default_grid_spec(spec)
    stream = root_stream(seed)

    if args.kind == "threshold":
        rows_dc = [study.threshold_study(spec, preset["n_reps"], grid_spec, cfg,
                                         stream=stream, workers=args.threads)]
    elif args.kind == "quantile":
        rows_dc = study.quantile_study(spec, preset["n_reps"], args.j, grid_spec, cfg,
                                       stream=stream, workers=args.threads)
    else:  # coverage
        rows_dc = study.coverage_study(
            spec, preset["n_reps"], args.algorithms.split(","), study.COVERAGE_LEVELS,
            args.j, grid_spec, cfg, preset["B1"], preset["B2"],
            stream=stream, workers=args.threads)

    rows = [vars(r).copy() for r in rows_dc]
    write_rows(rows, args.format, args.out)
    if args.out:
        for r in rows_dc:
            if hasattr(r, "rmse"):
                print(f"{r.case_id} {r.target}: rmse={r.rmse:.4g} "
                      f"bias={r.bias:.4g} var={r.variance:.4g} "
                      f"(n={r.n_replicates}, failed={r.n_failed})")
            else:
                print(f"{r.case_id} {r.algorithm} level={r.level:g} j={r.j}: "
                      f"coverage={r.coverage:.4g} width_ratio={r.width_ratio:.4g}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpdthresh",
        description="Automated GPD threshold selection and bootstrap uncertainty",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="select a threshold by minimising d_E")
    p.add_argument("input")
    p.add_argument("--grid", default="0(5)95")
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--variant", choices=("eqd", "varty"), default="eqd")
    p.add_argument("--min-excess", type=int, default=None)
    p.add_argument("--no-bootstrap", action="store_true",
                   help="score the observed excesses once instead of bootstrapping")
    p.add_argument("--calibration", choices=("bootstrap-sample", "observed-sample"),
                   default="bootstrap-sample")
    _add_common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("fit", help="fit the tail model at a fixed threshold")
    p.add_argument("input")
    p.add_argument("--threshold", type=float, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("rl", help="return levels / quantiles with bootstrap CIs")
    p.add_argument("input")
    p.add_argument("--grid", default="0(5)95")
    p.add_argument("--threshold", type=float, default=None,
                   help="fixed threshold (skips selection for alg 1/1b)")
    p.add_argument("--T", type=float, nargs="+", default=None,
                   help="return periods in years")
    p.add_argument("--p", type=float, nargs="+", default=None,
                   help="exceedance probabilities")
    p.add_argument("--obs-per-year", type=float, default=None)
    p.add_argument("--alg", default="1,2", help="comma list from {1,1b,2}")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--B1", type=int, default=200)
    p.add_argument("--B2", type=int, default=200)
    p.add_argument("--variant", choices=("eqd", "varty"), default="eqd")
    p.add_argument("--min-excess", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_rl)

    p = sub.add_parser("simulate", help="draw a sample from a named case")
    p.add_argument("case", choices=CASE_IDS)
    p.add_argument("--n", type=int, default=None, help="gaussian sample size")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("diag", help="stability / qq / return-level curve data")
    p.add_argument("input")
    p.add_argument("--kind", choices=("stability", "qq", "rl-curve"), required=True)
    p.add_argument("--grid", default="0(5)95")
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--B", type=int, default=100)
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--B1", type=int, default=200)
    p.add_argument("--B2", type=int, default=200)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--T-min", type=float, default=1.0)
    p.add_argument("--T-max", type=float, default=1000.0)
    p.add_argument("--n-points", type=int, default=25)
    p.add_argument("--obs-per-year", type=float, default=None)
    p.add_argument("--variant", choices=("eqd", "varty"), default="eqd")
    p.add_argument("--min-excess", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_diag)

    p = sub.add_parser("study", help="replicated accuracy / coverage studies")
    p.add_argument("case", choices=CASE_IDS)
    p.add_argument("--kind", choices=("threshold", "quantile", "coverage"),
                   required=True)
    p.add_argument("--preset", choices=tuple(study.PRESETS), default="desk")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--B", type=int, default=None)
    p.add_argument("--B1", type=int, default=None)
    p.add_argument("--B2", type=int, default=None)
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--n", type=int, default=None, help="gaussian sample size")
    p.add_argument("--grid", default=None)
    p.add_argument("--j", type=int, nargs="+", default=[0, 1, 2])
    p.add_argument("--algorithms", default="Alg1,Alg1b,Alg2")
    p.add_argument("--variant", choices=("eqd", "varty"), default="eqd")
    _add_common(p)
    p.set_defaults(func=cmd_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except InfeasibleError as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())

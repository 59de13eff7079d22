"""Command-line front door: fit, cvfit, predict, synth, and bench.

Exit codes: 0 success, 2 usage errors, 3 data errors, 4 internal failures.
Console tables and CSV files share one number-formatting path, so the two
views always carry identical digits.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
import traceback

import numpy as np

from . import artifact
from .bench import run_bench
from .cdsolver import FitOptions
from .data import (DataError, DataMatrix, SyntheticSpec, generate_synthetic,
                   load_csv, load_matrix_market, load_response,
                   write_matrix_market)
from .modelselect import cross_validate, predict
from .path import fit_path


class UsageError(ValueError):
    pass


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        # shortest exact decimal: CSV consumers read back the same double
        return repr(float(x))
    return str(x)


def _write_table(rows: list[dict], out_path: str | None, echo: bool = True) -> None:
    if not rows:
        return
    cols = list(rows[0].keys())
    lines = [",".join(cols)]
    lines += [",".join(_fmt(r[c]) for c in cols) for r in rows]
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    if echo:
        print("\n".join(lines))


def _load_design(args) -> tuple[DataMatrix, np.ndarray]:
    if (args.y is None) == (args.y_col is None):
        raise UsageError("provide exactly one of --y or --y-col")
    if args.x.endswith(".mtx"):
        if args.y_col is not None:
            raise UsageError("--y-col applies to CSV input; use --y with --x *.mtx")
        X = load_matrix_market(args.x)
        y = load_response(args.y)
    elif args.y_col is not None:
        X, y = load_csv(args.x, has_header=args.header,
                        response_column=args.y_col)
    else:
        X, _ = load_csv(args.x, has_header=args.header)
        y = load_response(args.y)
    if y.shape[0] != X.n:
        raise DataError(f"response has {y.shape[0]} rows, matrix has {X.n}")
    return X, y


def _gamma_grid(args) -> list[float] | np.ndarray:
    explicit = (args.gamma_min is not None or args.gamma_max is not None
                or args.n_gamma is not None)
    if args.penalty == "L0":
        if explicit:
            raise UsageError("gamma flags are forbidden for --penalty L0")
        return [0.0]
    lo = 1e-2 if args.gamma_min is None else args.gamma_min
    hi = 1e2 if args.gamma_max is None else args.gamma_max
    ng = 10 if args.n_gamma is None else args.n_gamma
    if lo <= 0 or hi < lo or ng < 1:
        raise UsageError("need 0 < --gamma-min <= --gamma-max and --n-gamma >= 1")
    return np.geomspace(hi, lo, ng)


def _options(args) -> FitOptions:
    return FitOptions(
        tol=args.tol,
        max_support=args.max_support,
        screening_size=args.screen_size,
        local_search=not args.no_local_search,
        n_lambda=args.n_lambda,
        threads=args.threads,
    )


def _fit_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--x", required=True, help="feature file (.csv or .mtx)")
    sub.add_argument("--y", help="response file (single column)")
    sub.add_argument("--y-col", type=int, help="response column inside --x (CSV only)")
    sub.add_argument("--header", action="store_true", help="CSV has a header row")
    sub.add_argument("--loss", default="squared",
                     choices=["squared", "logistic", "squared-hinge"])
    sub.add_argument("--penalty", default="L0", choices=["L0", "L0L1", "L0L2"])
    sub.add_argument("--gamma-min", type=float, default=None)
    sub.add_argument("--gamma-max", type=float, default=None)
    sub.add_argument("--n-gamma", type=int, default=None)
    sub.add_argument("--n-lambda", type=int, default=100)
    sub.add_argument("--max-support", type=int, default=None)
    sub.add_argument("--no-local-search", action="store_true")
    sub.add_argument("--screen-size", type=int, default=None)
    sub.add_argument("--tol", type=float, default=1e-6)
    sub.add_argument("--threads", type=int, default=None,
                     help="gamma-chain workers (default: machine parallelism)")
    sub.add_argument("--out", required=True, help="output JSON artifact")
    sub.add_argument("--timing", action="store_true",
                     help="embed wall-clock timing in the artifact (makes "
                          "otherwise-identical runs differ)")


def _loss_name(cli_loss: str) -> str:
    return cli_loss.replace("-", "_")


def _print_path_summary(path) -> None:
    rows = []
    for g, m in path.iter_models():
        rows.append({"gamma": g, "lambda": m.lam,
                     "support_size": m.support_size, "objective": m.objective})
    _write_table(rows, None)


def cmd_fit(args) -> int:
    X, y = _load_design(args)
    opts = _options(args)
    gammas = _gamma_grid(args)
    t0 = time.perf_counter()
    path = fit_path(X, y, _loss_name(args.loss), args.penalty, gammas, opts)
    timing = None
    if args.timing:
        timing = {"total_seconds": time.perf_counter() - t0,
                  "per_gamma_seconds": [ci.seconds for ci in path.chain_info]}
    doc = artifact.path_to_dict(path, seeds={}, timing=timing)
    artifact.save(doc, args.out)
    _print_path_summary(path)
    print(f"wrote {args.out} ({path.n_models()} models)")
    return 0


def cmd_cvfit(args) -> int:
    if args.folds < 2:
        raise UsageError("--folds must be at least 2")
    X, y = _load_design(args)
    opts = _options(args)
    gammas = _gamma_grid(args)
    cv = cross_validate(X, y, _loss_name(args.loss), args.penalty, gammas,
                        n_folds=args.folds, seed=args.cv_seed, opts=opts)
    cv_rows = []
    for g in range(cv.gammas.size):
        for t in range(cv.lambda_grids[g].size):
            cv_rows.append({"gamma": float(cv.gammas[g]),
                            "lambda": float(cv.lambda_grids[g][t]),
                            "mean_loss": float(cv.mean_loss[g][t]),
                            "se_loss": float(cv.se_loss[g][t])})
    cv_block = {"n_folds": cv.n_folds, "seed": cv.seed,
                "best_gamma": cv.best_gamma, "best_lambda": cv.best_lambda,
                "table": cv_rows}
    doc = artifact.path_to_dict(cv.full_path, seeds={"cv_seed": cv.seed},
                                cv=cv_block)
    artifact.save(doc, args.out)
    csv_path = args.cv_csv or (os.path.splitext(args.out)[0] + ".cv.csv")
    _write_table(cv_rows, csv_path, echo=False)
    print(f"selected gamma={_fmt(cv.best_gamma)} lambda={_fmt(cv.best_lambda)} "
          f"(support {cv.best_model.support_size})")
    print(f"wrote {args.out} and {csv_path}")
    return 0


def _parse_select(sel: str) -> dict:
    if sel == "best":
        return {"best": True}
    out = {}
    for part in sel.split(","):
        if "=" not in part:
            raise UsageError(f"bad --select component {part!r}; "
                             "use 'best' or 'gamma=G,lambda=L'")
        k, v = part.split("=", 1)
        k = k.strip()
        if k not in ("gamma", "lambda"):
            raise UsageError(f"unknown --select key {k!r}")
        try:
            out[k] = float(v)
        except ValueError:
            raise UsageError(f"cannot parse --select value {v!r}") from None
    if "lambda" not in out:
        raise UsageError("--select needs lambda=... (or 'best')")
    return out


def _find_model(doc: dict, sel: dict):
    paths = doc["paths"]
    if sel.get("best"):
        cv = doc.get("cv")
        if not cv:
            raise UsageError("--select best needs a cvfit artifact")
        sel = {"gamma": cv["best_gamma"], "lambda": cv["best_lambda"]}
    blocks = paths
    if "gamma" in sel:
        blocks = [b for b in paths if _close(b["gamma"], sel["gamma"])]
        if not blocks:
            avail = ", ".join(_fmt(b["gamma"]) for b in paths)
            raise UsageError(f"gamma={_fmt(sel['gamma'])} not in artifact; "
                             f"available: {avail}")
    elif len(paths) > 1:
        raise UsageError("artifact has several gamma values; add gamma=... "
                         "to --select")
    for b in blocks:
        for m in b["models"]:
            if _close(m["lambda"], sel["lambda"]):
                return b["gamma"], m
    avail = ", ".join(_fmt(m["lambda"]) for b in blocks for m in b["models"])
    raise UsageError(f"lambda={_fmt(sel['lambda'])} not in artifact; "
                     f"available: {avail}")


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))


def cmd_predict(args) -> int:
    doc = artifact.load(args.model)
    gamma, mdict = _find_model(doc, _parse_select(args.select))
    from .cdsolver import Model
    model = Model(float(mdict["beta0"]),
                  np.asarray(mdict["indices"], dtype=np.int64),
                  np.asarray(mdict["values"]), float(mdict["lambda"]),
                  float(gamma), float(mdict["objective"]))
    if args.x.endswith(".mtx"):
        X = load_matrix_market(args.x)
    else:
        X, _ = load_csv(args.x, has_header=args.header)
    loss = doc.get("loss", "squared")
    pred = predict(model, X, loss)
    rows = []
    for s in range(X.n):
        row = {"prediction": float(pred.eta[s])}
        if pred.labels is not None:
            row["label"] = int(pred.labels[s])
        if pred.proba is not None:
            row["probability"] = float(pred.proba[s])
        rows.append(row)
    _write_table(rows, args.out, echo=False)
    print(f"wrote {args.out} ({X.n} predictions; gamma={_fmt(gamma)} "
          f"lambda={_fmt(mdict['lambda'])})")
    return 0


def cmd_synth(args) -> int:
    try:
        spec = SyntheticSpec(args.n, args.p, args.k, args.rho, args.snr,
                             args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    X, y, beta_star, sigma = generate_synthetic(spec, task=args.task)
    prefix = args.out_prefix
    if args.sparse:
        x_file = prefix + "_X.mtx"
        write_matrix_market(x_file, X.to_sparse())
    else:
        x_file = prefix + "_X.csv"
        with open(x_file, "w", encoding="utf-8") as fh:
            for s in range(X.n):
                fh.write(",".join(repr(float(v)) for v in X.dense[s]) + "\n")
    y_file = prefix + "_y.csv"
    with open(y_file, "w", encoding="utf-8") as fh:
        for v in y:
            fh.write(repr(float(v)) + "\n")
    beta_file = prefix + "_beta.csv"
    idx = np.flatnonzero(beta_star)
    with open(beta_file, "w", encoding="utf-8") as fh:
        fh.write("index,value\n")
        for i in idx:
            fh.write(f"{int(i)},{float(beta_star[i])!r}\n")
    manifest = {
        "n": spec.n, "p": spec.p, "k": spec.k, "rho": spec.rho,
        "snr": spec.snr, "seed": spec.seed, "task": args.task,
        "sigma": sigma,
        "beta_star_rule": "k unit entries at indices floor(t*p/k)",
        "correlation": "S_ij = rho^|i-j| via AR(1) recurrence",
        "snr_definition": "Var(X beta*) / sigma^2 with population variance",
        "columns_standardized": False,
        "files": {"x": x_file, "y": y_file, "beta_star": beta_file},
    }
    man_file = prefix + "_manifest.json"
    with open(man_file, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")
    print(f"wrote {x_file}, {y_file}, {beta_file}, {man_file} (sigma={sigma!r})")
    return 0


def cmd_bench(args) -> int:
    def progress(row):
        print("rep " + " ".join(f"{k}={_fmt(v)}" for k, v in row.items()),
              file=sys.stderr)

    res = run_bench(p=args.p, n=args.n, k=args.k, rho=args.rho, snr=args.snr,
                    reps=args.reps, n_gamma=args.n_gamma,
                    n_lambda=args.n_lambda, seed=args.seed, kind=args.penalty,
                    standardize=not args.no_standardize,
                    local_search=args.local_search,
                    max_support=args.max_support, threads=args.threads,
                    mem_budget_gb=args.mem_budget_gb,
                    progress=progress if args.verbose else None)
    rep_rows = [{k: r[k] for k in ("rep", "path_seconds", "tune_seconds",
                                   "pe_x100", "fp", "ss", "best_gamma",
                                   "best_lambda")} for r in res.rep_rows]
    summary_rows = [{"metric": k, "mean": v["mean"], "se": v["se"]}
                    for k, v in res.summary.items()]
    _write_table(rep_rows, args.out)
    summary_path = os.path.splitext(args.out)[0] + ".summary.csv" if args.out else None
    _write_table(summary_rows, summary_path)
    if args.out:
        man_path = os.path.splitext(args.out)[0] + ".manifest.json"
        with open(man_path, "w", encoding="utf-8") as fh:
            json.dump(res.config, fh, indent=1)
            fh.write("\n")
    s = res.summary
    print(f"p={args.p}: path {_fmt(s['path_seconds']['mean'])}s "
          f"({_fmt(s['path_seconds']['se'])}) | tune "
          f"{_fmt(s['tune_seconds']['mean'])}s ({_fmt(s['tune_seconds']['se'])}) | "
          f"PEx100 {_fmt(s['pe_x100']['mean'])} ({_fmt(s['pe_x100']['se'])}) | "
          f"FP {_fmt(s['fp']['mean'])} ({_fmt(s['fp']['se'])}) | "
          f"SS {_fmt(s['ss']['mean'])} ({_fmt(s['ss']['se'])})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="l0path",
        description="L0-regularized sparse regression and classification")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit a regularization path")
    _fit_common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_cv = sub.add_parser("cvfit", help="cross-validated path fit")
    _fit_common(p_cv)
    p_cv.add_argument("--folds", type=int, default=5)
    p_cv.add_argument("--cv-seed", type=int, default=0)
    p_cv.add_argument("--cv-csv", default=None,
                      help="plot-ready CV curve CSV (default: <out>.cv.csv)")
    p_cv.set_defaults(func=cmd_cvfit)

    p_pred = sub.add_parser("predict", help="predict from a stored artifact")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--select", required=True,
                        help="'best' or 'gamma=G,lambda=L' (gamma optional "
                             "for single-gamma artifacts)")
    p_pred.add_argument("--x", required=True)
    p_pred.add_argument("--header", action="store_true")
    p_pred.add_argument("--out", required=True)
    p_pred.set_defaults(func=cmd_predict)

    p_syn = sub.add_parser("synth", help="generate a synthetic dataset")
    p_syn.add_argument("--n", type=int, required=True)
    p_syn.add_argument("--p", type=int, required=True)
    p_syn.add_argument("--k", type=int, required=True)
    p_syn.add_argument("--rho", type=float, default=0.3)
    p_syn.add_argument("--snr", type=float, default=5.0)
    p_syn.add_argument("--seed", type=int, default=0)
    p_syn.add_argument("--task", default="regression",
                       choices=["regression", "classification"])
    p_syn.add_argument("--sparse", action="store_true",
                       help="write X in MatrixMarket format")
    p_syn.add_argument("--out-prefix", required=True)
    p_syn.set_defaults(func=cmd_synth)

    p_b = sub.add_parser("bench", help="run the synthetic benchmark")
    p_b.add_argument("--p", type=int, required=True)
    p_b.add_argument("--n", type=int, default=1000)
    p_b.add_argument("--k", type=int, default=50)
    p_b.add_argument("--rho", type=float, default=0.3)
    p_b.add_argument("--snr", type=float, default=5.0)
    p_b.add_argument("--reps", type=int, default=10)
    p_b.add_argument("--n-gamma", type=int, default=100)
    p_b.add_argument("--n-lambda", type=int, default=100)
    p_b.add_argument("--penalty", default="L0L2", choices=["L0", "L0L1", "L0L2"])
    p_b.add_argument("--seed", type=int, default=7)
    p_b.add_argument("--threads", type=int, default=None)
    p_b.add_argument("--local-search", action="store_true",
                     help="enable swap search (benchmark default is CD only)")
    p_b.add_argument("--max-support", type=int, default=None,
                     help="path growth cap per chain (default: max(100, 2k))")
    p_b.add_argument("--no-standardize", action="store_true",
                     help="fit on raw columns instead of unit-norm columns")
    p_b.add_argument("--mem-budget-gb", type=float, default=16.0)
    p_b.add_argument("--verbose", action="store_true")
    p_b.add_argument("--out", default=None, help="per-rep CSV path")
    p_b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 3
    except Exception:
        traceback.print_exc()
        return 4


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: fit, predict, cv, simulate, sparsify, theory.

All commands write into a user-chosen output directory, emit a
``manifest.json`` recording the command, flags, seed, input digests,
version and duration, and use JSON for models/reports and CSV for
tables.  Exit codes: 0 success, 2 model/statistical failure, 64 usage
error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .exceptions import DataError, EstimatorNotExistError, NetcohError
from .glm import SurvivalData, fit_cox, fit_logistic, logistic_predict_prob
from .graph import (cohesion_penalty, laplacian, read_edge_list,
                    split_for_prediction, write_edge_list)
from .linear import fit_linear, fitted_values
from .selection import kfold_cv, predict_new_nodes
from .simulate import SimConfig, run_experiment, sparsification_experiment
from .sparsify import spectral_sparsify
from .theory import theory_report

FAMILIES = ("linear", "logistic", "cox")
EXIT_OK = 0
EXIT_MODEL = 2
EXIT_USAGE = 64


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit with code 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _threads(args) -> int:
    env = os.environ.get("NETCOH_THREADS")
    if env is not None:
        return max(1, int(env))
    if getattr(args, "threads", None):
        return max(1, args.threads)
    return os.cpu_count() or 1


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, default=_jsonable, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _manifest(args, out_dir: Path, input_paths, started: float) -> None:
    flags = {k: _jsonable(v) for k, v in vars(args).items()
             if k != "func" and not isinstance(v, type(lambda: 0))}
    payload = {
        "command": args.command,
        "flags": flags,
        "seed": getattr(args, "seed", None),
        "inputs": {str(p): _sha256(p) for p in input_paths},
        "version": __version__,
        "duration_seconds": round(time.time() - started, 6),
    }
    _write_json(out_dir / "manifest.json", payload)


def _read_table(path):
    """CSV with header -> (column names, float matrix)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    try:
        data = np.array([[float(x) for x in row] for row in rows])
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric value ({exc})") from None
    if rows and data.shape[1] != len(header):
        raise DataError(f"{path}: ragged rows")
    return [h.strip() for h in header], data


def _load_data(path, family: str, response: str):
    """Split a data CSV into covariates and the response (or survival)."""
    header, data = _read_table(path)

    def col(name):
        if name not in header:
            raise DataError(f"{path}: missing column {name!r}")
        return data[:, header.index(name)]

    if family == "cox":
        taken = {"time", "event"}
        Y = SurvivalData(time=col("time"), delta=col("event"))
    else:
        taken = {response}
        Y = col(response)
    keep = [i for i, h in enumerate(header) if h not in taken]
    names = [header[i] for i in keep]
    return names, data[:, keep], Y


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fit_any(family, X, Y, g, lam, gamma, threads=1):
    if family == "linear":
        return fit_linear(X, Y, g, lam=lam, gamma=gamma or 0.0)
    if family == "logistic":
        return fit_logistic(X, Y, g, lam=lam,
                            gamma=0.01 if gamma is None else gamma)
    return fit_cox(X, Y, g, lam=lam, gamma=0.1 if gamma is None else gamma)


def _model_payload(fit, feature_names, g, family):
    L = laplacian(g, 0.0)
    report = getattr(fit, "report", None)
    if report is not None:
        solver = {"iterations": report.iterations,
                  "final_residual": report.final_residual,
                  "converged": report.converged}
    else:
        solver = {"iterations": fit.iterations,
                  "converged": fit.converged,
                  "objective": fit.objective}
    return {
        "family": family,
        "n": int(fit.alpha_hat.size),
        "p": int(fit.beta_hat.size),
        "lambda": fit.lam,
        "gamma": fit.gamma,
        "feature_names": feature_names,
        "alpha_hat": fit.alpha_hat,
        "beta_hat": fit.beta_hat,
        "x_mean": fit.x_mean,
        "x_scale": fit.x_scale,
        "cohesion_penalty": cohesion_penalty(L, fit.alpha_hat),
        "solver": solver,
    }


def cmd_fit(args) -> int:
    started = time.time()
    out = _out_dir(args)
    names, X, Y = _load_data(args.data, args.family, args.response)
    g = read_edge_list(args.edges, n=X.shape[0])
    fit = _fit_any(args.family, X, Y, g, args.lam, args.gamma)
    _write_json(out / "model.json",
                _model_payload(fit, names, g, args.family))
    if args.family == "linear":
        fitted = fitted_values(fit, X)
    elif args.family == "logistic":
        fitted = logistic_predict_prob(fit, X, fit.alpha_hat)
    else:
        Z = (X - fit.x_mean) / fit.x_scale
        fitted = np.exp(np.clip(fit.alpha_hat + Z @ fit.beta_hat, -30, 30))
    _write_csv(out / "fitted.csv", ["node", "fitted"],
               [(i, repr(float(v))) for i, v in enumerate(fitted)])
    _manifest(args, out, [args.edges, args.data], started)
    return EXIT_OK


def cmd_predict(args) -> int:
    started = time.time()
    out = _out_dir(args)
    with open(args.model) as fh:
        model = json.load(fh)
    n_train = model["n"]
    header, data = _read_table(args.data)
    if "id" not in header:
        raise DataError(f"{args.data}: missing column 'id'")
    ids = data[:, header.index("id")].astype(int)
    feats = [header.index(name) for name in model["feature_names"]]
    X_new = data[:, feats]
    if np.any(ids < n_train):
        raise DataError("new-node ids collide with training ids "
                        f"(ids below {n_train})")
    g_all = read_edge_list(args.edges)
    order = np.argsort(ids)
    blocks = split_for_prediction(g_all, ids)
    alpha_sorted = predict_new_nodes(np.asarray(model["alpha_hat"]),
                                     blocks[:2], gamma_pred=args.gamma_pred)
    alpha_new = np.empty_like(alpha_sorted)
    alpha_new[order] = alpha_sorted
    Z = (X_new - np.asarray(model["x_mean"])) / np.asarray(model["x_scale"])
    eta = alpha_new + Z @ np.asarray(model["beta_hat"])
    if model["family"] == "linear":
        pred = eta
    elif model["family"] == "logistic":
        pred = 1.0 / (1.0 + np.exp(-np.clip(eta, -30, 30)))
    else:
        pred = np.exp(np.clip(eta, -30, 30))
    _write_csv(out / "predictions.csv", ["id", "alpha", "prediction"],
               [(int(i), repr(float(a)), repr(float(p)))
                for i, a, p in zip(ids, alpha_new, pred)])
    _manifest(args, out, [args.model, args.edges, args.data], started)
    return EXIT_OK


def cmd_cv(args) -> int:
    started = time.time()
    out = _out_dir(args)
    names, X, Y = _load_data(args.data, args.family, args.response)
    g = read_edge_list(args.edges, n=X.shape[0])
    grid = None
    if args.grid:
        grid = [float(x) for x in args.grid.split(",")]
    report = kfold_cv(X, Y, g, lambda_grid=grid, k=args.k,
                      family=args.family, seed=args.seed, gamma=args.gamma,
                      n_jobs=_threads(args))
    _write_json(out / "cv.json", report.to_dict())
    _manifest(args, out, [args.edges, args.data], started)
    return EXIT_OK


def cmd_simulate(args) -> int:
    started = time.time()
    out = _out_dir(args)
    cfg = SimConfig(n=args.n, lam=0.1, seed=args.seed,
                    replications=args.reps, sigma=args.sigma)
    if args.figure in (2, 3):
        family = "linear" if args.figure == 2 else "logistic"
        rows = run_experiment(cfg, s_grid=(args.scale,), family=family,
                              cv_folds=args.k, n_jobs=_threads(args))
        header = ["s", "rep", "method", "family", "lambda",
                  "imp_alpha", "imp_beta", "imp_pred", "error"]
    else:
        rows = sparsification_experiment(
            cfg, epsilon_grid=tuple(float(x) for x in args.epsilon.split(",")),
            seed=args.seed, oversampling=args.oversampling)
        header = list(rows[0].keys())
    _write_csv(out / "results.csv", header,
               [[row[h] for h in header] for row in rows])
    _manifest(args, out, [], started)
    return EXIT_OK


def cmd_sparsify(args) -> int:
    started = time.time()
    out = _out_dir(args)
    g = read_edge_list(args.edges)
    res = spectral_sparsify(g, args.epsilon, seed=args.seed,
                            oversampling=args.oversampling, verify=True)
    write_edge_list(res.graph_star, out / "sparsified_edges.txt")
    _write_json(out / "certificate.json", {
        "epsilon_target": res.epsilon_target,
        "measured_epsilon": res.measured_epsilon,
        "verified": res.verified,
        "edges_input": g.n_edges,
        "edges_kept": res.edges_kept,
        "zero_fraction": 1.0 - res.edges_kept / max(g.n_edges, 1),
    })
    _manifest(args, out, [args.edges], started)
    return EXIT_OK


def cmd_theory(args) -> int:
    started = time.time()
    out = _out_dir(args)
    header, data = _read_table(args.data)
    if args.alpha_col not in header:
        raise DataError(f"{args.data}: missing column {args.alpha_col!r}")
    alpha = data[:, header.index(args.alpha_col)]
    X = data[:, [i for i, h in enumerate(header) if h != args.alpha_col]]
    g = read_edge_list(args.edges, n=X.shape[0])
    report = theory_report(X, laplacian(g, 0.0), args.lam, alpha,
                           sigma2=args.sigma ** 2 if args.sigma else None)
    _write_json(out / "theory.json", report.to_dict())
    _manifest(args, out, [args.edges, args.data], started)
    return EXIT_OK


def _add_common(p, seed=True):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (env NETCOH_THREADS overrides)")
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> _Parser:
    parser = _Parser(prog="netcoh",
                     description="network-cohesion penalized regression")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a model")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--response", default="y")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict for new nodes")
    p.add_argument("--model", required=True)
    p.add_argument("--edges", required=True,
                   help="edge list over training plus new nodes")
    p.add_argument("--data", required=True,
                   help="CSV with 'id' column plus model covariates")
    p.add_argument("--gamma-pred", type=float, default=0.0)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("cv", help="cross-validate lambda")
    p.add_argument("--family", choices=FAMILIES, required=True)
    p.add_argument("--edges", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--grid", default=None, help="comma-separated lambdas")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--response", default="y")
    _add_common(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("simulate", help="run a benchmark experiment")
    p.add_argument("--figure", type=int, choices=(2, 3, 4), required=True,
                   help="2: linear, 3: logistic, 4: sparsification")
    p.add_argument("--scale", type=float, default=0.1,
                   help="individual-effect spread s (figures 2/3)")
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--k", type=int, default=5, help="CV folds")
    p.add_argument("--epsilon", default="0.05,0.1,0.2,0.3",
                   help="epsilon grid (figure 4)")
    p.add_argument("--oversampling", type=float, default=0.75)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sparsify", help="spectrally sparsify a graph")
    p.add_argument("--edges", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--oversampling", type=float, default=9.0)
    _add_common(p)
    p.set_defaults(func=cmd_sparsify)

    p = sub.add_parser("theory", help="finite-sample theory report")
    p.add_argument("--edges", required=True)
    p.add_argument("--data", required=True,
                   help="CSV with covariates plus the true-effects column")
    p.add_argument("--alpha-col", default="alpha")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--sigma", type=float, default=None)
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_theory)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EstimatorNotExistError:
        print("estimator does not exist; set --gamma > 0", file=sys.stderr)
        return EXIT_MODEL
    except NetcohError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())

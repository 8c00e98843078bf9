"""Command line front end.

Subcommands: fit, simulate, mc, test, calibrate, diagnose, render.
Result documents are deterministic JSON (see reports); anything that
varies between runs of the same inputs -- wall time, worker count --
goes to stderr only.

Exit codes: 0 success, 2 usage error, 3 input or data error, 4 numeric
failure, 5 optimizer did not converge (the report is still written).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from types import SimpleNamespace

import numpy as np
import yaml

from . import distributions, kernel
from .dataio import read_series, write_series
from .diagnostics import hill_sweep, residual_diagnostics
from .errors import DataFormatError, ExcessiveFailures, LqmleError
from .estimation import FitOptions, evaluate, fit, fit_constrained
from .inference import deviance, lm_test, t_test, wald_test
from .models import MODEL_REGISTRY, make_model, simulate
from .montecarlo import Scenario, run_scenario
from .reports import dump_json, make_manifest, render_document, sha256_file

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_NOCONV = 5

_CRITERION = {"lqmle": "logistic", "gqmle": "gaussian"}


class _UsageError(Exception):
    pass


# -- shared argument groups ----------------------------------------------


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="delimited text file with the series")
    p.add_argument("--column", default=None, help="column index or header name")
    p.add_argument("--delim", default=",", help="field delimiter (default comma)")
    p.add_argument("--header", action="store_true", help="first row holds column names")
    p.add_argument("--diff", action="store_true", help="first-difference the series")


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, choices=sorted(MODEL_REGISTRY))
    p.add_argument(
        "--order",
        default=None,
        help="model order: P,Q for dar and garch, P for expar (arma_garch is fixed at 1,1)",
    )
    p.add_argument(
        "--no-intercept",
        action="store_true",
        help="drop the mean intercept (arma_garch only)",
    )


def _add_fit_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--criterion", default="lqmle", choices=sorted(_CRITERION))
    p.add_argument("--start", default=None, help="comma-separated starting values")
    p.add_argument("--no-multistart", action="store_true")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--seed", type=int, default=None)


def _parse_order(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError:
        raise _UsageError(f"--order must be comma-separated integers, got {text!r}") from None


def _build_model(args):
    kwargs = {}
    order = _parse_order(args.order) if args.order is not None else None
    if args.model in ("dar", "garch"):
        if order is not None:
            if len(order) != 2:
                raise _UsageError(f"{args.model} takes --order P,Q")
            kwargs["p"], kwargs["q"] = order
    elif args.model == "expar":
        if order is not None:
            if len(order) != 1:
                raise _UsageError("expar takes a single --order P")
            kwargs["p"] = order[0]
    elif args.model == "arma_garch":
        if order is not None and order != (1, 1):
            raise _UsageError("arma_garch supports only --order 1,1")
        kwargs["include_intercept"] = not args.no_intercept
    try:
        return make_model(args.model, **kwargs)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _model_block(model) -> dict:
    return {"name": model.name, "param_names": list(model.param_names)}


def _model_options(args) -> dict:
    return {
        "model": args.model,
        "order": args.order,
        "no_intercept": args.no_intercept,
    }


def _data_options(args) -> dict:
    return {
        "column": args.column,
        "delim": args.delim,
        "header": args.header,
        "diff": args.diff,
    }


def _read_data(args) -> np.ndarray:
    column = args.column
    if column is not None:
        try:
            column = int(column)
        except ValueError:
            pass
    return read_series(
        args.data, column=column, delimiter=args.delim, header=args.header, diff=args.diff
    )


def _parse_floats(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(","))
    except ValueError:
        raise _UsageError(f"{what} must be comma-separated numbers, got {text!r}") from None


def _resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    fresh = int(np.random.SeedSequence().entropy % (2**63))
    print(f"seed: {fresh}", file=sys.stderr)
    return fresh


def _fit_options(args, seed: int) -> FitOptions:
    start = None
    if args.start is not None:
        start = _parse_floats(args.start, "--start")
    return FitOptions(
        criterion=_CRITERION[args.criterion],
        max_iter=args.max_iter,
        multistart=not args.no_multistart,
        seed=seed,
        start=start,
    )


def _finite_or_none(value) -> float | None:
    if value is None:
        return None
    value = float(value)
    return value if np.isfinite(value) else None


def _build_dist(args):
    fam = args.dist
    try:
        if fam == "logistic":
            return distributions.InnovationDist("logistic", scale=args.dist_scale)
        if fam == "normal":
            return distributions.normal(args.dist_scale)
        if fam == "uniform":
            return distributions.uniform(args.dist_scale)
        if fam == "t":
            if args.nu is None:
                raise _UsageError("--dist t needs --nu (degrees of freedom)")
            return distributions.student_t(args.nu, args.dist_scale)
        if fam == "stable":
            if args.alpha is None:
                raise _UsageError("--dist stable needs --alpha (tail index)")
            return distributions.stable(args.alpha, args.dist_scale)
        if fam == "empirical":
            if args.dist_data is None:
                raise _UsageError("--dist empirical needs --dist-data FILE")
            values = read_series(args.dist_data)
            return distributions.empirical(values, args.dist_scale)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    raise _UsageError(f"unknown innovation family {fam!r}")


def _add_dist_args(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--dist",
        default="logistic",
        choices=["logistic", "normal", "uniform", "t", "stable", "empirical"],
    )
    p.add_argument("--dist-scale", type=float, default=1.0)
    p.add_argument("--nu", type=float, default=None, help="degrees of freedom for --dist t")
    p.add_argument("--alpha", type=float, default=None, help="tail index for --dist stable")
    p.add_argument("--dist-data", default=None, help="draw file for the empirical family")


# -- fit ------------------------------------------------------------------


def _estimate_rows(result) -> list[dict]:
    rows = []
    for j, name in enumerate(result.theta.names):
        asd = _finite_or_none(result.se[j]) if result.se is not None else None
        p_value = None
        if asd is not None and asd > 0.0:
            p_value = _finite_or_none(t_test(result, j).p_value)
        rows.append(
            {
                "name": name,
                "estimate": float(result.theta.values[j]),
                "asd": asd,
                "p_value": p_value,
                "boundary": bool(result.boundary[j]),
            }
        )
    return rows


def _cmd_fit(args) -> int:
    model = _build_model(args)
    y = _read_data(args)
    seed = _resolve_seed(args.seed)
    opts = _fit_options(args, seed)
    result = fit(model, y, opts)
    report = residual_diagnostics(model, result, hill_k=args.hill_k)
    residuals_path = None
    if args.residuals is not None:
        write_series(args.residuals, result.residuals)
        residuals_path = str(args.residuals)
    options = {
        **_model_options(args),
        **_data_options(args),
        "criterion": args.criterion,
        "start": list(opts.start) if opts.start else None,
        "multistart": opts.multistart,
        "max_iter": opts.max_iter,
        "hill_k": args.hill_k,
        "residuals": residuals_path,
    }
    doc = {
        "schema": "lqmle.fit/1",
        "manifest": make_manifest("fit", options, input_path=args.data, seed=seed),
        "model": _model_block(model),
        "nobs": int(result.nobs),
        "criterion": result.criterion,
        "estimates": _estimate_rows(result),
        "loglik": float(result.loglik),
        "aic": report.aic,
        "convergence": {
            "converged": bool(result.converged),
            "iterations": int(result.iterations),
            "clamp_count": int(result.clamp_count),
            "n_starts": int(result.n_starts),
        },
        "diagnostics": report.as_dict(),
        "residuals_path": residuals_path,
    }
    dump_json(doc, args.out)
    if not result.converged:
        print("fit did not converge; report written anyway", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


# -- simulate --------------------------------------------------------------


def _cmd_simulate(args) -> int:
    model = _build_model(args)
    theta = _parse_floats(args.theta, "--theta")
    if len(theta) != model.dim:
        raise _UsageError(
            f"--theta has {len(theta)} values; {model.name} needs {model.dim} "
            f"({', '.join(model.param_names)})"
        )
    dist = _build_dist(args)
    seed = _resolve_seed(args.seed)
    y = simulate(model, np.asarray(theta), args.n, dist, seed=seed, burn=args.burn)
    write_series(args.out, y)
    options = {
        **_model_options(args),
        "theta": list(theta),
        "dist": args.dist,
        "dist_scale": args.dist_scale,
        "nu": args.nu,
        "alpha": args.alpha,
        "n": args.n,
        "burn": args.burn,
        "out": str(args.out),
    }
    doc = {
        "schema": "lqmle.simulate/1",
        "manifest": make_manifest("simulate", options, input_path=None, seed=seed),
        "nobs": int(args.n),
        "output": str(args.out),
        "output_sha256": sha256_file(args.out),
    }
    sidecar = f"{args.out}.manifest.json"
    dump_json(doc, sidecar)
    print(f"wrote {args.out} and {sidecar}", file=sys.stderr)
    return EXIT_OK


# -- mc ---------------------------------------------------------------------


def _scenario_dist(spec: dict):
    fam = spec.get("family")
    scale = float(spec.get("scale", 1.0))
    if fam == "logistic":
        return distributions.InnovationDist("logistic", scale=scale)
    if fam == "normal":
        return distributions.normal(scale)
    if fam == "uniform":
        return distributions.uniform(scale)
    if fam == "t":
        return distributions.student_t(float(spec["nu"]), scale)
    if fam == "stable":
        return distributions.stable(float(spec["alpha"]), scale)
    if fam == "empirical":
        return distributions.empirical(np.asarray(spec["data"], dtype=float), scale)
    raise DataFormatError(f"unknown innovation family {fam!r} in config")


def _scenario_model(spec):
    if isinstance(spec, str):
        return make_model(spec)
    spec = dict(spec)
    name = spec.pop("name")
    order = spec.pop("order", None)
    if order is not None:
        order = [int(v) for v in (order if isinstance(order, (list, tuple)) else [order])]
        if name == "expar":
            if len(order) != 1:
                raise ValueError("expar order takes one entry")
            spec["p"] = order[0]
        elif name == "arma_garch":
            if order != [1, 1]:
                raise ValueError("arma_garch supports only order [1, 1]")
        else:
            if len(order) != 2:
                raise ValueError(f"{name} order needs two entries [P, Q]")
            spec["p"], spec["q"] = order
    if name == "arma_garch" and "intercept" in spec:
        spec["include_intercept"] = bool(spec.pop("intercept"))
    return make_model(name, **spec)


def _load_scenarios(path, master_seed: int) -> list[Scenario]:
    with open(path) as fh:
        config = yaml.safe_load(fh)
    if not isinstance(config, dict) or "scenarios" not in config:
        raise DataFormatError(f"{path}: expected a mapping with a 'scenarios' list")
    scenarios = []
    for i, raw in enumerate(config["scenarios"]):
        try:
            seed = raw.get("seed")
            if seed is None:
                child = np.random.SeedSequence(master_seed, spawn_key=(1000 + i,))
                seed = int(child.generate_state(1, np.uint64)[0])
            constraint = None
            if raw.get("constraint") is not None:
                c = raw["constraint"]
                rows = tuple(tuple(float(v) for v in row) for row in c["R"])
                rhs = tuple(float(v) for v in c["r"])
                constraint = (rows, rhs)
            scenarios.append(
                Scenario(
                    model=_scenario_model(raw["model"]),
                    theta0=tuple(float(v) for v in raw["theta0"]),
                    dist=_scenario_dist(raw["dist"]),
                    nobs=int(raw["nobs"]),
                    reps=int(raw["reps"]),
                    seed=int(seed),
                    estimator=raw.get("estimator", "lqmle"),
                    burn=int(raw.get("burn", 0)),
                    constraint=constraint,
                    alternative_scale=float(raw.get("alternative_scale", 1.0)),
                    level=float(raw.get("level", 0.05)),
                    label=str(raw.get("label", "")),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"{path}: scenario {i}: {exc}") from None
    if not scenarios:
        raise DataFormatError(f"{path}: no scenarios defined")
    return scenarios


def _cmd_mc(args) -> int:
    with open(args.config) as fh:
        config = yaml.safe_load(fh)
    if not isinstance(config, dict):
        raise DataFormatError(f"{args.config}: expected a mapping")
    seed = args.seed if args.seed is not None else config.get("seed")
    seed = _resolve_seed(seed)
    scenarios = _load_scenarios(args.config, seed)
    workers = args.workers if args.workers is not None else int(config.get("workers", 1))
    max_fail = float(config.get("max_failure_fraction", 0.2))
    summaries, failed = [], []
    for i, sc in enumerate(scenarios):
        t0 = time.perf_counter()
        try:
            summary = run_scenario(sc, workers=workers, max_failure_fraction=max_fail)
        except ExcessiveFailures as exc:
            failed.append({"index": i, "label": sc.label, "error": str(exc)})
            print(f"scenario {sc.label or i}: {exc}", file=sys.stderr)
            continue
        print(
            f"scenario {sc.label or i}: {summary.reps_used}/{summary.reps} "
            f"replications in {time.perf_counter() - t0:.1f}s",
            file=sys.stderr,
        )
        summaries.append(summary.as_dict())
    doc = {
        "schema": "lqmle.mc/1",
        "manifest": make_manifest("mc", {}, input_path=args.config, seed=seed),
        "summaries": summaries,
        "failed": failed,
    }
    dump_json(doc, args.out)
    if failed:
        print(f"{len(failed)}/{len(scenarios)} scenarios failed", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


# -- test --------------------------------------------------------------------


def _parse_restrictions(texts, dim: int):
    rows, rhs = [], []
    for text in texts:
        if "=" not in text:
            raise _UsageError(f"restriction {text!r} must look like c1,...,cd=r")
        left, right = text.rsplit("=", 1)
        row = _parse_floats(left, "--restrict row")
        if len(row) != dim:
            raise _UsageError(f"restriction row has {len(row)} coefficients, model has {dim}")
        rows.append(row)
        try:
            rhs.append(float(right))
        except ValueError:
            raise _UsageError(f"restriction value {right!r} is not a number") from None
    return np.asarray(rows), np.asarray(rhs)


def _cmd_test(args) -> int:
    model = _build_model(args)
    y = _read_data(args)
    seed = _resolve_seed(args.seed)
    opts = _fit_options(args, seed)
    R, r = _parse_restrictions(args.restrict, model.dim)
    result = fit(model, y, opts)
    wald = wald_test(result, R, r)
    cfit = fit_constrained(model, y, R, r, opts)
    lm = lm_test(cfit, R, r)
    options = {
        **_model_options(args),
        **_data_options(args),
        "criterion": args.criterion,
        "restrict": list(args.restrict),
    }
    doc = {
        "schema": "lqmle.test/1",
        "manifest": make_manifest("test", options, input_path=args.data, seed=seed),
        "model": _model_block(model),
        "nobs": int(result.nobs),
        "restriction": {"R": R.tolist(), "r": r.tolist()},
        "tests": [wald.as_dict(), lm.as_dict()],
        "deviance": deviance(result, cfit),
        "loglik_unrestricted": float(result.loglik),
        "loglik_restricted": float(cfit.loglik),
    }
    dump_json(doc, args.out)
    if not (result.converged and cfit.converged):
        print("a fit did not converge; report written anyway", file=sys.stderr)
        return EXIT_NOCONV
    return EXIT_OK


# -- calibrate -----------------------------------------------------------------


def _cmd_calibrate(args) -> int:
    options = {"family": args.family, "nu": args.nu, "tol": args.tol}
    manifest = make_manifest("calibrate", options, input_path=None, seed=None)
    if args.family == "stable":
        tol = args.tol if args.tol is not None else 2e-3
        index = kernel.calibrate_stable_index(tol=tol)
        value, se = kernel.stable_kernel_expectation(index)
        doc = {
            "schema": "lqmle.calibrate/1",
            "manifest": manifest,
            "family": "stable",
            "index": index,
            "expectation": value,
            "psi_error": abs(value - 1.0),
            "mc_se": se,
        }
    else:
        if args.family == "t" and args.nu is None:
            raise _UsageError("family t needs --nu (degrees of freedom)")
        tol = args.tol if args.tol is not None else 1e-6
        family = "student_t" if args.family == "t" else args.family
        scale = kernel.calibrate_scale(family, shape=args.nu, tol=tol)
        dist = distributions.InnovationDist(family, scale=scale, shape=args.nu)
        value = kernel.kernel_expectation(dist)
        doc = {
            "schema": "lqmle.calibrate/1",
            "manifest": manifest,
            "family": args.family,
            "nu": args.nu,
            "scale": scale,
            "expectation": value,
            "psi_error": abs(value - 1.0),
        }
    dump_json(doc, args.out)
    return EXIT_OK


# -- diagnose -------------------------------------------------------------------


def _cmd_diagnose(args) -> int:
    model = _build_model(args)
    y = _read_data(args)
    theta = _parse_floats(args.theta, "--theta")
    if len(theta) != model.dim:
        raise _UsageError(f"--theta has {len(theta)} values; {model.name} needs {model.dim}")
    parts = evaluate(model, y, np.asarray(theta), order=0)
    # quacks enough like a fit for the diagnostics assembler
    shim = SimpleNamespace(
        residuals=parts.residuals, loglik=parts.loglik, theta=np.asarray(theta)
    )
    diag = residual_diagnostics(model, shim, hill_k=args.hill_k).as_dict()
    diag["hill_sweep"] = hill_sweep(parts.residuals)
    options = {
        **_model_options(args),
        **_data_options(args),
        "theta": list(theta),
        "hill_k": args.hill_k,
    }
    doc = {
        "schema": "lqmle.diagnose/1",
        "manifest": make_manifest("diagnose", options, input_path=args.data, seed=None),
        "model": _model_block(model),
        "theta": list(theta),
        "nobs": int(parts.nobs),
        "diagnostics": diag,
    }
    dump_json(doc, args.out)
    return EXIT_OK


# -- render ----------------------------------------------------------------------


def _cmd_render(args) -> int:
    try:
        with open(args.report) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{args.report}: not valid JSON ({exc})") from None
    try:
        text = render_document(doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise DataFormatError(f"{args.report}: malformed report document ({exc})") from None
    print(text)
    return EXIT_OK


# -- driver ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lqmle",
        description="Logistic quasi-likelihood estimation for conditional location-scale models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="estimate a model from a series file")
    _add_data_args(p)
    _add_model_args(p)
    _add_fit_args(p)
    p.add_argument("--hill-k", type=int, default=None, help="order statistics for the Hill index")
    p.add_argument("--residuals", default=None, help="also write standardized residuals here")
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("simulate", help="generate a series from a model")
    _add_model_args(p)
    _add_dist_args(p)
    p.add_argument("--theta", required=True, help="comma-separated parameter values")
    p.add_argument("--n", type=int, required=True, help="series length")
    p.add_argument("--burn", type=int, default=0)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="series file to write")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("mc", help="run simulation scenarios from a config file")
    p.add_argument("config", help="YAML (or JSON) scenario file")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None, help="master seed for derived scenario seeds")
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.set_defaults(func=_cmd_mc)

    p = sub.add_parser("test", help="Wald and multiplier tests of linear restrictions")
    _add_data_args(p)
    _add_model_args(p)
    _add_fit_args(p)
    p.add_argument(
        "--restrict",
        action="append",
        required=True,
        help="restriction row 'c1,...,cd=r'; repeat for several rows",
    )
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("calibrate", help="scale (or stable index) with unit kernel expectation")
    p.add_argument(
        "--family", required=True, choices=["logistic", "normal", "uniform", "t", "stable"]
    )
    p.add_argument("--nu", type=float, default=None, help="degrees of freedom for family t")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("diagnose", help="residual and tail diagnostics at given parameters")
    _add_data_args(p)
    _add_model_args(p)
    p.add_argument("--theta", required=True, help="comma-separated parameter values")
    p.add_argument("--hill-k", type=int, default=None, help="order statistics for the Hill index")
    p.add_argument("--out", default=None, help="report path (default stdout)")
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("render", help="print a text view of a report document")
    p.add_argument("report", help="report JSON produced by another subcommand")
    p.set_defaults(func=_cmd_render)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, OSError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (LqmleError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"elapsed: {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

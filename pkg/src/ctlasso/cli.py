"""Command-line interface: fit, path, cv, simulate, diagnose.

CSV inputs carry a header row; the response column is selected by name and
every remaining column must be numeric.  Numeric output uses 17 significant
digits so files round-trip exactly; the same config and seed always produce
byte-identical result bodies.  Exit codes: 0 success, 2 on configuration or
parse errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .covariance import (
    CovMatrix,
    StandardizedDesign,
    ThresholdKind,
    ThresholdRule,
    sample_covariance,
    standardize,
)
from .diagnostics import build_report
from .estimators import EstimatorSpec, Method, fit_path
from .exceptions import CtLassoError, NumericalError
from .metrics import selection_metrics
from .model_selection import (
    DEFAULT_FOLDS,
    CvVariant,
    default_lambda_grid,
    grid_search_cv,
)
from .path import Breakpoint, SolutionPath, Termination, coefficients_at
from .simulation import (
    CvOptions,
    SigmaSpec,
    SimulationDesign,
    Tuning,
    make_sigma,
    preset,
    run_experiment,
)

SCHEMA_VERSION = 1
CSV_HEADER_LINE = "# ctlasso v1"

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class CliError(Exception):
    """Configuration or input problem; maps to exit code 2."""


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


# ---------------------------------------------------------------------------
# CSV input


def read_csv_design(path: str, response: str) -> tuple[StandardizedDesign, list[str]]:
    """Load a header-ed CSV, standardize, and return the predictor names."""
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise CliError(f"{path}: empty file") from None
            rows = list(reader)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    if response not in header:
        raise CliError(f"{path}: response column {response!r} not in header")
    rcol = header.index(response)
    if not rows:
        raise CliError(f"{path}: no data rows")

    names = [h for i, h in enumerate(header) if i != rcol]
    y = np.empty(len(rows))
    x = np.empty((len(rows), len(names)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise CliError(f"{path}: row {i + 2} has {len(row)} fields, expected {len(header)}")
        k = 0
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise CliError(
                    f"{path}: row {i + 2}, column {header[j]!r}: non-numeric value {cell!r}"
                ) from None
            if j == rcol:
                y[i] = v
            else:
                x[i, k] = v
                k += 1
    return standardize(x, y), names


# ---------------------------------------------------------------------------
# Method / rule construction from flags


def build_spec(args) -> EstimatorSpec:
    name = args.method
    if name == "lasso":
        return EstimatorSpec(Method.LASSO)
    if name == "ust":
        return EstimatorSpec(Method.UST)
    if name == "adaptive-lasso":
        return EstimatorSpec(Method.ADAPTIVE_LASSO, gamma_weights=args.gamma)
    if name == "elastic-net":
        return EstimatorSpec(Method.ELASTIC_NET, rule=ThresholdRule.elastic_net(args.lambda2))
    if name == "ct-hard":
        return EstimatorSpec(Method.CT_LASSO, rule=ThresholdRule.hard(args.nu))
    if name == "ct-soft":
        return EstimatorSpec(Method.CT_LASSO, rule=ThresholdRule.soft(args.nu))
    if name == "ct-adaptive":
        return EstimatorSpec(Method.CT_LASSO, rule=ThresholdRule.adaptive(args.nu, args.gamma))
    raise CliError(f"unknown method {name!r}")


METHOD_CHOICES = [
    "lasso", "ust", "adaptive-lasso", "elastic-net", "ct-hard", "ct-soft", "ct-adaptive",
]

VARIANTS = {
    "minus": CvVariant.CV_MINUS,
    "zero": CvVariant.CV_ZERO,
    "plus": CvVariant.CV_PLUS,
    "auto": CvVariant.AUTO,
}


def _rule_json(rule: ThresholdRule | None) -> dict | None:
    if rule is None:
        return None
    return {"kind": rule.kind.value, "nu": rule.nu, "gamma": rule.gamma, "lambda2": rule.lambda2}


def _rule_from_json(obj: dict | None) -> ThresholdRule | None:
    if obj is None:
        return None
    return ThresholdRule(
        ThresholdKind(obj["kind"]), nu=obj["nu"], gamma=obj["gamma"], lambda2=obj["lambda2"]
    )


# ---------------------------------------------------------------------------
# fit


def _nu_grid_kw(args) -> dict:
    if getattr(args, "nu_grid", None) is None:
        return {}
    try:
        return {"nu_grid": [float(v) for v in args.nu_grid.split(",")]}
    except ValueError:
        raise CliError(f"bad --nu-grid {args.nu_grid!r}") from None


def cmd_fit(args) -> int:
    design, names = read_csv_design(args.input, args.response)
    spec = build_spec(args)

    if args.lam is not None:
        lam = args.lam
        tuning_meta = {"source": "fixed", "lambda": lam}
    else:
        sel = grid_search_cv(
            design, spec, k=args.cv_folds, variant=VARIANTS[args.cv_variant],
            seed=args.seed, **_nu_grid_kw(args),
        )
        lam = sel.lambda_hat
        spec = _bind_selection(spec, sel)
        tuning_meta = {
            "source": "cv",
            "lambda": lam,
            "variant": sel.variant_used.value,
            "rule": _rule_json(sel.rule_hat),
            "gamma_weights": sel.gamma_weights,
        }

    path = fit_path(design, spec)
    beta_std = coefficients_at(path, lam, clamp=True)
    beta_raw = beta_std / design.column_scales
    intercept = design.y_mean - float(beta_raw @ design.column_means)

    if args.format == "json":
        payload = {
            "schema_version": SCHEMA_VERSION,
            "method": spec.label(),
            "lambda": lam,
            "tuning": tuning_meta,
            "intercept": intercept,
            "variables": names,
            "coefficients": list(map(float, beta_raw)),
            "coefficients_standardized": list(map(float, beta_std)),
        }
        _write_json(args.out, payload)
    else:
        lines = [CSV_HEADER_LINE, "variable,coefficient,coefficient_standardized"]
        lines.append(f"(intercept),{_fmt(intercept)},0")
        for name, br, bs in zip(names, beta_raw, beta_std):
            lines.append(f"{name},{_fmt(br)},{_fmt(bs)}")
        _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _bind_selection(spec: EstimatorSpec, sel) -> EstimatorSpec:
    if spec.method is Method.ADAPTIVE_LASSO:
        return EstimatorSpec(spec.method, gamma_weights=sel.gamma_weights)
    if spec.method is Method.UST:
        return spec
    return EstimatorSpec(spec.method, rule=sel.rule_hat)


# ---------------------------------------------------------------------------
# path


def path_to_json(path: SolutionPath) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "p": path.p,
        "rule": _rule_json(path.rule),
        "termination": path.termination.value,
        "error": path.error,
        "breakpoints": [
            {
                "lambda": bp.lam,
                "beta": list(map(float, bp.beta)),
                "active": list(bp.active),
                "is_global": bp.is_global,
            }
            for bp in path.breakpoints
        ],
    }


def path_from_json(obj: dict) -> SolutionPath:
    bps = [
        Breakpoint(
            lam=bp["lambda"],
            beta=np.array(bp["beta"], dtype=float),
            active=tuple(bp["active"]),
            is_global=bp["is_global"],
        )
        for bp in obj["breakpoints"]
    ]
    return SolutionPath(
        breakpoints=bps,
        termination=Termination(obj["termination"]),
        rule=_rule_from_json(obj["rule"]),
        error=obj.get("error"),
    )


def cmd_path(args) -> int:
    design, names = read_csv_design(args.input, args.response)
    spec = build_spec(args)
    path = fit_path(design, spec, max_steps=args.max_steps)

    if args.format == "json":
        _write_json(args.out, path_to_json(path))
    else:
        lines = [CSV_HEADER_LINE, "lambda," + ",".join(names)]
        for bp in path.breakpoints:
            lines.append(",".join([_fmt(bp.lam)] + [_fmt(v) for v in bp.beta]))
        _write_text(args.out, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# cv


def cmd_cv(args) -> int:
    design, _ = read_csv_design(args.input, args.response)
    spec = build_spec(args)
    sel = grid_search_cv(
        design, spec, k=args.cv_folds, variant=VARIANTS[args.cv_variant],
        seed=args.seed, **_nu_grid_kw(args),
    )
    payload = {
        "schema_version": SCHEMA_VERSION,
        "method": spec.label(),
        "lambda_hat": sel.lambda_hat,
        "variant_used": sel.variant_used.value,
        "rule_hat": _rule_json(sel.rule_hat),
        "gamma_weights": sel.gamma_weights,
        "diagnostics": sel.diagnostics,
        "folds": args.cv_folds,
        "seed": args.seed,
    }
    _write_json(args.out, payload)
    return 0


# ---------------------------------------------------------------------------
# simulate


def parse_config_file(path: str) -> dict:
    """Key/value experiment config: one `key = value` pair per line, # comments."""
    out = {}
    try:
        with open(path) as fh:
            for ln, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{ln}: expected key = value")
                key, val = (part.strip() for part in line.split("=", 1))
                out[key] = val
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    return out


def _parse_beta(text: str, p: int) -> np.ndarray:
    """Coefficient segments like ``3@1-5,1.5@11-15`` (1-based, inclusive)."""
    beta = np.zeros(p)
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            value, rng = part.split("@")
            lo, _, hi = rng.partition("-")
            lo_i = int(lo)
            hi_i = int(hi) if hi else lo_i
            beta[lo_i - 1: hi_i] = float(value)
        except (ValueError, IndexError):
            raise CliError(f"bad beta segment {part!r} (expected VALUE@LO-HI)") from None
    return beta


def _parse_sigma(text: str) -> SigmaSpec:
    kind, _, param = text.partition(":")
    kind = kind.strip().lower()
    if kind == "identity":
        return SigmaSpec.identity()
    if kind == "ar":
        return SigmaSpec.ar(float(param))
    if kind == "constant":
        return SigmaSpec.constant(float(param))
    if kind == "grouped":
        return SigmaSpec.grouped()
    raise CliError(f"unknown sigma spec {text!r}")


def design_from_config(cfg: dict, *, n: int, reps: int, seed: int) -> SimulationDesign:
    if "preset" in cfg:
        return preset(cfg["preset"], n=n, replications=reps, seed=seed)
    try:
        p = int(cfg["p"])
        sigma = _parse_sigma(cfg["sigma"])
        beta = _parse_beta(cfg["beta"], p)
        noise = float(cfg["sigma_noise"])
    except KeyError as exc:
        raise CliError(f"config missing key {exc.args[0]!r}") from exc
    return SimulationDesign(
        p=p, n=n, beta_star=beta, sigma_spec=sigma, sigma_noise=noise,
        replications=reps, seed=seed, name=cfg.get("name", "custom"),
    )


def cmd_simulate(args) -> int:
    if not args.preset and not args.config:
        raise CliError("simulate requires --preset or --config")
    cfg = parse_config_file(args.config) if args.config else {}
    if args.preset:
        cfg["preset"] = args.preset
    if "preset" in cfg:
        try:
            preset(cfg["preset"], n=2)
        except ValueError as exc:
            raise CliError(str(exc)) from exc

    n_values = [int(v) for v in args.n.split(",")] if args.n else [int(cfg.get("n", 20))]
    reps = args.reps if args.reps is not None else int(cfg.get("reps", 200))
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    methods = [_spec_from_name(m) for m in (args.methods.split(",") if args.methods
                                            else cfg.get("methods", "lasso").split(","))]
    tuning = Tuning.BEST_POSSIBLE if args.tuning == "best" else Tuning.CROSS_VALIDATION
    cv_opts = CvOptions(k=args.cv_folds, variant=VARIANTS[args.cv_variant])

    rows = []
    detail = []
    for n in n_values:
        design = design_from_config(cfg, n=n, reps=reps, seed=seed)
        result = run_experiment(
            design, methods, tuning, cv_opts,
            workers=args.workers, keep_replications=bool(args.details),
        )
        for agg in result.aggregates:
            rows.append((n, agg))
        if args.details:
            for r, reps_out in enumerate(result.replications):
                for rr in reps_out:
                    detail.append(
                        {
                            "n": n,
                            "replication": r,
                            "method": rr.method,
                            "g": rr.metrics.g,
                            "rpe": rr.rpe,
                            "tp": rr.metrics.tp,
                            "fp": rr.metrics.fp,
                            "sensitivity": rr.metrics.sensitivity,
                            "specificity": rr.metrics.specificity,
                            "selected": rr.selected_count,
                            "lambda": rr.lam,
                            "rule": _rule_json(rr.rule),
                            "gamma_weights": rr.gamma_weights,
                        }
                    )

    cols = (
        "n,method,tuning,reps,median_g,se_g,median_rpe,se_rpe,"
        "median_tp,median_fp,median_sensitivity,median_specificity,median_selected"
    )
    lines = [CSV_HEADER_LINE, cols]
    for n, agg in rows:
        lines.append(
            ",".join(
                [
                    str(n), agg.method, tuning.value, str(agg.reps),
                    _fmt(agg.median_g), _fmt(agg.se_g),
                    _fmt(agg.median_rpe), _fmt(agg.se_rpe),
                    _fmt(agg.median_tp), _fmt(agg.median_fp),
                    _fmt(agg.median_sensitivity), _fmt(agg.median_specificity),
                    _fmt(agg.median_selected),
                ]
            )
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    if args.details:
        _write_json(args.details, {"schema_version": SCHEMA_VERSION, "replications": detail})
    return 0


def _spec_from_name(name: str) -> EstimatorSpec:
    name = name.strip()
    if name == "lasso":
        return EstimatorSpec(Method.LASSO)
    if name == "ust":
        return EstimatorSpec(Method.UST)
    if name == "adaptive-lasso":
        return EstimatorSpec(Method.ADAPTIVE_LASSO)
    if name == "elastic-net":
        return EstimatorSpec(Method.ELASTIC_NET)
    if name == "ct-hard":
        return EstimatorSpec(Method.CT_LASSO, rule=ThresholdRule.hard(0.0))
    if name == "ct-soft":
        return EstimatorSpec(Method.CT_LASSO, rule=ThresholdRule.soft(0.0))
    if name == "ct-adaptive":
        return EstimatorSpec(Method.CT_LASSO, rule=ThresholdRule.adaptive(0.0, 0.0))
    raise CliError(f"unknown method {name!r}")


# ---------------------------------------------------------------------------
# diagnose


def _parse_support(text: str, p: int) -> list[int]:
    """1-based index list with ranges, e.g. ``1-5,11,13``; returned 0-based."""
    out = set()
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = part.split("-")
                out.update(range(int(lo) - 1, int(hi)))
            else:
                out.add(int(part) - 1)
        except ValueError:
            raise CliError(f"bad support element {part!r}") from None
    if not out or min(out) < 0 or max(out) >= p:
        raise CliError(f"support indices must lie in 1..{p}")
    return sorted(out)


def cmd_diagnose(args) -> int:
    if args.sigma:
        if args.p is None:
            raise CliError("--sigma requires --p")
        cov = make_sigma(_parse_sigma(args.sigma), args.p)
        n = args.n_obs
        p = args.p
    elif args.input:
        design, _ = read_csv_design(args.input, args.response)
        cov = sample_covariance(design)
        n = design.n
        p = design.p
    else:
        raise CliError("diagnose requires --sigma or an input CSV")

    support = _parse_support(args.support, p)
    report = build_report(cov, support, n=n)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "p": p,
        "support": [i + 1 for i in support],
        "irrep_index": list(map(float, report.irrep_index)),
        "irrep_max": report.irrep_max,
        "d_ss": report.d_ss,
        "d_cs": report.d_cs,
        "lambda_min_ss": report.lambda_min_ss,
        "nu_recommended": report.nu_recommended,
    }
    _write_json(args.out, payload)
    return 0


# ---------------------------------------------------------------------------
# plumbing


def _write_text(out: str | None, text: str) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_json(out: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    _write_text(out, text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ctlasso", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(p, with_method=True):
        if with_method:
            p.add_argument("--method", default="lasso", choices=METHOD_CHOICES)
            p.add_argument("--nu", type=float, default=0.0, help="threshold level")
            p.add_argument("--gamma", type=float, default=0.0,
                           help="adaptive exponent / adaptive-lasso weight exponent")
            p.add_argument("--lambda2", type=float, default=0.0, help="ridge level")
            p.add_argument("--nu-grid", default=None,
                           help="comma-separated threshold grid for CV search")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", default="json", choices=["json", "csv"])

    fit = sub.add_parser("fit", help="fit coefficients at a penalty (or by CV)")
    fit.add_argument("input", help="CSV file with a header row")
    fit.add_argument("--response", required=True)
    fit.add_argument("--lambda", dest="lam", type=float, default=None)
    fit.add_argument("--cv-folds", type=int, default=DEFAULT_FOLDS)
    fit.add_argument("--cv-variant", default="auto", choices=sorted(VARIANTS))
    add_common(fit)
    fit.set_defaults(func=cmd_fit)

    pth = sub.add_parser("path", help="export the full solution path")
    pth.add_argument("input")
    pth.add_argument("--response", required=True)
    pth.add_argument("--max-steps", type=int, default=None)
    add_common(pth)
    pth.set_defaults(func=cmd_path)

    cv = sub.add_parser("cv", help="grid-search cross-validation")
    cv.add_argument("input")
    cv.add_argument("--response", required=True)
    cv.add_argument("--cv-folds", type=int, default=DEFAULT_FOLDS)
    cv.add_argument("--cv-variant", default="auto", choices=sorted(VARIANTS))
    add_common(cv)
    cv.set_defaults(func=cmd_cv)

    sim = sub.add_parser("simulate", help="run a replicated experiment")
    sim.add_argument("--preset", default=None, help="intro, ex1, ex2, or ex3")
    sim.add_argument("--config", default=None, help="key = value config file")
    sim.add_argument("--n", default=None, help="sample size(s), comma-separated")
    sim.add_argument("--reps", type=int, default=None)
    sim.add_argument("--methods", default=None, help="comma-separated method names")
    sim.add_argument("--tuning", default="cv", choices=["best", "cv"])
    sim.add_argument("--cv-folds", type=int, default=DEFAULT_FOLDS)
    sim.add_argument("--cv-variant", default="auto", choices=sorted(VARIANTS))
    sim.add_argument("--workers", type=int, default=None)
    sim.add_argument("--details", default=None, help="write per-replication JSON here")
    add_common(sim, with_method=False)
    sim.set_defaults(func=cmd_simulate)

    dia = sub.add_parser("diagnose", help="irrepresentable index and sparsity degrees")
    dia.add_argument("--input", default=None, help="CSV data (sample covariance mode)")
    dia.add_argument("--response", default=None)
    dia.add_argument("--sigma", default=None, help="population spec, e.g. ar:0.5")
    dia.add_argument("--p", type=int, default=None)
    dia.add_argument("--n-obs", type=int, default=None)
    dia.add_argument("--support", required=True, help="true variables, 1-based, e.g. 1-5,11")
    add_common(dia, with_method=False)
    dia.set_defaults(func=cmd_diagnose)

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"error: numerical: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except CtLassoError as exc:
        print(f"error: data: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

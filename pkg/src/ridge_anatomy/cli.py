"""
``ridge-anatomy`` command line.

Every subcommand prints one report: a JSON document with ``command``,
``inputs``, ``rows``, ``summary`` and ``provenance`` keys, or a CSV table
(``rows`` followed by ``summary`` records, sharing one header).

Exit codes: 0 success, 2 usage or input error, 3 violated precondition,
4 empty result.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .constraint import (
    LengthFunction,
    equivalence_class,
    feasible_interval,
    global_length_minimum,
)
from .dataset import (
    StandardizedModel,
    coefficients_in,
    file_sha256,
    intercept,
    load_csv,
    resolve_data_path,
    standardize,
)
from .diagnostics import conditioning_report, crossing_lambda
from .errors import EmptyClass, InputError, RidgeAnatomyError
from .estimators import fit, fit_generalized_ridge, residual_root
from .mixsim import SimScenario, random_design, run_simulation
from .selection import CRITERIA, criterion_value, ridge_trace, select_lambda

__all__ = ["ReportDocument", "parse_grid", "build_parser", "main"]


# ---------------------------------------------------------------------------
# Report serialization
# ---------------------------------------------------------------------------


@dataclass
class ReportDocument:
    command: str
    inputs: dict
    rows: list[dict] = field(default_factory=list)
    summary: list[dict] = field(default_factory=list)
    provenance: dict = field(default_factory=dict)


def _plain(value: Any) -> Any:
    """Convert numpy scalars and non-finite floats into JSON-safe values."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return value


def render(doc: ReportDocument, fmt: str) -> str:
    if fmt == "json":
        payload = {
            "command": doc.command,
            "inputs": doc.inputs,
            "rows": doc.rows,
            "summary": doc.summary,
            "provenance": doc.provenance,
        }
        return json.dumps(_plain(payload), indent=2) + "\n"
    records = [_plain(r) for r in doc.rows + doc.summary]
    columns: list[str] = []
    for r in records:
        for key in r:
            if key not in columns:
                columns.append(key)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in records:
        writer.writerow(["" if r.get(c) is None else _cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ";".join(_cell(v) for v in value)
    return str(value)


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------


def _float_list(text: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop included) or a comma list; returned ascending."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {text!r}")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(f"grid must be numeric, got {text!r}")
        if step == 0 or not all(math.isfinite(v) for v in (start, stop, step)):
            raise argparse.ArgumentTypeError("grid step must be finite and non-zero")
        count = math.floor((stop - start) / step + 1e-9)
        if count < 0:
            raise argparse.ArgumentTypeError(f"grid {text!r} is empty")
        values = [round(start + i * step, 12) for i in range(count + 1)]
    else:
        values = _float_list(text)
    return sorted(set(values))


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive and finite, got {text}")
    return v


def _count(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {v}")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _load(args) -> tuple[StandardizedModel, dict]:
    path = resolve_data_path(args.data)
    if not path.is_file():
        raise InputError(f"data file not found: {args.data}")
    model = standardize(load_csv(path))
    provenance = {
        "library": "ridge_anatomy",
        "version": __version__,
        "data": args.data,
        "data_sha256": file_sha256(path),
    }
    return model, provenance


def _coef_columns(model: StandardizedModel, values) -> dict:
    return {f"b_{name}": float(v) for name, v in zip(model.names, values)}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_fit(args) -> ReportDocument:
    model, prov = _load(args)
    if args.estimator == "gridge":
        if args.gr_lambdas is None:
            raise InputError("--estimator gridge requires --gr-lambdas")
        beta = fit_generalized_ridge(model, args.gr_lambdas, basis=args.gr_basis)
    else:
        beta = fit(args.estimator, model, args.lam)
    coef = coefficients_in(beta, model, args.space)
    row = {"estimator": args.estimator, "lambda": args.lam, "space": args.space}
    row.update(_coef_columns(model, coef.values))
    row.update(
        {
            "length": coef.norm(),
            "residual_root": residual_root(model, beta),
            "intercept": intercept(model, beta),
        }
    )
    inputs = {
        "estimator": args.estimator,
        "lambda": args.lam,
        "space": args.space,
        "gr_lambdas": args.gr_lambdas,
        "gr_basis": args.gr_basis,
    }
    return ReportDocument("fit", inputs, [row], [], prov)


def cmd_trace(args) -> ReportDocument:
    model, prov = _load(args)
    rows = []
    for p in ridge_trace(model, args.grid):
        row = {"lambda": p.lam}
        row.update(_coef_columns(model, p.coefficients.values))
        row.update({"intercept": p.intercept, "length": p.length, "residual_root": p.residual_root})
        rows.append(row)
    return ReportDocument("trace", {"grid": args.grid}, rows, [], prov)


def cmd_select(args) -> ReportDocument:
    names = [c.strip() for c in args.criteria.split(",") if c.strip()]
    if not names:
        raise InputError("--criteria is empty")
    unknown = [c for c in names if c not in CRITERIA]
    if unknown:
        raise InputError(f"unknown criteria {unknown}; choose from {list(CRITERIA)}")
    model, prov = _load(args)
    grid = args.grid
    rows, summary = [], []
    for name in names:
        if name == "hkb":
            value = criterion_value("hkb", model, hkb_convention=args.hkb_convention)
            rows.append({"criterion": "hkb", "lambda": value, "objective": value,
                         "note": f"closed form, {args.hkb_convention} convention"})
        elif name == "df":
            rows.append({"criterion": "df", "lambda": None, "objective": None,
                         "note": "curve only; see summary rows"})
            points = grid if grid is not None else parse_grid(f"0:{args.lambda_max}:0.01")
            for lam in points:
                if 0 <= lam <= args.lambda_max:
                    summary.append({"criterion": "df_curve", "lambda": lam,
                                    "objective": criterion_value("df", model, lam)})
        else:
            res = select_lambda(name, model, grid, args.lambda_max, press_method=args.press_method)
            note = f"grid [{res.grid_start:g}, {res.grid_stop:g}] x {res.grid_points}"
            if name == "press":
                note += f", {args.press_method}"
            rows.append({"criterion": name, "lambda": res.chosen_lambda,
                         "objective": res.objective_value, "note": note})
    inputs = {"criteria": names, "grid": grid, "lambda_max": args.lambda_max,
              "press_method": args.press_method, "hkb_convention": args.hkb_convention}
    return ReportDocument("select", inputs, rows, summary, prov)


def cmd_eqclass(args) -> ReportDocument:
    model, prov = _load(args)
    f = LengthFunction(model, args.space)
    c = args.length
    inputs = {"length": c, "space": args.space, "lambda_max": args.lambda_max,
              "scan_points": args.scan_points, "search_beyond": args.search_beyond}
    feas = feasible_interval(f, c, args.lambda_max, args.scan_points)
    lam_min, min_len = global_length_minimum(f, args.lambda_max, args.scan_points)
    summary = [
        {"item": "global_minimum", "lambda": lam_min, "length": min_len},
        {"item": "feasible_interval", "admissible": feas.admissible, "lower": feas.lower,
         "upper": feas.upper, "lower_open": feas.lower_open, "note": feas.note},
    ]
    try:
        cls = equivalence_class(f, c, args.lambda_max, args.scan_points, args.search_beyond)
        members = cls.members
    except EmptyClass:
        if feas.lower is None:
            raise
        members = ()
    rows = []
    for i, lam in enumerate(members):
        beta = fit("ridge", model, lam)
        rows.append({"lambda": lam, "length": float(math.sqrt(f(lam))),
                     "residual_root": residual_root(model, beta), "minimizing": i == 0})
    summary.insert(0, {"item": "minimizing", "lambda": members[0] if members else None,
                       "members": len(members)})
    return ReportDocument("eqclass", inputs, rows, summary, prov)


def cmd_diagnose(args) -> ReportDocument:
    model, prov = _load(args)
    kinds = ["ridge", "surrogate"] if args.kind == "both" else [args.kind]
    rows = []
    for kind in kinds:
        for lam in args.grid:
            r = conditioning_report(kind, model, lam)
            row = {
                "kind": kind,
                "lambda": lam,
                "data_transform_cond": r.data_transform_cond,
                "param_transform_cond": r.param_transform_cond,
                "dispersion_cond": r.dispersion_cond,
                "correlation_cond": r.correlation_cond,
                "max_vif": r.max_vif,
                "max_vif_coefficient": model.names[r.argmax_vif],
            }
            row.update({f"vif_{n}": float(v) for n, v in zip(model.names, r.vifs)})
            row["surrogate_distance"] = r.surrogate_distance
            rows.append(row)
    summary = []
    if args.kind == "both":
        for metric in ("data_transform_cond", "correlation_cond"):
            lam, value = crossing_lambda(metric, model, tuple(args.bracket))
            summary.append({"kind": "crossing", "metric": metric, "lambda": lam, "value": value})
    inputs = {"grid": args.grid, "kind": args.kind, "bracket": args.bracket}
    return ReportDocument("diagnose", inputs, rows, summary, prov)


def cmd_simulate(args) -> ReportDocument:
    if len(args.beta) != args.k:
        raise InputError(f"--beta has {len(args.beta)} entries but --k is {args.k}")
    prov = {"library": "ridge_anatomy", "version": __version__}
    if args.design == "file":
        if args.design_file is None:
            raise InputError("--design file requires --design-file")
        path = Path(args.design_file)
        if not path.is_file():
            raise InputError(f"design file not found: {path}")
        try:
            design = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        except ValueError as exc:
            raise InputError(f"cannot parse design file: {exc}") from None
        if design.shape[1] != args.k:
            raise InputError(f"design file has {design.shape[1]} columns, --k is {args.k}")
        prov["design_sha256"] = file_sha256(path)
    else:
        design = random_design(args.n, args.k, args.seed)
    scenario = SimScenario(
        design=design,
        beta_true=args.beta,
        sigma=args.sigma,
        radius=args.radius,
        replicates=args.replicates,
        seed=args.seed,
        energy_sample=args.energy_sample,
        permutations=args.permutations,
    )
    report = run_simulation(scenario, strict=args.strict)
    row = report.to_dict()
    spectrum = row.pop("covariance_spectrum")
    lo, hi = row.pop("alpha_ci")
    row["alpha_ci_low"], row["alpha_ci_high"] = lo, hi
    for i, v in enumerate(spectrum, start=1):
        row[f"cov_eig_{i}"] = v
    inputs = {"k": args.k, "beta": args.beta, "sigma": args.sigma, "radius": args.radius,
              "replicates": args.replicates, "seed": args.seed, "design": args.design,
              "n": design.shape[0], "energy_sample": args.energy_sample,
              "permutations": args.permutations, "strict": args.strict}
    return ReportDocument("simulate", inputs, [row], [], prov)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ridge-anatomy",
        description="Ridge, surrogate ridge and constrained least squares diagnostics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data=True):
        if data:
            p.add_argument("--data", required=True,
                           help="CSV path, or 'hospital' for the bundled fixture")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("fit", help="fit one estimator")
    common(p)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--estimator", choices=("ols", "ridge", "surrogate", "gridge"), default="ridge")
    p.add_argument("--gr-lambdas", type=_float_list, default=None)
    p.add_argument("--gr-basis", choices=("canonical", "raw"), default="canonical")
    p.add_argument("--space", choices=("original", "standardized", "canonical"), default="original")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("trace", help="ridge trace over a grid")
    common(p)
    p.add_argument("--grid", type=parse_grid, required=True)
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("select", help="ridge parameter selection criteria")
    common(p)
    p.add_argument("--criteria", required=True, help="comma list of df,gcv,cp,press,hkb")
    p.add_argument("--grid", type=parse_grid, default=None)
    p.add_argument("--lambda-max", type=_positive, default=1.0)
    p.add_argument("--press-method", choices=("refit", "leverage"), default="refit")
    p.add_argument("--hkb-convention", choices=("intercept", "original", "standardized"),
                   default="intercept")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("eqclass", help="ridge parameters sharing a coefficient length")
    common(p)
    p.add_argument("--length", type=_positive, required=True)
    p.add_argument("--space", choices=("original", "standardized"), default="original")
    p.add_argument("--lambda-max", type=_positive, default=1.0)
    p.add_argument("--scan-points", type=_count, default=10_000)
    p.add_argument("--search-beyond", action="store_true",
                   help="also search for members above --lambda-max")
    p.set_defaults(func=cmd_eqclass)

    p = sub.add_parser("diagnose", help="condition numbers and VIFs")
    common(p)
    p.add_argument("--grid", type=parse_grid, required=True)
    p.add_argument("--kind", choices=("ridge", "surrogate", "both"), default="both")
    p.add_argument("--bracket", type=float, nargs=2, default=[0.01, 0.05],
                   metavar=("LO", "HI"), help="bracket for the crossing search")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("simulate", help="Monte Carlo study of constrained estimators")
    common(p, data=False)
    p.add_argument("--k", type=_count, required=True)
    p.add_argument("--beta", type=_float_list, required=True)
    p.add_argument("--sigma", type=_positive, required=True)
    p.add_argument("--radius", type=_positive, required=True)
    p.add_argument("--replicates", type=_count, required=True)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--design", choices=("random", "file"), default="random")
    p.add_argument("--design-file", default=None)
    p.add_argument("--n", type=_count, default=30, help="rows of a random design")
    p.add_argument("--energy-sample", type=_count, default=200)
    p.add_argument("--permutations", type=_count, default=999)
    p.add_argument("--strict", action="store_true",
                   help="exit 3 when the mixing probability is exactly 0 or 1")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        doc = args.func(args)
    except RidgeAnatomyError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    sys.stdout.write(render(doc, args.format))
    return 0


if __name__ == "__main__":
    sys.exit(main())

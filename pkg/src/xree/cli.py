"""Command-line front end: analyze, sweep, and oracle cross-check.

State specifications are JSON documents with exactly one of three keys:

    {"params": {"lambda0": .., "lambda3": .., "lambda1": .., "lambda2": ..,
                "phi": .., "eta": ..}}
    {"filter": {"a": .., "b": .., "c": .., "d": ..}}
    {"matrix": [[[re, im], ...], ...]}        # 4x4, row-major

Angles are radians.  Reports go to stdout (or --out) and are
byte-identical across runs for identical inputs and seeds; wall-clock
and other diagnostics go to stderr.  Exit codes: 0 success, 2 parse or
validation error, 3 convergence or certification failure, 4 oracle gap
tripwire.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import replace

import numpy as np

from .closed_form import (
    relative_entropy_of_entanglement,
    solve_diagonal_min,
    solve_phi_half,
)
from .errors import (
    CertificationFailure,
    ConvergenceFailure,
    DegenerateParams,
    InvalidParams,
    NotEntangled,
    ParseError,
    StructureViolation,
    SupportDeficient,
    XreeError,
)
from .linalg import partial_transpose, spectrum
from .oracle import minimize_relative_entropy
from .stationarity import solve_general
from .witness import certify
from .xstate import (
    FilterNormalForm,
    XStateParams,
    canonicalize,
    concurrence,
    from_filter_normal_form,
    from_matrix,
    is_entangled,
    to_density,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_ORACLE_GAP = 4

_VALIDATION_ERRORS = (ParseError, InvalidParams, StructureViolation)
_SOLVER_ERRORS = (ConvergenceFailure, CertificationFailure, SupportDeficient,
                  NotEntangled, DegenerateParams)

SWEEPABLE = ("phi", "lambda1", "lambda2", "lambda0", "lambda3")


def _fmt(x: float) -> str:
    """Locale-independent decimal with enough digits to round-trip."""
    return format(float(x), ".17g")


def parse_state_spec(doc: dict) -> XStateParams:
    """Resolve a state-spec document to X-state parameters."""
    if not isinstance(doc, dict):
        raise ParseError("state spec must be a JSON object")
    shapes = [k for k in ("params", "filter", "matrix") if k in doc]
    if len(shapes) != 1:
        raise ParseError(
            f"state spec must contain exactly one of params/filter/matrix, got {shapes}")
    kind = shapes[0]
    body = doc[kind]
    if kind == "params":
        required = ("lambda0", "lambda3", "lambda1", "lambda2", "phi")
        missing = [k for k in required if k not in body]
        if missing:
            raise ParseError(f"params spec missing fields: {missing}")
        return XStateParams(
            lambda0=float(body["lambda0"]), lambda3=float(body["lambda3"]),
            lambda1=float(body["lambda1"]), lambda2=float(body["lambda2"]),
            phi=float(body["phi"]), eta=float(body.get("eta", 0.0)))
    if kind == "filter":
        missing = [k for k in ("a", "b", "c", "d") if k not in body]
        if missing:
            raise ParseError(f"filter spec missing fields: {missing}")
        return from_filter_normal_form(FilterNormalForm(
            a=float(body["a"]), b=float(body["b"]),
            c=float(body["c"]), d=float(body["d"])))
    try:
        entries = np.array([[complex(cell[0], cell[1]) for cell in row]
                            for row in body])
    except (TypeError, IndexError, ValueError) as exc:
        raise ParseError(f"matrix spec must be 4x4 of [re, im] pairs: {exc}") from exc
    if entries.shape != (4, 4):
        raise ParseError(f"matrix spec has shape {entries.shape}, expected (4, 4)")
    return from_matrix(entries)


def load_state_spec(path: str) -> XStateParams:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    return parse_state_spec(doc)


def _certificate_summary(cert) -> dict | None:
    if cert is None:
        return None
    return {
        "passed": cert.passed,
        "method": cert.method,
        "tr_a_sigma": cert.tr_a_sigma,
        "max_overlap_numeric": cert.max_overlap_numeric,
        "max_overlap_closed": cert.max_overlap_closed,
        "identity_gap": cert.identity_gap,
        "detail": cert.detail,
    }


def analyze_state(p: XStateParams, method: str = "auto", seed: int = 0,
                  with_oracle: bool = False, oracle_k: int = 8,
                  oracle_restarts: int = 64, jobs: int = 1) -> dict:
    """Full pipeline: canonicalize, classify, solve, certify, report."""
    canon, transform = canonicalize(p)
    rho_canon = to_density(canon)
    min_pt = float(spectrum(partial_transpose(rho_canon)).eigenvalues[-1])
    report = {
        "input": {
            "lambda0": p.lambda0, "lambda3": p.lambda3, "lambda1": p.lambda1,
            "lambda2": p.lambda2, "phi": p.phi, "eta": p.eta,
        },
        "canonical_params": {
            "lambda0": canon.lambda0, "lambda3": canon.lambda3,
            "lambda1": canon.lambda1, "lambda2": canon.lambda2,
            "phi": canon.phi, "eta": canon.eta,
        },
        "transform": {"phase": transform.phase, "relabeled": transform.relabeled},
        "concurrence": concurrence(canon),
        "entangled": is_entangled(canon),
        "min_pt_eigenvalue": min_pt,
        "seed": seed,
        "method_requested": method,
    }

    if method == "oracle":
        oracle = minimize_relative_entropy(rho_canon, k=oracle_k,
                                           restarts=oracle_restarts, seed=seed,
                                           processes=jobs)
        report.update({
            "e_r": oracle.value, "method": "oracle", "value_kind": "upper_bound",
            "certificate": None, "solution": None,
        })
    else:
        if method == "auto":
            e_r, solution = relative_entropy_of_entanglement(canon)
            cert = solution.certificate
        else:
            solver = {"closed": solve_phi_half, "newton": solve_diagonal_min,
                      "general": solve_general}[method]
            solution = solver(canon)
            e_r = solution.e_r
            cert = certify(rho_canon, solution)
        certified = cert is not None and cert.passed
        report.update({
            "e_r": e_r,
            "method": solution.method,
            "value_kind": "certified" if certified else "upper_bound",
            "certificate": _certificate_summary(cert),
            "solution": {
                "theta": solution.theta, "A1": solution.A1, "r1": solution.r1,
                "r2": solution.r2, "A2": solution.A2,
                "chi": [solution.chi0, solution.chi1, solution.chi2, solution.chi3],
            },
        })

    if with_oracle and method != "oracle":
        oracle = minimize_relative_entropy(rho_canon, k=oracle_k,
                                           restarts=oracle_restarts, seed=seed,
                                           processes=jobs)
        report["oracle"] = {
            "value": oracle.value,
            "gap": abs(oracle.value - report["e_r"]),
            "k": oracle_k, "restarts": oracle_restarts, "seed": seed,
        }
    else:
        report["oracle"] = None
    return report


def _emit(text: str, out_path: str | None):
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    started = time.monotonic()
    params = load_state_spec(args.spec)
    report = analyze_state(params, method=args.method, seed=args.seed,
                           with_oracle=args.oracle, oracle_k=args.oracle_k,
                           oracle_restarts=args.oracle_restarts, jobs=args.jobs)
    if args.tol is not None:
        report["tolerance_override"] = args.tol
    _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    print(f"elapsed_ms={int(1000 * (time.monotonic() - started))}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    started = time.monotonic()
    base = load_state_spec(args.spec)
    if args.param not in SWEEPABLE:
        raise ParseError(f"unknown sweep parameter {args.param}; pick from {SWEEPABLE}")
    values = np.linspace(args.start, args.stop, args.steps)
    header = [args.param, "concurrence", "e_r", "method", "certified"]
    if args.oracle:
        header.append("oracle_gap")
    header.append("status")

    rows = []
    for value in values:
        row = [_fmt(value)]
        try:
            point = replace(base, **{args.param: float(value)})
            report = analyze_state(point, method=args.method, seed=args.seed,
                                   with_oracle=args.oracle,
                                   oracle_k=args.oracle_k,
                                   oracle_restarts=args.oracle_restarts,
                                   jobs=args.jobs)
        except _VALIDATION_ERRORS:
            row += [""] * (len(header) - 2) + ["invalid"]
            rows.append(row)
            continue
        except _SOLVER_ERRORS as exc:
            row += [""] * (len(header) - 2) + [f"failed:{type(exc).__name__}"]
            rows.append(row)
            continue
        row += [_fmt(report["concurrence"]), _fmt(report["e_r"]),
                report["method"],
                str(report["value_kind"] == "certified").lower()]
        if args.oracle:
            row.append(_fmt(report["oracle"]["gap"]) if report["oracle"] else "")
        row.append("ok")
        rows.append(row)

    import io

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _emit(buffer.getvalue(), args.out)
    print(f"elapsed_ms={int(1000 * (time.monotonic() - started))}", file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args) -> int:
    started = time.monotonic()
    params = load_state_spec(args.spec)
    canon, _ = canonicalize(params)
    e_r, _solution = relative_entropy_of_entanglement(canon)
    oracle = minimize_relative_entropy(to_density(canon), k=args.k,
                                       restarts=args.restarts, seed=args.seed,
                                       processes=args.jobs)
    gap = abs(oracle.value - e_r)
    line = {
        "oracle": oracle.value, "certified": e_r, "gap": gap,
        "k": args.k, "restarts": args.restarts, "seed": args.seed,
    }
    _emit(json.dumps(line, sort_keys=True) + "\n", args.out)
    print(f"elapsed_ms={int(1000 * (time.monotonic() - started))}", file=sys.stderr)
    threshold = args.tol if args.tol is not None else 1e-3
    return EXIT_ORACLE_GAP if gap > threshold else EXIT_OK


def _add_common(parser):
    parser.add_argument("spec", help="path to a JSON state specification")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="write output here instead of stdout")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel processes for oracle restarts")
    parser.add_argument("--tol", type=float, default=None,
                        help="tolerance override (oracle gap threshold); recorded in reports")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xree",
        description="Relative entropy of entanglement for two-qubit X states")
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="full certified analysis of one state")
    _add_common(analyze)
    analyze.add_argument("--method", default="auto",
                         choices=("auto", "closed", "newton", "general", "oracle"))
    analyze.add_argument("--oracle", action="store_true",
                         help="append the independent oracle value and gap")
    analyze.add_argument("--oracle-k", type=int, default=8, dest="oracle_k")
    analyze.add_argument("--oracle-restarts", type=int, default=64,
                         dest="oracle_restarts")
    analyze.set_defaults(func=cmd_analyze)

    sweep = sub.add_parser("sweep", help="sweep one parameter, emit CSV")
    _add_common(sweep)
    sweep.add_argument("--param", required=True, choices=SWEEPABLE)
    sweep.add_argument("--from", type=float, required=True, dest="start")
    sweep.add_argument("--to", type=float, required=True, dest="stop")
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--method", default="auto",
                       choices=("auto", "closed", "newton", "general", "oracle"))
    sweep.add_argument("--oracle", action="store_true")
    sweep.add_argument("--oracle-k", type=int, default=8, dest="oracle_k")
    sweep.add_argument("--oracle-restarts", type=int, default=64,
                       dest="oracle_restarts")
    sweep.set_defaults(func=cmd_sweep)

    oracle = sub.add_parser("oracle", help="oracle vs certified value tripwire")
    _add_common(oracle)
    oracle.add_argument("--k", type=int, default=8)
    oracle.add_argument("--restarts", type=int, default=64)
    oracle.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except _SOLVER_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except XreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())

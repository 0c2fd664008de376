"""Command-line surface.

Subcommands expose construction (pmf), distances, bound verification, the
exact coefficient table, the Q polynomials and rate scans as machine
readable JSON or CSV on stdout.  Diagnostics go to stderr.  Every float is
emitted with 17 significant digits so output round-trips bit-exactly, and
identical invocations produce byte-identical output.

Exit codes: 0 success (and, for bounds, all checks hold), 2 input error,
3 domain error, 4 metric domain error, 5 insufficient data.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import binomial as _binomial
from . import bounds as _bounds
from .corrected import (
    CorrectionSpec,
    build_phi_nu,
    spec_phi2,
    spec_phi3,
    spec_poisson,
)
from .distances import d2, d2_exact_product, d2_tilde, hellinger, tv, wasserstein
from .pmf import (
    ProbVector,
    equal_probs,
    factorial_moments_sn,
    load_probs,
    poisson_binomial_pmf,
)

__all__ = ["main", "entrypoint"]


class CliInputError(Exception):
    """Unusable input: missing/garbled file, malformed flag values."""


class CliDomainError(Exception):
    """Mathematically invalid request (zero mean, probability above 1, ...)."""


class MetricDomainError(Exception):
    """Metric undefined for the requested measures."""


class InsufficientDataError(Exception):
    """Too few usable points to produce the requested summary."""


# ---------------------------------------------------------------------------
# deterministic serialization
# ---------------------------------------------------------------------------

def _plain(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _to_json(obj: Any) -> str:
    obj = _plain(obj)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        parts = [f"{json.dumps(str(k))}: {_to_json(v)}" for k, v in obj.items()]
        return "{" + ", ".join(parts) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_to_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _emit(obj: Any) -> None:
    sys.stdout.write(_to_json(obj) + "\n")


# ---------------------------------------------------------------------------
# shared input handling
# ---------------------------------------------------------------------------

def _add_input_flags(sub: argparse.ArgumentParser) -> None:
    grp = sub.add_mutually_exclusive_group(required=True)
    grp.add_argument("--probs", metavar="FILE",
                     help="probability file (one decimal per line, or a JSON array)")
    grp.add_argument("--binomial", nargs=2, metavar=("N", "LAMBDA"),
                     help="equal probabilities lambda/n repeated n times")


def _load_vector(args: argparse.Namespace) -> ProbVector:
    if args.probs is not None:
        try:
            return load_probs(args.probs)
        except OSError as exc:
            raise CliInputError(f"cannot read {args.probs}: {exc}") from exc
        except (ValueError, json.JSONDecodeError) as exc:
            raise CliInputError(str(exc)) from exc
    n_text, lam_text = args.binomial
    try:
        n = int(n_text)
        lam = float(lam_text)
    except ValueError as exc:
        raise CliInputError(f"--binomial expects an integer and a decimal: {exc}") from exc
    try:
        return equal_probs(n, lam)
    except ValueError as exc:
        raise CliDomainError(str(exc)) from exc


def _spec_for_order(p: ProbVector, order: int) -> CorrectionSpec:
    try:
        if order == 1:
            return spec_poisson(p.lam)
        if order == 2:
            return spec_phi2(p)
        if order == 3:
            return spec_phi3(p)
        if order >= 4:
            probs = set(p.probs)
            if len(probs) != 1:
                raise CliDomainError(
                    f"order {order} corrections exist in closed form only for equal "
                    "probabilities; supply --binomial")
            if order > 8:
                raise CliInputError("orders above 8 are not tabulated")
            return CorrectionSpec(order, p.lam, _binomial.gamma_floats(order, p.n),
                                  "binomial-closed-form")
    except ValueError as exc:
        raise CliDomainError(str(exc)) from exc
    raise CliInputError(f"unsupported order: {order}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_pmf(args: argparse.Namespace) -> int:
    p = _load_vector(args)
    if args.order == 0:
        pmf = poisson_binomial_pmf(p)
    else:
        spec = _spec_for_order(p, args.order)
        try:
            pmf = build_phi_nu(spec, args.kmax).pmf
        except ValueError as exc:
            raise CliDomainError(str(exc)) from exc
    payload = {
        "support_max": pmf.support_max,
        "mass": pmf.mass,
        "tail_bound": pmf.tail_bound,
        "label": pmf.label,
    }
    if args.format == "csv":
        sys.stdout.write("k,mass\n")
        for k, v in enumerate(pmf.mass):
            sys.stdout.write(f"{k},{_fmt_float(float(v))}\n")
    else:
        _emit(payload)
    return 0


def _cmd_distance(args: argparse.Namespace) -> int:
    p = _load_vector(args)
    if args.exact and args.metric != "d2":
        raise CliInputError("--exact applies only to --metric d2")
    if args.metric == "hellinger" and args.order >= 2:
        raise MetricDomainError(
            "Hellinger distance is undefined for signed corrected measures "
            f"(order {args.order})")
    spec = _spec_for_order(p, args.order)
    try:
        if args.metric in ("tv", "wass", "hellinger"):
            fn = poisson_binomial_pmf(p)
            phi = build_phi_nu(spec, args.kmax).pmf
            fun = {"tv": tv, "wass": wasserstein, "hellinger": hellinger}[args.metric]
            result = fun(fn, phi)
        elif args.metric == "d2":
            if args.exact:
                result = d2_exact_product(p, spec)
            else:
                result = d2(factorial_moments_sn(p), spec.moments())
        else:  # d2tilde
            result = d2_tilde(factorial_moments_sn(p), spec.moments())
    except ValueError as exc:
        raise CliDomainError(str(exc)) from exc
    payload = {
        "value": result.value,
        "truncation_error": result.truncation_error,
        "method": result.method,
        "note": result.note,
    }
    if args.format == "csv":
        sys.stdout.write("value,truncation_error,method\n")
        sys.stdout.write(f"{_fmt_float(result.value)},{_fmt_float(result.truncation_error)},"
                         f"{result.method}\n")
    else:
        _emit(payload)
    return 0


def _retolerated(reports: list[_bounds.BoundReport],
                 args: argparse.Namespace) -> list[_bounds.BoundReport]:
    if args.atol is None and args.rtol is None:
        return reports
    atol = args.atol if args.atol is not None else _bounds.ABS_TOL
    rtol = args.rtol if args.rtol is not None else _bounds.REL_TOL
    out = []
    for r in reports:
        tol = atol + rtol * max(abs(r.lhs), abs(r.rhs))
        out.append(dataclasses.replace(r, tolerance=tol, holds=r.lhs <= r.rhs + tol))
    return out


def _theta_reports(p: ProbVector, args: argparse.Namespace) -> list[_bounds.BoundReport]:
    explicit = [x is not None for x in (args.j, args.m, args.s)]
    inputs = {"probs": list(p.probs)}
    if any(explicit):
        if not all(explicit):
            raise CliInputError("--j, --m and --s must be given together")
        ps = _bounds.power_sums(p, args.m + args.s)
        value = _bounds.theta(args.j, args.m, args.s, ps)
        return [_bounds.BoundReport.make(
            f"theta[j={args.j},m={args.m},s={args.s}]", 0.0, value, inputs)]
    ps = _bounds.power_sums(p, 12)
    worst = math.inf
    at = None
    for m in range(0, 9):
        for j in range(0, m + 1):
            for s in range(1, 5):
                value = _bounds.theta(j, m, s, ps)
                if value < worst:
                    worst, at = value, (j, m, s)
    return [_bounds.BoundReport.make(
        f"theta-min[j={at[0]},m={at[1]},s={at[2]}]", 0.0, worst, inputs)]


def _cmd_bounds(args: argparse.Namespace) -> int:
    if args.check == "remark2":
        if args.lam is None:
            raise CliInputError("--check remark2 requires --lambda")
        grid = _parse_grid(args.n_grid) if args.n_grid else (10, 100, 1000, 10_000)
        try:
            fit = _bounds.check_simplified_order3(args.lam, grid)
        except ValueError as exc:
            raise CliInputError(str(exc)) from exc
        n_last = fit.grid[-1]
        scaled = n_last**2 * fit.distances[-1]
        limit = math.exp(-args.lam) * args.lam**4 / 8.0
        report = _bounds.BoundReport.make(
            "simplified-order3-limit-gap", abs(scaled - limit), 0.05 * limit,
            {"lambda": args.lam, "grid": list(grid)})
        reports = _retolerated([report], args)
        _emit({"fit": fit.to_json_dict(),
               "n2_scaled_last": scaled,
               "limit": limit,
               "reports": [r.to_json_dict() for r in reports],
               "all_hold": all(r.holds for r in reports)})
        return 0 if all(r.holds for r in reports) else 1

    p = _load_vector(args)
    try:
        if args.check == "theorem2":
            reports = _bounds.check_order2_bound(p)
        elif args.check == "theorem3":
            reports = _bounds.check_order3_bound(p)
        elif args.check == "sandwich":
            # one merged row per order: lhs/rhs are the two enclosing bounds
            # and holds means the exact moment sits between them
            detail = _bounds.check_sandwich(p, args.mmax)
            reports = [
                dataclasses.replace(
                    lo,
                    name=f"mu-sandwich[m={m}]",
                    rhs=up.rhs,
                    holds=lo.holds and up.holds,
                    slack=min(lo.slack, up.slack),
                    tolerance=max(lo.tolerance, up.tolerance),
                )
                for m, (lo, up) in enumerate(zip(detail[0::2], detail[1::2]), start=1)
            ]
        elif args.check == "lower3":
            reports = _bounds.check_lower3(p, args.mmax)
        elif args.check == "theta":
            reports = _theta_reports(p, args)
        else:  # classic
            reports = _bounds.check_classic_chain(p)
    except ValueError as exc:
        raise CliDomainError(str(exc)) from exc
    reports = _retolerated(reports, args)
    ok = all(r.holds for r in reports)
    if args.format == "csv":
        sys.stdout.write("name,lhs,rhs,holds,slack,tolerance,inputs_digest\n")
        for r in reports:
            sys.stdout.write(
                f"{r.name},{_fmt_float(r.lhs)},{_fmt_float(r.rhs)},"
                f"{str(r.holds).lower()},{_fmt_float(r.slack)},"
                f"{_fmt_float(r.tolerance)},{r.inputs_digest}\n")
    else:
        _emit({"reports": [r.to_json_dict() for r in reports], "all_hold": ok})
    return 0 if ok else 1


def _cmd_gamma_table(args: argparse.Namespace) -> int:
    if not 2 <= args.nu <= 8:
        raise CliInputError("--nu must be between 2 and 8")
    table = _binomial.solve_gamma_table(args.nu)
    payload = table.to_json_dict()
    if args.compare_paper:
        payload["comparison"] = {
            "mismatches": _binomial.compare_with_published(args.nu),
        }
    _emit(payload)
    return 0


def _cmd_qpoly(args: argparse.Namespace) -> int:
    if not 0 <= args.nu <= 10:
        raise CliInputError("--nu must be between 0 and 10")
    q = _binomial.q_polynomial(args.nu)
    payload: dict[str, Any] = {
        "nu": args.nu,
        "coefficients": [str(c) for c in q.coeffs],
    }
    if args.lam is not None:
        if args.lam <= 0:
            raise CliDomainError("--lambda must be positive")
        payload["c_order"] = args.nu + 1
        payload["c_value"] = _binomial.c_constant(args.nu + 1, args.lam)
    _emit(payload)
    return 0


def _parse_grid(text: str) -> tuple[int, ...]:
    try:
        grid = tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise CliInputError(f"--n-grid expects comma-separated integers: {exc}") from exc
    if not grid:
        raise CliInputError("--n-grid must not be empty")
    return grid


def _parse_orders(text: str) -> tuple[int | str, ...]:
    orders: list[int | str] = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok == "3t":
            orders.append("3t")
        else:
            try:
                orders.append(int(tok))
            except ValueError as exc:
                raise CliInputError(f"--orders expects integers or 3t: {tok!r}") from exc
    return tuple(orders)


def _cmd_scan(args: argparse.Namespace) -> int:
    if args.lam <= 0:
        raise CliDomainError("--lambda must be positive")
    grid = _parse_grid(args.n_grid)
    orders = _parse_orders(args.orders)
    rows = []
    fits = []
    for order in orders:
        distances = []
        for n in grid:
            try:
                dist = _bounds.rate_distance(order, n, args.lam, args.metric)
            except ValueError as exc:
                raise CliDomainError(str(exc)) from exc
            bound = ""
            if isinstance(order, int):
                bound = _fmt_float(_binomial.c_constant(order, args.lam) / n**order)
            distances.append(dist)
            rows.append((n, order, dist, bound))
        try:
            fits.append(_bounds.fit_loglog(grid, distances, order))
        except ValueError as exc:
            raise InsufficientDataError(str(exc)) from exc
    sys.stdout.write("n,order,distance,bound\n")
    for n, order, dist, bound in rows:
        sys.stdout.write(f"{n},{order},{_fmt_float(dist)},{bound}\n")
    _emit({"fits": [f.to_json_dict() for f in fits]})
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrpois",
        description="Corrected Poisson approximations for sums of independent "
                    "indicators: construction, distances, and bound checks.")
    subs = parser.add_subparsers(dest="command", required=True)

    sp = subs.add_parser("pmf", help="emit exact or corrected mass functions")
    _add_input_flags(sp)
    sp.add_argument("--order", type=int, default=1,
                    help="correction order (0 = exact distribution of the sum)")
    sp.add_argument("--kmax", type=int, default=None, help="support cutoff (default auto)")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=_cmd_pmf)

    sp = subs.add_parser("distance", help="distance between the exact sum and a "
                                          "corrected measure")
    _add_input_flags(sp)
    sp.add_argument("--metric", required=True,
                    choices=("tv", "d2", "d2tilde", "wass", "hellinger"))
    sp.add_argument("--order", type=int, default=1)
    sp.add_argument("--exact", action="store_true",
                    help="use the closed product form (d2 only)")
    sp.add_argument("--kmax", type=int, default=None)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=_cmd_distance)

    sp = subs.add_parser("bounds", help="verify inequalities and report slack")
    grp = sp.add_mutually_exclusive_group(required=False)
    grp.add_argument("--probs", metavar="FILE")
    grp.add_argument("--binomial", nargs=2, metavar=("N", "LAMBDA"))
    sp.add_argument("--check", required=True,
                    choices=("theorem2", "theorem3", "sandwich", "lower3", "theta",
                             "remark2", "classic"))
    sp.add_argument("--mmax", type=int, default=15)
    sp.add_argument("--lambda", dest="lam", type=float, default=None,
                    help="mean for --check remark2")
    sp.add_argument("--n-grid", default=None, help="comma-separated sizes for remark2")
    sp.add_argument("--j", type=int, default=None)
    sp.add_argument("--m", type=int, default=None)
    sp.add_argument("--s", type=int, default=None)
    sp.add_argument("--seed", type=int, default=0,
                    help="recorded in digests for reproducibility")
    sp.add_argument("--atol", type=float, default=None)
    sp.add_argument("--rtol", type=float, default=None)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=_cmd_bounds_guard)

    sp = subs.add_parser("gamma-table", help="exact correction coefficients for the "
                                             "equal-probability case")
    sp.add_argument("--nu", type=int, required=True)
    sp.add_argument("--compare-paper", action="store_true",
                    help="diff against the published coefficient listing")
    sp.set_defaults(func=_cmd_gamma_table)

    sp = subs.add_parser("qpoly", help="exact Q polynomial coefficients")
    sp.add_argument("--nu", type=int, required=True)
    sp.add_argument("--lambda", dest="lam", type=float, default=None,
                    help="also evaluate the distance constant of order nu+1")
    sp.set_defaults(func=_cmd_qpoly)

    sp = subs.add_parser("scan", help="distance-versus-n scan with rate fits")
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--n-grid", required=True)
    sp.add_argument("--orders", required=True,
                    help="comma-separated correction orders (integers or 3t)")
    sp.add_argument("--metric", choices=("tv", "d2"), default="d2")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=_cmd_scan)

    return parser


def _cmd_bounds_guard(args: argparse.Namespace) -> int:
    if args.check != "remark2" and args.probs is None and args.binomial is None:
        raise CliInputError(f"--check {args.check} requires --probs or --binomial")
    return _cmd_bounds(args)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CliDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except MetricDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


def entrypoint() -> None:
    raise SystemExit(main())

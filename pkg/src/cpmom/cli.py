"""Command-line front door.

Subcommands run the estimators, exact evaluations, asymptotic coefficients,
polynomial fits, arithmetic predictions, and the cross-validation suite.
Reports are JSON (default) or CSV and always embed the full run
configuration so any run can be reproduced from its own output.

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 convergence
diagnostic failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .core import Family, GroupSpec, MomOrder, NumericFailure, leading_exponent
from .asymptotics import OscillatoryQuadratureConfig, gamma_coefficient, leading_fit
from .autocorr import autocorrelation, mom_exact, weyl_oracle_mom
from .lfunctions import predicted_mom
from .montecarlo import mom_estimate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_CONVERGENCE = 3

DEFAULT_SEED = 12345


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("error: %s\n" % message)
        raise SystemExit(EXIT_USAGE)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _n_range(text):
    lo, _, hi = text.partition(":")
    lo, hi = int(lo), int(hi)
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError("expected LO:HI with 1 <= LO <= HI")
    return (lo, hi)


def _group(args) -> GroupSpec:
    return GroupSpec(Family(args.group), args.n)


def _order(args) -> MomOrder:
    return MomOrder(args.k, args.beta)


def build_parser() -> _Parser:
    parser = _Parser(prog="mom", description=__doc__)
    parser.add_argument("--version", action="version", version="cpmom " + __version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, group=True, n=True):
        if group:
            p.add_argument("--group", choices=["sp", "so"], required=True)
        if n:
            p.add_argument("--n", type=_positive_int, required=True, help="half dimension N")
        p.add_argument("--k", type=_positive_int, default=1)
        p.add_argument("--beta", type=_positive_int, default=1)
        p.add_argument("--output", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("mc", help="Monte Carlo moment estimate")
    common(p)
    p.add_argument("--samples", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--antithetic", action="store_true")

    p = sub.add_parser("exact", help="exact moment by residue computation")
    common(p)
    p.add_argument("--theta-grid", type=_positive_int, default=None)
    p.add_argument("--allow-large", action="store_true")
    p.add_argument("--precision", choices=["auto", "double", "extended"], default="auto")

    p = sub.add_parser("gamma", help="asymptotic leading coefficient")
    common(p, n=False)
    p.add_argument("--nodes", type=_positive_int, default=64)
    p.add_argument("--radius", type=float, default=0.25)
    p.add_argument("--doubling-rtol", type=float, default=5e-3)
    p.add_argument("--no-doubling-check", action="store_true")

    p = sub.add_parser("fit", help="leading coefficient from exact values")
    common(p, n=False)
    p.add_argument("--n-range", type=_n_range, required=True, metavar="LO:HI")
    p.add_argument("--allow-large", action="store_true")

    p = sub.add_parser("predict", help="arithmetic family moment prediction")
    common(p, n=False)
    p.add_argument("--dmax", type=float, required=True, help="discriminant bound D")
    p.add_argument("--prime-cutoff", type=_positive_int, default=1000)
    p.add_argument("--gamma-value", type=float, default=None,
                   help="reuse a known leading coefficient instead of integrating")
    p.add_argument("--nodes", type=_positive_int, default=64)

    p = sub.add_parser("validate", help="cross-validation suite")
    p.add_argument("--quick", action="store_true", help="skip the slower checks")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--output", default="-")
    p.add_argument("--format", choices=["json", "csv"], default="json")

    return parser


def _emit(args, payload, csv_rows=None, csv_header=None):
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(csv_header)
        writer.writerows(csv_rows)
        text = buf.getvalue()
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)


def _config_block(args, skip=("output", "format", "command", "func")):
    return {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in skip and not callable(value)
    }


def cmd_mc(args) -> int:
    est = mom_estimate(
        _group(args),
        _order(args),
        num_samples=args.samples,
        seed=args.seed,
        num_workers=args.threads,
        antithetic=args.antithetic,
    )
    payload = {
        "command": "mc",
        "config": _config_block(args),
        "mean": est.mean,
        "std_error": est.std_error,
        "n": est.num_samples,
        "seed": args.seed,
    }
    rows = [[args.group, args.n, args.k, args.beta, est.mean, est.std_error, est.num_samples]]
    _emit(args, payload, rows, ["group", "N", "k", "beta", "mean", "std_error", "samples"])
    return EXIT_OK


def cmd_exact(args) -> int:
    value = mom_exact(
        _group(args),
        _order(args),
        theta_grid_size=args.theta_grid,
        allow_large=args.allow_large,
        precision=args.precision,
    )
    payload = {"command": "exact", "config": _config_block(args), "value": value}
    rows = [[args.group, args.n, args.k, args.beta, value]]
    _emit(args, payload, rows, ["group", "N", "k", "beta", "value"])
    return EXIT_OK


def cmd_gamma(args) -> int:
    value = gamma_coefficient(
        Family(args.group),
        _order(args),
        radius=args.radius,
        n_nodes=args.nodes,
        check_doubling=not args.no_doubling_check,
        doubling_rtol=args.doubling_rtol,
    )
    payload = {"command": "gamma", "config": _config_block(args), "value": value}
    rows = [[args.group, args.k, args.beta, value]]
    _emit(args, payload, rows, ["group", "k", "beta", "gamma"])
    return EXIT_OK


def cmd_fit(args) -> int:
    family = Family(args.group)
    order = _order(args)
    degree = leading_exponent(family, order)
    lo, hi = args.n_range
    if hi - lo < degree + 1:
        raise NumericFailure(
            "fit needs at least %d consecutive N values for degree %d"
            % (degree + 2, degree)
        )
    values = [
        (N, mom_exact(GroupSpec(family, N), order, allow_large=args.allow_large))
        for N in range(lo, hi + 1)
    ]
    coeff, residual = leading_fit(values, degree)
    payload = {
        "command": "fit",
        "config": _config_block(args),
        "degree": degree,
        "coefficient": coeff,
        "residual": residual,
        "values": values,
    }
    rows = [[args.group, args.k, args.beta, degree, coeff, residual]]
    _emit(args, payload, rows, ["group", "k", "beta", "degree", "coefficient", "residual"])
    return EXIT_OK


def cmd_predict(args) -> int:
    family = Family(args.group)
    order = _order(args)
    if args.gamma_value is not None:
        gamma = args.gamma_value
    else:
        gamma = gamma_coefficient(family, order, n_nodes=args.nodes)
    value = predicted_mom(family, order, args.dmax, gamma, prime_cutoff=args.prime_cutoff)
    payload = {
        "command": "predict",
        "config": _config_block(args),
        "gamma": gamma,
        "prediction": value,
    }
    rows = [[args.group, args.k, args.beta, args.dmax, gamma, value]]
    _emit(args, payload, rows, ["group", "k", "beta", "D", "gamma", "prediction"])
    return EXIT_OK


def _validate_checks(quick: bool, seed: int):
    """Yield (name, kind, passed, detail) rows; kind is 'numeric' or
    'convergence' and controls the failure exit code."""
    sp1 = GroupSpec(Family.SYMPLECTIC, 1)
    so1 = GroupSpec(Family.EVEN_ORTHOGONAL, 1)
    o11 = MomOrder(1, 1)

    # exact anchor 2(N+1)
    worst = 0.0
    for N in range(1, 7):
        value = mom_exact(GroupSpec(Family.EVEN_ORTHOGONAL, N), o11)
        worst = max(worst, abs(value - 2.0 * (N + 1)) / (2.0 * (N + 1)))
    yield ("orthogonal anchor 2(N+1), N=1..6", "numeric", worst < 1e-8, "%.2e" % worst)

    # closed-form autocorrelations at N=1
    theta = 0.83
    a_sp = autocorrelation(sp1, o11, (theta,))
    a_so = autocorrelation(so1, o11, (theta,))
    d1 = abs(a_sp - (3.0 + 2.0 * np.cos(2 * theta)))
    d2 = abs(a_so - (4.0 + 2.0 * np.cos(2 * theta)))
    yield ("closed-form autocorrelation values", "numeric", max(d1, d2) < 1e-8,
           "%.2e" % max(d1, d2))

    # quadrature oracle agreement
    pairs = [(Family.SYMPLECTIC, 1, 1), (Family.EVEN_ORTHOGONAL, 1, 1)]
    if not quick:
        pairs += [(Family.SYMPLECTIC, 2, 1), (Family.SYMPLECTIC, 1, 2),
                  (Family.EVEN_ORTHOGONAL, 2, 1), (Family.EVEN_ORTHOGONAL, 1, 2)]
    worst = 0.0
    for fam, k, b in pairs:
        spec, order = GroupSpec(fam, 1), MomOrder(k, b)
        exact = mom_exact(spec, order)
        oracle = weyl_oracle_mom(spec, order)
        worst = max(worst, abs(exact - oracle) / abs(oracle))
    yield ("residue engine vs quadrature oracle", "numeric", worst < 1e-6, "%.2e" % worst)

    # Monte Carlo consistency (single seed)
    est = mom_estimate(sp1, o11, num_samples=20000, seed=seed)
    exact = mom_exact(sp1, o11)
    pull = abs(est.mean - exact) / est.std_error
    yield ("Monte Carlo within 3 standard errors", "numeric", pull < 3.0, "pull %.2f" % pull)

    # theta-grid doubling stability
    base = mom_exact(sp1, o11)
    fine = mom_exact(sp1, o11, theta_grid_size=2 * (8 * 1 * 1 + 2))
    drift = abs(fine - base) / abs(base)
    yield ("theta-grid node doubling", "convergence", drift < 1e-10, "%.2e" % drift)

    # t-quadrature node doubling for the nested two-shift integral
    if not quick:
        from .asymptotics import (
            ConfigurationVector,
            OscillatoryQuadratureConfig,
            VPoint,
            psi_integral,
        )

        v = VPoint(tuple(0.25 * np.exp(1j * np.array([0.3, 1.1, 2.7, 4.0]))))
        order21 = MomOrder(2, 1)
        l21 = ConfigurationVector((1, 1))
        coarse = psi_integral(v, order21, l21,
                              cfg=OscillatoryQuadratureConfig(t_nodes=150))
        fine = psi_integral(v, order21, l21,
                            cfg=OscillatoryQuadratureConfig(t_nodes=300))
        drift = abs(fine - coarse) / abs(fine)
        yield ("t-quadrature node doubling", "convergence", drift < 5e-3,
               "%.2e" % drift)

    # gamma cross-validation (slow)
    if not quick:
        order = o11
        values = [(N, mom_exact(GroupSpec(Family.SYMPLECTIC, N), order)) for N in range(1, 5)]
        coeff, _ = leading_fit(values, leading_exponent(Family.SYMPLECTIC, order))
        try:
            gamma = gamma_coefficient(Family.SYMPLECTIC, order)
            rel = abs(gamma - coeff) / abs(coeff)
            yield ("gamma integral vs finite-difference fit", "convergence",
                   rel < 1e-3, "%.2e" % rel)
        except NumericFailure as exc:
            yield ("gamma integral vs finite-difference fit", "convergence",
                   False, str(exc))


def cmd_validate(args) -> int:
    rows = list(_validate_checks(args.quick, args.seed))
    payload = {
        "command": "validate",
        "config": _config_block(args),
        "checks": [
            {"name": name, "kind": kind, "passed": bool(passed), "detail": detail}
            for name, kind, passed, detail in rows
        ],
        "passed": bool(all(passed for _, _, passed, _ in rows)),
    }
    table = [[name, kind, "pass" if passed else "FAIL", detail]
             for name, kind, passed, detail in rows]
    _emit(args, payload, table, ["check", "kind", "status", "detail"])
    failed = [kind for _, kind, passed, _ in rows if not passed]
    if not failed:
        return EXIT_OK
    return EXIT_CONVERGENCE if all(k == "convergence" for k in failed) else EXIT_NUMERIC


_DISPATCH = {
    "mc": cmd_mc,
    "exact": cmd_exact,
    "gamma": cmd_gamma,
    "fit": cmd_fit,
    "predict": cmd_predict,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_USAGE
    try:
        return _DISPATCH[args.command](args)
    except NumericFailure as exc:
        sys.stderr.write("numeric failure: %s\n" % exc)
        return EXIT_NUMERIC
    except ValueError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

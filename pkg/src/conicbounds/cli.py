"""Command-line front end.

Exit codes: 0 success, 1 bound violation or failed self-test, 2 invalid
configuration or parameters, 3 numerical failure.
"""
import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from . import bounds as _bounds
from . import config as _config
from . import radial as _radial
from .exceptions import ConfigError, DomainError, NumericalError
from .geometry import HALF_PI, CapSpec, _log_omega
from .instances import HyperplaneArrangement
from .montecarlo import estimate_ln_cond, sweep, validate_bound
from .samplers import RngHandle
from .tables import write_csv, write_validation_rows

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

ESTIMATE_COLUMNS = ["instance_id", "measure_kind", "nu", "center_id", "cond_center",
                    "mean", "stderr", "n", "censored", "p99", "reliable"]


def _ext(text):
    """Parse a float that may be 'inf'."""
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def _emit_json(obj, stream=None):
    stream = stream or sys.stdout
    json.dump(obj, stream, indent=2, sort_keys=False)
    stream.write("\n")


# ---------------------------------------------------------------- bound

def cmd_bound(args):
    fn, names = _bounds.BOUNDS[args.name]
    given = {"N": args.N, "d": args.d, "theta": args.theta, "sigma": args.sigma,
             "rho": args.rho, "cond_center": args.cond_center}
    params = {k: given[k] for k in names}
    missing = [k for k, v in params.items() if v is None]
    if missing:
        raise ConfigError(f"bound {args.name!r} needs " +
                          ", ".join("--" + m.replace("_", "-") for m in missing))
    value = fn(*(params[k] for k in names))
    _emit_json({"bound": args.name, "params": {k: _jsonable(v) for k, v in params.items()},
                "value": _jsonable(float(value))})
    return EXIT_OK


# ---------------------------------------------------------------- density

def cmd_density(args):
    if args.grid_size < 129:
        raise ConfigError(f"--grid-size must be at least 129, got {args.grid_size}")
    prof = _radial.build_profile(args.N, args.sigma, grid_size=args.grid_size)
    rows = [{"theta": float(t), "G": float(g), "G_prime": float(gp), "f": float(f), "cdf": float(c)}
            for t, g, gp, f, c in zip(prof.theta_grid, prof.g_values, prof.g_prime_values,
                                      prof.f_values, prof.cdf)]
    write_csv(args.output, rows, ["theta", "G", "G_prime", "f", "cdf"])
    _emit_json({"N": prof.N, "sigma": prof.sigma, "grid_points": int(prof.theta_grid.size),
                "raw_mass": prof.raw_mass, "mass_error": abs(prof.raw_mass - 1.0),
                "cdf_last": float(prof.cdf[-1])}, sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- config runs

def _load_config(args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    for key in ("output", "summary", "seed", "stream", "workers", "n"):
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    return config


def _cell_objects(cell):
    instance, instance_id = _config.build_instance(cell["instance"])
    center, center_id = _config.build_center(instance, cell["center"])
    return instance, instance_id, center, center_id


def _cell_rng(cell, index):
    return RngHandle(cell["seed"], cell["stream"]).spawn(index)


def _finish(command, config, cells, rows, verdicts):
    counts = {v: verdicts.count(v) for v in ("pass", "violation", "unreliable")}
    first = cells[0]
    summary = {
        "command": command,
        "rows": len(rows),
        **counts,
        "reproducibility": {"seed": first["seed"], "stream": first["stream"],
                            "workers": first["workers"], "version": __version__},
    }
    output = config.get("output")
    target = config.get("summary")
    if target:
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            _emit_json(summary, fh)
    else:
        _emit_json(summary, sys.stdout if output not in (None, "-") else sys.stderr)
    return EXIT_VIOLATION if counts["violation"] else EXIT_OK


def cmd_validate(args):
    config = _load_config(args)
    cells = _config.expand_cells(config)
    rows = []
    for i, cell in enumerate(cells):
        instance, iid, center, cid = _cell_objects(cell)
        measure = _config.build_measure(center, cell["measure"])
        rows.append(validate_bound(instance, center, measure, cell["bound"], cell["n"],
                                   _cell_rng(cell, i), cell["workers"], iid, cid,
                                   cell["bound_offset"]))
    write_validation_rows(config.get("output"), rows)
    return _finish("validate", config, cells, rows, [r.verdict for r in rows])


def cmd_sweep(args):
    config = _load_config(args)
    cells = _config.expand_cells(config)
    rows = []
    for i, cell in enumerate(cells):
        if "grid" not in cell:
            raise ConfigError("sweep configs need a 'grid' of theta or sigma values")
        instance, iid, center, cid = _cell_objects(cell)
        kind = cell["measure"]["kind"]
        rows.extend(sweep(instance, center, cell["grid"], cell["bound"], cell["n"],
                          _cell_rng(cell, i), cell["workers"], measure_kind=kind,
                          instance_id=iid, center_id=cid, bound_offset=cell["bound_offset"]))
    write_validation_rows(config.get("output"), rows)
    return _finish("sweep", config, cells, rows, [r.verdict for r in rows])


def cmd_estimate(args):
    config = _load_config(args)
    cells = _config.expand_cells(config, need_bound=False)
    rows = []
    for i, cell in enumerate(cells):
        instance, iid, center, cid = _cell_objects(cell)
        measure = _config.build_measure(center, cell["measure"])
        kind, nu = _config.measure_nu(cell["measure"])
        est = estimate_ln_cond(instance, measure, cell["n"], _cell_rng(cell, i), cell["workers"])
        rows.append({"instance_id": iid, "measure_kind": kind, "nu": nu, "center_id": cid,
                     "cond_center": float(instance.cond(center)), "mean": est.mean,
                     "stderr": est.stderr, "n": est.n, "censored": est.censored,
                     "p99": est.p99, "reliable": est.reliable})
    write_csv(config.get("output"), rows, ESTIMATE_COLUMNS)
    verdicts = ["pass" if r["reliable"] else "unreliable" for r in rows]
    return _finish("estimate", config, cells, rows, verdicts)


# ---------------------------------------------------------------- selftest

_PROFILE_CASES = [(2, 0.3), (5, 3.0), (6, 1.0), (10, 0.05), (20, 100.0)]


def _check_density_mass(inject):
    g_prime = None
    if inject == "g_prime_sign":
        def g_prime(theta, N, sigma):
            return -_radial.eval_G_prime(theta, N, sigma)
    worst = 0.0
    for N, sigma in _PROFILE_CASES:
        try:
            prof = _radial.build_profile(N, sigma, g_prime=g_prime)
        except NumericalError as exc:
            return False, f"N={N} sigma={sigma}: {exc}"
        err = abs(prof.raw_mass - 1.0)
        worst = max(worst, err, abs(prof.cdf[-1] - 1.0))
        if err > _radial.MASS_TOL:
            return False, f"N={N} sigma={sigma}: mass {prof.raw_mass}"
    return True, f"max mass error {worst:.3g}"


def _check_half_sphere():
    worst = 0.0
    for N, sigma in _PROFILE_CASES:
        log_h = _radial.log_G(HALF_PI, N, sigma) + _log_omega(N) - math.log(2.0)
        worst = max(worst, abs(math.expm1(log_h + 0.5 / sigma**2)))
    return worst <= 1e-8, f"max relative error {worst:.3g}"


def _check_phi_anchors():
    for N, d in [(1, 1), (6, 2), (10, 3)]:
        for cc in [1.0, 4.0, 1e6, math.inf]:
            # at C = inf the exponent is 0 and phi is constant in rho > 0
            if math.isfinite(cc) and _bounds.phi(0.0, N, d, cc) != 1.0:
                return False, f"phi(0) != 1 at N={N} d={d} C={cc}"
            if abs(_bounds.phi(1.0, N, d, cc) - (2 * N * d - 1)) > 1e-12:
                return False, f"phi(1) != 2Nd-1 at N={N} d={d} C={cc}"
    return True, "phi(0) = 1, phi(1) = 2Nd - 1"


def _check_c_helper():
    worst = 0.0
    for N in range(2, 41):
        for sigma in np.logspace(-3, 3, 25):
            worst = max(worst, _bounds.c_helper(N, float(sigma)))
    return worst < math.sqrt(0.5), f"max c = {worst:.6f}"


def _check_gamma():
    worst = max(_radial.gamma_coefficient(N) for N in range(5, 61))
    return worst <= 1.0, f"max coefficient {worst:.6f}"


def _check_limits():
    K, KB = _bounds.K, _bounds.K_BAR
    ln12 = math.log(12.0)
    errs = {
        "smooth_large_sigma": abs(_bounds.smooth_gaussian_H(6, 2, 1e6) - ln12 - K),
        "local_large_sigma": max(abs(_bounds.local_gaussian_H(6, 2, 1e6, c) - ln12 - KB) for c in (2, 10, 1e4)),
        "half_sphere_ill_posed": abs(_bounds.local_uniform_H(6, 2, HALF_PI, math.inf)
                    - (math.log(23) + ln12 + 2.0)),
        # the sigma -> 0 limit converges linearly in sigma * C; probe it far out
        "local_small_sigma": max(abs(_bounds.local_gaussian_H(6, 2, 1e-10, c) - math.log(c) - KB)
                   for c in (2, 10, 1e4)),
    }
    tol = {"smooth_large_sigma": 1e-3, "local_large_sigma": 1e-3, "half_sphere_ill_posed": 1e-12, "local_small_sigma": 1e-2}
    bad = [k for k in errs if errs[k] > tol[k]]
    detail = ", ".join(f"{k} {v:.2g}" for k, v in errs.items())
    return not bad, detail


def _check_mass_bounds():
    prof = _radial.build_profile(6, 1.0)
    for t in (0.1, 0.4, 0.25 * math.pi):
        if not _radial.check_head_mass(prof, t)[2]:
            return False, f"head mass at t={t}"
        if not _radial.check_tail_mass(prof, t)[2]:
            return False, f"tail mass at t={t}"
        if not _radial.check_log_split(prof, t)[2]:
            return False, f"log split at t={t}"
    if not _radial.check_log_expectation(prof)[2]:
        return False, "log expectation"
    return True, "head, tail, split and log-expectation bounds hold at N=6 sigma=1"


def _check_bound_harness(inject):
    inst = HyperplaneArrangement.coordinate(6, 2)
    center = inst.center_at_condition(4.0)
    offset = -10.0 if inject == "bound" else 0.0
    row = validate_bound(inst, center, CapSpec(center, 0.3), "local_uniform", 2000,
                         RngHandle(0), bound_offset=offset)
    return row.verdict == "pass", f"verdict {row.verdict}, margin {row.margin:.3f}"


def run_selftest(inject=None):
    checks = [
        ("density_mass", lambda: _check_density_mass(inject)),
        ("half_sphere_identity", _check_half_sphere),
        ("phi_anchors", _check_phi_anchors),
        ("c_helper_bound", _check_c_helper),
        ("gamma_inequality", _check_gamma),
        ("limit_suite", _check_limits),
        ("mass_bounds", _check_mass_bounds),
        ("bound_harness", lambda: _check_bound_harness(inject)),
    ]
    report = []
    for name, fn in checks:
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash counts as a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        report.append({"check": name, "ok": bool(ok), "detail": detail,
                       "seconds": round(time.perf_counter() - start, 3)})
    return report


def cmd_selftest(args):
    report = run_selftest(args.inject)
    failed = [r["check"] for r in report if not r["ok"]]
    if args.json:
        _emit_json({"ok": not failed, "failed": failed, "checks": report,
                    "version": __version__})
    else:
        for r in report:
            print(f"{'PASS' if r['ok'] else 'FAIL'}  {r['check']:<22} {r['detail']}")
        if failed:
            print("failed checks: " + ", ".join(failed), file=sys.stderr)
    return EXIT_VIOLATION if failed else EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="conicbounds",
        description="Evaluate and Monte Carlo-validate bounds on E ln C(x) for conic condition numbers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="evaluate a closed-form bound and print JSON")
    p.add_argument("--name", required=True, choices=sorted(_bounds.BOUNDS))
    p.add_argument("--N", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--sigma", type=_ext)
    p.add_argument("--rho", type=float)
    p.add_argument("--cond-center", type=_ext, help="condition of the center; 'inf' allowed")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("density", help="tabulate G, G', f and the CDF as CSV")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--grid-size", type=int, default=257)
    p.add_argument("--output", default="-")
    p.set_defaults(func=cmd_density)

    for name, func, text in [("estimate", cmd_estimate, "Monte Carlo estimates of E ln C"),
                             ("validate", cmd_validate, "compare estimates with a bound"),
                             ("sweep", cmd_sweep, "validate along a theta or sigma grid")]:
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="JSON config file")
        p.add_argument("--output", help="CSV path ('-' for stdout); overrides the config")
        p.add_argument("--summary", help="summary JSON path; overrides the config")
        p.add_argument("--seed", type=int)
        p.add_argument("--stream", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--n", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("selftest", help="fast invariant suite")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.add_argument("--inject", choices=["g_prime_sign", "bound"],
                   help="plant a fault to check that it is detected")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("schema", help="print the config JSON schema")
    p.set_defaults(func=lambda args: (_emit_json(_config.CONFIG_SCHEMA), EXIT_OK)[1])
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, DomainError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Verify extended translational shape-invariant superpotentials.

Commands:
  identity  exact polynomial certificates of the compatibility identity
  check     compatibility, shape-invariance and ODE residuals on a grid
  spectrum  bound-state spectra of extended and classical partner potentials
  gauge     compatibility residual under a polynomial gauge g(x)

Examples:
  shapeinv.py identity --family ro --l-range 1..8 --g 2,5/2,3,7/2
  shapeinv.py check --family trig-dpt-contl --g 3 --h 4 --l 1.5
  shapeinv.py spectrum --family ro --g 3 --l 1 --k 5
  shapeinv.py gauge --family ro --g 3 --l 1 --gauge "x^2"

Exit codes:
  0 - All checks passed
  1 - Usage, domain or parameter error
  2 - A verification check failed
  3 - Hypergeometric series did not converge
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional

import numpy as np

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from lib.errors import ConfigError, SeriesNonConvergence, ShapeInvError
from lib.families import (
    BRANCHES,
    POLYNOMIAL_FAMILIES,
    Family,
    Params,
    check_shift_orientation,
    hyp_h_floor,
    make_grid,
    make_params,
    standard_grid,
)
from lib.load_config import get_config, load_config, require_config, setting
from lib.rational_poly import parse_rational
from lib.report import atomic_write_text, csv_text, dumps, envelope, text_table
from lib.specfun import SeriesConfig
from lib.spectral import POTENTIAL_COLUMNS, Grid, default_grid, isospectrality_report, potential_table
from lib.verify import (
    FORMS,
    GaugeSpec,
    cc_residual,
    cc_residual_exact,
    certify_symbolic,
    compatibility_expression,
    equivalence_probe,
    gauge_ok,
    gauge_transform,
    ode_residual,
    reduced_residual,
    si_residual,
)

logger = logging.getLogger("shapeinv")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2
EXIT_SERIES = 3


class UsageError(ShapeInvError):
    """Invalid combination of command-line options."""


class ArgParser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1 (2 means a failed check)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"Error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


@dataclass
class RunConfig:
    command: str
    family: Family
    params: List[Params]
    grid: Optional[str]
    tolerances: dict
    out: Optional[str]
    fmt: str
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "command": self.command,
            "family": self.family.slug,
            "params": [p.to_dict() for p in self.params],
            "grid": self.grid,
            "tolerances": self.tolerances,
            "format": self.fmt,
        }
        out.update(self.extra)
        return out


# ── Argument helpers ────────────────────────────────────────────────


def split_list(text: Optional[str]) -> List[str]:
    return [t.strip() for t in text.split(",") if t.strip()] if text else []


def parse_l_range(text: str) -> List[int]:
    try:
        lo, hi = (parse_rational(v) for v in text.split(".."))
    except ValueError:
        raise UsageError(f"Invalid --l-range {text!r} (expected A..B)")
    if lo.denominator != 1 or hi.denominator != 1 or lo > hi or lo < 0:
        raise UsageError(f"Invalid --l-range {text!r} (expected integers 0 <= A <= B)")
    return list(range(int(lo), int(hi) + 1))


def parse_grid(fam: Family, text: Optional[str], config: dict, series: SeriesConfig) -> np.ndarray:
    if not text:
        return standard_grid(fam, config, series)
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise UsageError(f"Invalid --grid {text!r} (expected MIN:MAX:N[:log])")
    try:
        lo, hi, n = float(parse_rational(parts[0])), float(parse_rational(parts[1])), int(parts[2])
    except ValueError:
        raise UsageError(f"Invalid --grid {text!r} (expected MIN:MAX:N[:log])")
    spacing = parts[3] if len(parts) == 4 else "linear"
    return make_grid(fam, lo, hi, n, spacing)


def parse_spectral_grid(fam: Family, p: Params, k: int, text: Optional[str], config: dict) -> Grid:
    if not text:
        return default_grid(fam, p, k, config)
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"Invalid --grid {text!r} (expected MIN:MAX:N)")
    try:
        grid = Grid(float(parse_rational(parts[0])), float(parse_rational(parts[1])), int(parts[2]))
    except ValueError:
        raise UsageError(f"Invalid --grid {text!r} (expected MIN:MAX:N)")
    return grid.check(fam)


def single_params(args, fam: Family, series: SeriesConfig) -> Params:
    if args.g is None or args.l is None:
        raise UsageError("--g and --l are required")
    return make_params(fam, args.g, args.l, args.h, series=series)


def emit(args, command: str, run: RunConfig, results, ok: bool, csv_rows=None, table=None) -> int:
    exit_code = EXIT_OK if ok else EXIT_FAILED
    if args.format == "json":
        text = dumps(envelope(command, run.to_dict(), results, ok, exit_code)) + "\n"
    elif args.format == "csv":
        header, rows = csv_rows
        text = csv_text(header, rows)
    else:
        header, rows = table
        text = text_table(header, rows) + f"\n{'OK' if ok else 'FAILED'}\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return exit_code


def tolerance(args, config: dict, key: str) -> float:
    return float(args.tol) if args.tol is not None else float(setting(config, f"tolerances.{key}"))


# ── identity ────────────────────────────────────────────────────────


def _certify(task):
    fam, p, form, perturb, symbolic = task
    cert = cc_residual_exact(fam, p, form, perturb)
    out = {"certificate": cert.to_dict()}
    proven = cert.verdict == "proven"
    if symbolic:
        sym = certify_symbolic(fam, p, symbolic, form)
        out["symbolic"] = sym.to_dict()
        proven = proven and sym.verdict == "proven"
    out["proven"] = proven
    return out


def sweep_values(config: dict, key: str) -> list:
    """A sweep grid from the config, else DEFAULTS; a grid set to nothing is an error."""
    if get_config(config, key) is None:
        return setting(config, key)
    return require_config(config, key)


def identity_params(args, fam: Family, config: dict) -> List[Params]:
    if fam not in POLYNOMIAL_FAMILIES:
        raise UsageError(f"identity needs a polynomial family, got {fam.slug}")
    if args.l_range and args.l is not None:
        raise UsageError("--l and --l-range are mutually exclusive")
    if args.l_range:
        ls = parse_l_range(args.l_range)
    elif args.l is not None:
        ls = parse_l_range(f"{args.l}..{args.l}")
    else:
        raise UsageError("identity needs --l or --l-range")
    gs = split_list(args.g) or sweep_values(config, f"sweep.g.{fam.slug}")
    params = []
    for l in ls:
        if not fam.has_h:
            hs = [None]
        elif args.h:
            hs = split_list(args.h)
        elif fam is Family.HYP_DPT:
            offsets = sweep_values(config, "sweep.hOffsets.hyp-dpt")
            hs = [hyp_h_floor(l) + parse_rational(str(o)) for o in offsets]
        else:
            hs = sweep_values(config, f"sweep.h.{fam.slug}")
        for g, h in product(gs, hs):
            h_text = None if h is None else str(h)
            params.append(make_params(fam, str(g), l, h_text, validate=False))
    return params


def cmd_identity(args, config: dict) -> int:
    fam = Family.parse(args.family)
    params = identity_params(args, fam, config)
    perturb = parse_rational(args.perturb) if args.perturb else None
    tasks = [(fam, p, args.form, perturb, args.symbolic) for p in params]
    logger.debug("certifying %d configurations with %d job(s)", len(tasks), args.jobs)
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_certify, tasks))
    else:
        results = [_certify(t) for t in tasks]
    ok = all(r["proven"] for r in results)
    run = RunConfig("identity", fam, params, None, {}, args.out, args.format, {"form": args.form, "perturb": args.perturb})
    rows = [
        (
            fam.slug,
            r["certificate"]["l"],
            r["certificate"]["params"]["g"],
            r["certificate"]["params"].get("h", "-"),
            args.form,
            len(r["certificate"]["residual"]),
            "proven" if r["proven"] else "refuted",
        )
        for r in results
    ]
    header = ("family", "l", "g", "h", "form", "terms", "verdict")
    return emit(args, "identity", run, results, ok, (header, rows), (header, rows))


# ── check ───────────────────────────────────────────────────────────


def cmd_check(args, config: dict, series: SeriesConfig) -> int:
    fam = Family.parse(args.family)
    p = single_params(args, fam, series)
    xs = parse_grid(fam, args.grid, config, series)
    cc = cc_residual(fam, p, xs, tolerance(args, config, "compatibility"), series)
    w_form = compatibility_expression(fam, p, xs, tolerance(args, config, "compatibility"), series)
    reduced = reduced_residual(fam, p, xs, tolerance(args, config, "compatibility"), series)
    si = si_residual(fam, p, xs, tolerance(args, config, "constancy"), series)
    odes = [ode_residual(fam, p, b, xs, float(setting(config, "tolerances.ode")), series) for b in BRANCHES]
    ok = cc.ok and si.ok
    reports = [cc, w_form, reduced, si] + odes
    if args.probe is not None:
        probe = equivalence_probe(fam, p, args.probe, xs, tolerance(args, config, "constancy"), series)
        ok = ok and probe.ok
        reports.append(probe)
    run = RunConfig("check", fam, [p], args.grid, {"compatibility": cc.tolerance, "constancy": si.tolerance}, args.out, args.format)
    results = [r.to_dict() for r in reports]
    results.append(check_shift_orientation(fam).to_dict())
    csv_rows = (
        ("x", "eps", "siResidual", "odePlus", "odeMinus"),
        [(float(x), float(e), float(s), float(o1), float(o2)) for x, e, s, o1, o2 in zip(xs, cc.values, si.values, odes[0].values, odes[1].values)],
    )
    table = (
        ("check", "maxAbs", "spread", "constant", "ok"),
        [(r.kind, r.max_abs, r.spread, r.constant_value, r.ok) for r in reports if hasattr(r, "max_abs")],
    )
    return emit(args, "check", run, results, ok, csv_rows, table)


# ── spectrum ────────────────────────────────────────────────────────


def cmd_spectrum(args, config: dict, series: SeriesConfig) -> int:
    fam = Family.parse(args.family)
    p = single_params(args, fam, series)
    k = int(args.k if args.k is not None else setting(config, "spectral.k"))
    grid = parse_spectral_grid(fam, p, k, args.grid, config)
    richardson = bool(setting(config, "spectral.richardson")) and not args.no_richardson
    report = isospectrality_report(
        fam,
        p,
        k,
        grid,
        tol=tolerance(args, config, "spectrum"),
        gap_tol=float(setting(config, "tolerances.gap")),
        richardson=richardson,
        series=series,
    )
    run = RunConfig(
        "spectrum", fam, [p], args.grid, {"spectrum": report.tolerance, "gap": report.gap_tolerance}, args.out, args.format,
        {"k": k, "richardson": richardson},
    )
    used = report.spectra["V"].grid
    plot_xs = np.linspace(used.x_min + used.h, used.x_max - used.h, 400)
    csv_rows = (POTENTIAL_COLUMNS, potential_table(fam, p, plot_xs, series))
    table = (
        ("level", "V", "VTilde", "V0", "V0Tilde", "predicted"),
        [
            (i,) + tuple(float(report.spectra[name].eigenvalues[i]) for name in ("V", "VTilde", "V0", "V0Tilde"))
            + (report.predicted[i] if i < len(report.predicted) else None,)
            for i in range(k)
        ],
    )
    return emit(args, "spectrum", run, [report.to_dict()], report.ok, csv_rows, table)


# ── gauge ───────────────────────────────────────────────────────────


def cmd_gauge(args, config: dict, series: SeriesConfig) -> int:
    fam = Family.parse(args.family)
    p = single_params(args, fam, series)
    if not args.gauge:
        raise UsageError("gauge needs --gauge POLY")
    spec = GaugeSpec.parse(args.gauge)
    xs = parse_grid(fam, args.grid, config, series)
    report = gauge_transform(fam, p, spec, xs, tolerance(args, config, "gauge"), series)
    ok = gauge_ok(report)
    run = RunConfig("gauge", fam, [p], args.grid, {"gauge": report.tolerance}, args.out, args.format, {"gauge": args.gauge})
    predicted = spec.predicted_residual(xs)
    csv_rows = (
        ("x", "generalized", "predicted", "difference"),
        [(float(x), float(d + e), float(e), float(d)) for x, d, e in zip(xs, report.values, predicted)],
    )
    table = (
        ("gauge", "2g'", "maxAbs", "shiftV", "shiftVTilde", "ok"),
        [(
            spec.description,
            report.extras["predicted"],
            report.max_abs,
            report.extras["potentialShiftV"],
            report.extras["potentialShiftVTilde"],
            ok,
        )],
    )
    return emit(args, "gauge", run, [report.to_dict()], ok, csv_rows, table)


# ── main ────────────────────────────────────────────────────────────


def build_parser() -> ArgParser:
    parser = ArgParser(description="Verify extended shape-invariant superpotentials")
    parser.add_argument("--config", help="Path to a config JSON file")
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging on stderr")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", required=True, help="radial-oscillator (ro), trig-dpt, hyp-dpt, radial-oscillator-contl, trig-dpt-contl")
    common.add_argument("--g", help="g value (identity: comma list)")
    common.add_argument("--h", help="h value (identity: comma list)")
    common.add_argument("--l", help="l value")
    common.add_argument("--grid", help="MIN:MAX:N[:log]")
    common.add_argument("--tol", type=float, help="Override the command's tolerance")
    common.add_argument("--out", help="Write output to PATH (atomic)")
    common.add_argument("--format", choices=["json", "csv", "text"], default="json")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgParser)

    p = sub.add_parser("identity", parents=[common], help="Exact certificates over a parameter sweep")
    p.add_argument("--l-range", help="A..B")
    p.add_argument("--form", choices=FORMS, default="reduced")
    p.add_argument("--perturb", help="Add a rational constant to psi_minus (negative control)")
    p.add_argument("--symbolic", choices=["g", "h"], help="Also certify as a polynomial identity in this parameter")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("check", parents=[common], help="Compatibility / shape-invariance residuals")
    p.add_argument("--probe", type=float, help="Also run the equivalence probe with this psi_minus shift")

    p = sub.add_parser("spectrum", parents=[common], help="Isospectrality of partner potentials")
    p.add_argument("--k", type=int)
    p.add_argument("--no-richardson", action="store_true")

    p = sub.add_parser("gauge", parents=[common], help="Compatibility residual under a gauge g(x)")
    p.add_argument("--gauge", help='Polynomial in x, e.g. "1+x^3"')

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    try:
        if args.config and not os.path.exists(args.config):
            raise ConfigError(f"Config file not found: {args.config}")
        config = load_config(args.config)
        series = SeriesConfig.from_config(config)
        logger.debug("command=%s series=%s", args.command, series)
        if args.command == "identity":
            if args.jobs < 1:
                raise UsageError(f"--jobs must be >= 1, got {args.jobs}")
            return cmd_identity(args, config)
        if args.command == "check":
            return cmd_check(args, config, series)
        if args.command == "spectrum":
            return cmd_spectrum(args, config, series)
        return cmd_gauge(args, config, series)
    except SeriesNonConvergence as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_SERIES
    except (ShapeInvError, ValueError) as e:
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

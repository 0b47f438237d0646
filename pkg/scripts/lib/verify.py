"""Verification engine: compatibility residuals, exact identity certificates,
shape-invariance residuals, ODE checks, gauge covariance and the equivalence probe.

A failed check is a verdict (ok=False / verdict='refuted'), never an exception.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from lib.errors import DegreeCollapse, NodefulDeformation, ParameterError
from lib.families import (
    MINUS,
    PLUS,
    POLYNOMIAL_FAMILIES,
    Family,
    Params,
    ScalarFn,
    base_coefficients,
    check_domain,
    deformation_poly,
    find_node,
    ode_coefficients,
    parameter_shift,
    scan_grid,
    shape_remainder,
    standard_grid,
    substitution,
)
from lib.rational_poly import Poly, format_rational, parse_rational, poly_is_zero
from lib.specfun import DEFAULT_SERIES, SeriesConfig
from lib.superpotential import ExtendedSuperpotential, build, gauged

logger = logging.getLogger(__name__)

CONSTANCY_TOL = 1e-9
COMPATIBILITY_TOL = 1e-10
GAUGE_TOL = 1e-9
ODE_TOL = 1e-8

FORMS = ("reduced", "direct", "ode")


# ── Reports ─────────────────────────────────────────────────────────


@dataclass
class ResidualReport:
    """Sampled residual with its zero and constancy verdicts.

    mode='zero' passes when max_abs <= tolerance; mode='constant' passes when
    the spread is below tolerance * (1 + |mean|) and, when `expected` is given,
    the mean lies within tolerance of it (absolute).
    """

    kind: str
    family: Family
    params: Params
    xs: np.ndarray
    values: np.ndarray
    tolerance: float
    mode: str = "zero"
    expected: Optional[float] = None
    extras: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.xs.size > 1 and not np.all(np.diff(self.xs) > 0):
            raise ParameterError("Residual sample points must be strictly increasing")

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    @property
    def spread(self) -> float:
        return float(np.ptp(self.values))

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def is_constant(self) -> bool:
        return bool(np.all(np.isfinite(self.values))) and self.spread <= self.tolerance * (1 + abs(self.mean))

    @property
    def constant_value(self) -> Optional[float]:
        return self.mean if self.is_constant else None

    @property
    def ok(self) -> bool:
        if not np.all(np.isfinite(self.values)):
            return False
        if self.mode == "zero":
            return self.max_abs <= self.tolerance
        if not self.is_constant:
            return False
        if self.expected is None:
            return True
        return abs(self.mean - self.expected) <= self.tolerance

    def to_dict(self, samples: bool = True) -> dict:
        out = {
            "kind": self.kind,
            "family": self.family.slug,
            "params": self.params.to_dict(),
            "n": int(self.xs.size),
            "xMin": float(self.xs[0]),
            "xMax": float(self.xs[-1]),
            "maxAbs": self.max_abs,
            "spread": self.spread,
            "isConstant": self.is_constant,
            "constantValue": self.constant_value,
            "tolerance": self.tolerance,
        }
        if self.expected is not None:
            out["expected"] = self.expected
        out["ok"] = self.ok
        if self.extras:
            out["extras"] = dict(self.extras)
        if samples:
            out["xs"] = self.xs.tolist()
            out["values"] = self.values.tolist()
        return out


@dataclass(frozen=True)
class IdentityCertificate:
    """An exact identity in the substitution variable; proven iff the residual is zero."""

    family: Family
    params: Params
    form: str
    residual_poly: Poly
    variable: str
    components: Dict[str, Poly] = field(default_factory=dict)
    perturbation: Optional[Fraction] = None

    @property
    def l(self) -> int:
        return int(self.params.l)

    @property
    def verdict(self) -> str:
        return "proven" if poly_is_zero(self.residual_poly) else "refuted"

    @property
    def degree_bound(self) -> int:
        """Bound on the degree of the identity in g (and h)."""
        return 2 * self.l + 2

    def to_dict(self) -> dict:
        out = {
            "family": self.family.slug,
            "params": self.params.to_dict(),
            "l": self.l,
            "form": self.form,
            "variable": self.variable,
            "residual": [format_rational(c) for c in self.residual_poly.coeffs],
            "degreeBound": self.degree_bound,
            "verdict": self.verdict,
        }
        if self.perturbation is not None:
            out["perturbation"] = format_rational(self.perturbation)
        return out


@dataclass(frozen=True)
class SymbolicCertificate:
    """An identity certified in one parameter by instantiation at degree_bound + 2 points."""

    family: Family
    params: Params
    parameter: str
    certificates: List[IdentityCertificate]

    @property
    def degree_bound(self) -> int:
        return 2 * int(self.params.l) + 2

    @property
    def values(self) -> List[Fraction]:
        return [getattr(c.params, self.parameter) for c in self.certificates]

    @property
    def verdict(self) -> str:
        enough = len(set(self.values)) >= self.degree_bound + 2
        return "proven" if enough and all(c.verdict == "proven" for c in self.certificates) else "refuted"

    def to_dict(self) -> dict:
        return {
            "family": self.family.slug,
            "params": self.params.to_dict(),
            "parameter": self.parameter,
            "values": [format_rational(v) for v in self.values],
            "degreeBound": self.degree_bound,
            "verdict": self.verdict,
        }


# ── Gauge spec ──────────────────────────────────────────────────────

_GAUGE_TERM = re.compile(
    r"(?P<sign>[+-])?(?:(?P<coef>\d+(?:\.\d*)?(?:/\d+)?)(?:\*?(?P<x1>x)(?:\^(?P<p1>\d+))?)?|(?P<x2>x)(?:\^(?P<p2>\d+))?)"
)


@dataclass(frozen=True)
class GaugeSpec:
    """The gauge function g(x) as a polynomial in x."""

    poly: Poly
    description: str = ""

    @classmethod
    def parse(cls, text: str) -> "GaugeSpec":
        """Parse sums of 'c', 'c*x', 'c*x^k', 'x^k' with rational or decimal c."""
        src = text.replace(" ", "")
        if not src:
            raise ParameterError("Empty gauge polynomial")
        poly = Poly.zero()
        pos = 0
        while pos < len(src):
            m = _GAUGE_TERM.match(src, pos)
            if not m or m.end() == pos or (pos > 0 and not m.group("sign")):
                raise ParameterError(f"Invalid gauge polynomial {text!r} at position {pos}")
            coef = parse_rational(m.group("coef")) if m.group("coef") else Fraction(1)
            if m.group("sign") == "-":
                coef = -coef
            if m.group("x1") or m.group("x2"):
                power = int(m.group("p1") or m.group("p2") or 1)
            else:
                power = 0
            poly = poly + Poly.monomial(power, coef)
            pos = m.end()
        return cls(poly=poly, description=text.strip())

    def values(self, xs):
        return npoly.polyval(xs, self.poly.to_floats())

    def predicted_residual(self, xs):
        """2 g'(x)."""
        return 2.0 * npoly.polyval(xs, self.poly.derivative().to_floats())


# ── Numeric residuals ───────────────────────────────────────────────


def _grid(fam: Family, xs, series: SeriesConfig):
    return standard_grid(fam, series=series) if xs is None else check_domain(fam, xs)


def psi_form(ext: ExtendedSuperpotential, xs) -> np.ndarray:
    """eps(x) in psi form, with analytic second derivatives."""
    w0 = ext.w0(xs)
    pp, pm = ext.psi_plus, ext.psi_minus
    vp, vm = pp(xs), pm(xs)
    dp, dm = pp.d(xs), pm.d(xs)
    return (pp.d2(xs) + 2 * w0 * dp) / vp + (pm.d2(xs) - 2 * w0 * dm) / vm - 2 * dp * dm / (vp * vm)


def w_form(ext: ExtendedSuperpotential, xs) -> np.ndarray:
    """eps(x) from W0 and W1±: W1+' + W1-' + (W1+ - W1-)^2 + 2 W0 (W1+ - W1-)."""
    wp, wm = ext.w1_plus, ext.w1_minus
    diff = wp(xs) - wm(xs)
    return wp.d(xs) + wm.d(xs) + diff * diff + 2 * ext.w0(xs) * diff


def cc_residual(fam: Family, p: Params, xs=None, tol: float = COMPATIBILITY_TOL, series: SeriesConfig = DEFAULT_SERIES, ext: Optional[ExtendedSuperpotential] = None) -> ResidualReport:
    """Compatibility residual eps(x); zero for every family at valid parameters."""
    xs = _grid(fam, xs, series)
    ext = ext or build(fam, p, series)
    values = psi_form(ext, xs)
    report = ResidualReport("compatibility", fam, p, xs, values, tol)
    logger.debug("cc_residual %s: max|eps| = %.3g", p.text(fam), report.max_abs)
    return report


def compatibility_expression(fam: Family, p: Params, xs=None, tol: float = COMPATIBILITY_TOL, series: SeriesConfig = DEFAULT_SERIES, ext: Optional[ExtendedSuperpotential] = None) -> ResidualReport:
    """The same eps(x) evaluated from the logarithmic derivatives."""
    xs = _grid(fam, xs, series)
    ext = ext or build(fam, p, series)
    return ResidualReport("compatibility-w", fam, p, xs, w_form(ext, xs), tol)


def _ode_q(fam: Family, p: Params, branch: str, xs) -> np.ndarray:
    c = ode_coefficients(fam, p, branch)
    b1, b2 = substitution(fam).basis
    return 2 * (float(c.c1) * b1(xs) + float(c.c2) * b2(xs))


def reduced_residual(fam: Family, p: Params, xs=None, tol: float = COMPATIBILITY_TOL, series: SeriesConfig = DEFAULT_SERIES) -> ResidualReport:
    """The second-order-reduced identity divided by psi+ psi-.

    (lam+ + lam-) + (q+ + 2 W0) W1+ + (q- - 2 W0) W1- - 2 W1+ W1-
    """
    xs = _grid(fam, xs, series)
    ext = build(fam, p, series)
    w0 = ext.w0(xs)
    wp, wm = ext.w1_plus(xs), ext.w1_minus(xs)
    lam = float(ode_coefficients(fam, p, PLUS).lam) + float(ode_coefficients(fam, p, MINUS).lam)
    values = lam + (_ode_q(fam, p, PLUS, xs) + 2 * w0) * wp + (_ode_q(fam, p, MINUS, xs) - 2 * w0) * wm - 2 * wp * wm
    return ResidualReport("reduced", fam, p, xs, values, tol)


def ode_residual(fam: Family, p: Params, branch: str, xs=None, tol: float = ODE_TOL, series: SeriesConfig = DEFAULT_SERIES) -> ResidualReport:
    """(psi'' - lam psi - q psi') / psi for one branch."""
    xs = _grid(fam, xs, series)
    ext = build(fam, p, series)
    psi = ext.psi_plus if branch == PLUS else ext.psi_minus
    lam = float(ode_coefficients(fam, p, branch).lam)
    v = psi(xs)
    values = (psi.d2(xs) - lam * v - _ode_q(fam, p, branch, xs) * psi.d(xs)) / v
    return ResidualReport(f"ode-{branch}", fam, p, xs, values, tol)


def si_residual(
    fam: Family,
    p: Params,
    xs=None,
    tol: float = CONSTANCY_TOL,
    series: SeriesConfig = DEFAULT_SERIES,
    ext: Optional[ExtendedSuperpotential] = None,
    ext_shifted: Optional[ExtendedSuperpotential] = None,
) -> ResidualReport:
    """W^2(a) - W^2(f(a)) + W'(f(a)) + W'(a); constant R(f(a)) when shape invariant."""
    xs = _grid(fam, xs, series)
    q = parameter_shift(fam, p, series=series)
    wa = (ext or build(fam, p, series)).w()
    wf = (ext_shifted or build(fam, q, series)).w()
    values = wa(xs) ** 2 - wf(xs) ** 2 + wf.d(xs) + wa.d(xs)
    expected = float(shape_remainder(fam, p))
    report = ResidualReport("shape-invariance", fam, p, xs, values, tol, mode="constant", expected=expected)
    report.extras["shifted"] = q.to_dict()
    logger.debug("si_residual %s: spread %.3g, R = %r (expected %r)", p.text(fam), report.spread, report.constant_value, expected)
    return report


def gauge_transform(fam: Family, p: Params, gauge: GaugeSpec, xs=None, tol: float = GAUGE_TOL, series: SeriesConfig = DEFAULT_SERIES) -> ResidualReport:
    """eps of the gauged pair minus the predicted 2 g'(x); the potentials must not move."""
    xs = _grid(fam, xs, series)
    ext = build(fam, p, series)
    chi = gauged(ext, gauge.poly)
    generalized = psi_form(chi, xs)
    predicted = gauge.predicted_residual(xs)
    report = ResidualReport("gauge", fam, p, xs, generalized - predicted, tol)
    before, after = ext.partners_full(), chi.partners_full()
    shift_v = float(np.max(np.abs(after.v(xs) - before.v(xs))))
    shift_vt = float(np.max(np.abs(after.v_tilde(xs) - before.v_tilde(xs))))
    w_gap = float(np.max(np.abs(w_form(chi, xs) - generalized)))
    report.extras.update(
        gauge=gauge.description or gauge.poly.format("x"),
        derivative=gauge.poly.derivative().format("x"),
        predicted=gauge.poly.derivative().scale(2).format("x"),
        potentialShiftV=shift_v,
        potentialShiftVTilde=shift_vt,
        wFormGap=w_gap,
        potentialsUnchanged=max(shift_v, shift_vt) <= tol,
    )
    return report


def gauge_ok(report: ResidualReport) -> bool:
    return report.ok and bool(report.extras.get("potentialsUnchanged", True))


# ── Exact certificates ──────────────────────────────────────────────


def cc_residual_exact(fam: Family, p: Params, form: str = "reduced", perturb=None) -> IdentityCertificate:
    """Build the compatibility identity as an exact Poly in the substitution variable.

    form='direct' uses only psi = P(s) and the chain rule; form='reduced'
    first replaces psi'' through the second-order relations; form='ode'
    certifies those relations themselves. perturb adds a constant to P-.
    Parameters are not required to lie in the nodelessness window, but a
    Jacobi branch that collapses in degree is refused with DegreeCollapse.
    """
    if fam not in POLYNOMIAL_FAMILIES:
        raise ParameterError(f"Exact certificates need a polynomial family, got {fam.slug}")
    if form not in FORMS:
        raise ParameterError(f"Unknown certificate form {form!r} (expected one of {', '.join(FORMS)})")
    sub = substitution(fam)
    a_poly, b_poly = sub.a_poly, sub.b_poly
    pp = deformation_poly(fam, p, PLUS, strict=True)
    pm = deformation_poly(fam, p, MINUS, strict=True)
    delta = None
    if perturb is not None:
        delta = perturb if isinstance(perturb, Fraction) else parse_rational(str(perturb))
        pm = pm + delta
    dpp, dpm = pp.derivative(), pm.derivative()
    k1, k2 = base_coefficients(fam, p)
    ws = sub.basis_polys[0].scale(k1) + sub.basis_polys[1].scale(k2)
    components: Dict[str, Poly] = {}

    def q_poly(branch):
        c = ode_coefficients(fam, p, branch)
        return (sub.basis_polys[0].scale(c.c1) + sub.basis_polys[1].scale(c.c2)).scale(2)

    if form == "direct":
        plus_part = (a_poly * dpp.derivative() + b_poly * dpp + ws.scale(2) * dpp) * pm
        minus_part = (a_poly * dpm.derivative() + b_poly * dpm - ws.scale(2) * dpm) * pp
        residual = plus_part + minus_part - (a_poly * dpp * dpm).scale(2)
    elif form == "reduced":
        lam = ode_coefficients(fam, p, PLUS).lam + ode_coefficients(fam, p, MINUS).lam
        residual = (
            (pp * pm).scale(lam)
            + (q_poly(PLUS) + ws.scale(2)) * dpp * pm
            + (q_poly(MINUS) - ws.scale(2)) * dpm * pp
            - (a_poly * dpp * dpm).scale(2)
        )
    else:
        residual = Poly.zero()
        for branch, poly in ((PLUS, pp), (MINUS, pm)):
            c = ode_coefficients(fam, p, branch)
            d = poly.derivative()
            comp = a_poly * d.derivative() + b_poly * d - poly.scale(c.lam) - q_poly(branch) * d
            components[branch] = comp
            residual = residual + comp * comp
    cert = IdentityCertificate(fam, p, form, residual, sub.name.split(" ")[0], components, delta)
    logger.debug("certificate %s form=%s: %s", p.text(fam), form, cert.verdict)
    return cert


def certify_symbolic(fam: Family, p: Params, parameter: str = "g", form: str = "reduced", step: Fraction = Fraction(1, 7)) -> SymbolicCertificate:
    """Certify an identity as a polynomial identity in one parameter.

    Instantiates `parameter` at degree_bound + 2 values p.<parameter> + j*step,
    skipping values where a Jacobi polynomial collapses in degree.
    """
    if parameter not in ("g", "h") or getattr(p, parameter) is None:
        raise ParameterError(f"{fam.slug} has no parameter {parameter!r} to certify symbolically")
    needed = 2 * int(p.l) + 4
    certs: List[IdentityCertificate] = []
    base = getattr(p, parameter)
    j = 0
    while len(certs) < needed:
        if j > 10 * needed:
            raise ParameterError(f"Could not find {needed} non-degenerate values of {parameter} for {p.text(fam)}")
        q = Params(g=base + j * step, l=p.l, h=p.h) if parameter == "g" else Params(g=p.g, l=p.l, h=base + j * step)
        j += 1
        try:
            certs.append(cc_residual_exact(fam, q, form))
        except DegreeCollapse as exc:
            logger.debug("skipping %s: %s", q.text(fam), exc)
    return SymbolicCertificate(fam, p, parameter, certs)


# ── Equivalence probe ───────────────────────────────────────────────


def shifted_psi(psi: ScalarFn, delta: float) -> ScalarFn:
    return ScalarFn(lambda x: psi(x) + delta, psi.deriv, psi.deriv2, name=f"{psi.name}+{delta:g}")


@dataclass(frozen=True)
class ProbeReport:
    family: Family
    params: Params
    delta: float
    cc_constant_in_x: bool
    si_constant_in_x: bool
    degenerate: bool
    cc_spread: float
    si_spread: float

    @property
    def consistent(self) -> bool:
        """Both conditions hold together or fail together."""
        return self.cc_constant_in_x == self.si_constant_in_x

    @property
    def ok(self) -> bool:
        if not self.consistent:
            return False
        if self.delta == 0 or self.degenerate:
            return self.cc_constant_in_x
        return not self.cc_constant_in_x

    def to_dict(self) -> dict:
        return {
            "family": self.family.slug,
            "params": self.params.to_dict(),
            "delta": self.delta,
            "ccConstantInX": self.cc_constant_in_x,
            "siConstantInX": self.si_constant_in_x,
            "ccSpread": self.cc_spread,
            "siSpread": self.si_spread,
            "degenerate": self.degenerate,
            "consistent": self.consistent,
            "ok": self.ok,
        }


def equivalence_probe(fam: Family, p: Params, delta: float = 1e-2, xs=None, tol: float = CONSTANCY_TOL, series: SeriesConfig = DEFAULT_SERIES) -> ProbeReport:
    """Shift psi- by delta at a and at f(a) and compare both constancy verdicts."""
    xs = _grid(fam, xs, series)
    q = parameter_shift(fam, p, series=series)
    ext_a, ext_f = build(fam, p, series), build(fam, q, series)
    if delta:
        dense = scan_grid(fam, series)
        for label, ext in ((p.text(fam), ext_a), (q.text(fam), ext_f)):
            moved = shifted_psi(ext.psi_minus, delta)
            node = find_node(moved(dense), dense)
            if node is not None:
                raise NodefulDeformation(f"psi_minus + {delta:g} for {label} changes sign near x={node:.6g}", x=node)
        ext_a = ext_a.with_psi(minus=shifted_psi(ext_a.psi_minus, delta))
        ext_f = ext_f.with_psi(minus=shifted_psi(ext_f.psi_minus, delta))
    cc = ResidualReport("compatibility-w", fam, p, xs, w_form(ext_a, xs), tol, mode="constant")
    si = si_residual(fam, p, xs, tol, series, ext=ext_a, ext_shifted=ext_f)
    report = ProbeReport(
        family=fam,
        params=p,
        delta=float(delta),
        cc_constant_in_x=cc.is_constant,
        si_constant_in_x=si.is_constant,
        degenerate=p.l == 0,
        cc_spread=cc.spread,
        si_spread=si.spread,
    )
    logger.debug("equivalence probe %s delta=%g: cc=%s si=%s", p.text(fam), delta, cc.is_constant, si.is_constant)
    return report


"""The five superpotential families: base W0, deformations psi, shifts, substitutions.

Couplings: every family evaluates its base superpotential at shifted
couplings G = g + l and H = h + l (trigonometric) or H = h - l (hyperbolic).
The deformations psi_plus / psi_minus are polynomials in a substitution
variable s (z = x^2, y = cos 2x or y = cosh 2x) or, for continuous l,
hypergeometric series in the same variable.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Tuple, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from lib.errors import DomainError, NodefulDeformation, ParameterError
from lib.load_config import setting
from lib.rational_poly import Poly, format_rational, parse_rational, rational
from lib.specfun import DEFAULT_SERIES, SeriesConfig, gamma_ratio, hyp1f1, hyp2f1, hyp_derivative, jacobi, laguerre_neg_arg

logger = logging.getLogger(__name__)

Number = Union[Fraction, float, int]

PLUS = "plus"
MINUS = "minus"
BRANCHES = (PLUS, MINUS)

WINDOW_FLOOR = Fraction(3, 2)


class Family(Enum):
    RADIAL_OSCILLATOR = "radial-oscillator"
    TRIG_DPT = "trig-dpt"
    HYP_DPT = "hyp-dpt"
    RADIAL_OSCILLATOR_CONTL = "radial-oscillator-contl"
    TRIG_DPT_CONTL = "trig-dpt-contl"

    @property
    def slug(self) -> str:
        return self.value

    @property
    def kind(self) -> str:
        """Substitution kind: 'radial', 'trigonometric' or 'hyperbolic'."""
        return _KIND[self]

    @property
    def continuous(self) -> bool:
        return self in (Family.RADIAL_OSCILLATOR_CONTL, Family.TRIG_DPT_CONTL)

    @property
    def has_h(self) -> bool:
        return self.kind != "radial"

    @property
    def domain(self) -> Tuple[float, float]:
        return (0.0, math.pi / 2) if self.kind == "trigonometric" else (0.0, math.inf)

    @classmethod
    def parse(cls, text: str) -> "Family":
        key = text.strip().lower().replace("_", "-")
        if key in _ALIASES:
            return _ALIASES[key]
        for fam in cls:
            if fam.value == key:
                return fam
        names = ", ".join(f.value for f in cls)
        raise ParameterError(f"Unknown family {text!r} (expected one of: {names})")


_KIND = {
    Family.RADIAL_OSCILLATOR: "radial",
    Family.RADIAL_OSCILLATOR_CONTL: "radial",
    Family.TRIG_DPT: "trigonometric",
    Family.TRIG_DPT_CONTL: "trigonometric",
    Family.HYP_DPT: "hyperbolic",
}

_ALIASES = {
    "ro": Family.RADIAL_OSCILLATOR,
    "ro-contl": Family.RADIAL_OSCILLATOR_CONTL,
    "tdpt": Family.TRIG_DPT,
    "hdpt": Family.HYP_DPT,
    "tdpt-contl": Family.TRIG_DPT_CONTL,
}

POLYNOMIAL_FAMILIES = (Family.RADIAL_OSCILLATOR, Family.TRIG_DPT, Family.HYP_DPT)


# ── Params ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class Params:
    """Parameter tuple a = (g, h, l).

    Polynomial families hold Fractions and an int l; continuous families
    hold floats. h is None for the radial families.
    """

    g: Number
    l: Number
    h: Optional[Number] = None

    def text(self, fam: Family) -> str:
        parts = [f"family={fam.slug}", f"g={_fmt(self.g)}"]
        if self.h is not None:
            parts.append(f"h={_fmt(self.h)}")
        parts.append(f"l={_fmt(self.l)}")
        return " ".join(parts)

    def to_dict(self) -> dict:
        out = {"g": _fmt(self.g)}
        if self.h is not None:
            out["h"] = _fmt(self.h)
        out["l"] = _fmt(self.l)
        return out


def _fmt(v: Number) -> str:
    if isinstance(v, Fraction):
        return format_rational(v)
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def parse_value(value, exact: bool) -> Number:
    """Parse a CLI literal ('3', '5/2', '2.75') or number for one family."""
    q = parse_rational(value) if isinstance(value, str) else rational(value)
    return q if exact else float(q)


def make_params(fam: Family, g, l, h=None, validate: bool = True, series: SeriesConfig = DEFAULT_SERIES) -> Params:
    """Build Params from literals or numbers, checking structure and (optionally) nodelessness."""
    exact = not fam.continuous
    g_val = parse_value(g, exact)
    l_raw = parse_rational(l) if isinstance(l, str) else rational(l)
    if exact:
        if l_raw.denominator != 1:
            raise ParameterError(f"{fam.slug} needs an integer l, got {format_rational(l_raw)}")
        l_val: Number = int(l_raw)
    else:
        l_val = float(l_raw)
    if fam.has_h and h is None:
        raise ParameterError(f"{fam.slug} needs an h parameter")
    if not fam.has_h and h is not None:
        raise ParameterError(f"{fam.slug} takes no h parameter")
    h_val = parse_value(h, exact) if h is not None else None
    p = Params(g=g_val, l=l_val, h=h_val)
    check_structure(fam, p)
    if validate:
        validate_params(fam, p, series)
    return p


def check_structure(fam: Family, p: Params) -> None:
    if fam.continuous:
        if not p.l > 0:
            raise ParameterError(f"{fam.slug} needs l > 0, got {p.l}")
    elif not isinstance(p.l, int) or p.l < 0:
        raise ParameterError(f"{fam.slug} needs an integer l >= 0, got {p.l}")
    if fam.has_h != (p.h is not None):
        raise ParameterError(f"{fam.slug}: h must be {'set' if fam.has_h else 'absent'}")


def in_window(fam: Family, p: Params) -> bool:
    """True when nodelessness of both branches is guaranteed without a scan.

    The continuous trigonometric family has no such guarantee.
    """
    if fam is Family.TRIG_DPT_CONTL:
        return False
    if p.g < WINDOW_FLOOR:
        return False
    if fam is Family.TRIG_DPT:
        return p.h >= WINDOW_FLOOR
    if fam is Family.HYP_DPT:
        return p.h >= hyp_h_floor(p.l)
    return True


def hyp_h_floor(l) -> Fraction:
    """Smallest h of the hyperbolic window at this l."""
    return max(rational(l) + WINDOW_FLOOR, 2 * rational(l) - 1)


def validate_params(fam: Family, p: Params, series: SeriesConfig = DEFAULT_SERIES) -> Params:
    """Accept p when inside the window, otherwise when the domain scan finds no node."""
    check_structure(fam, p)
    if in_window(fam, p) and all(_full_degree(fam, p, branch) for branch in BRANCHES):
        return p
    logger.debug("%s outside the validity window or degree-collapsed; scanning for nodes", p.text(fam))
    for branch in BRANCHES:
        ensure_nodeless(fam, p, branch, series)
    return p


def _full_degree(fam: Family, p: Params, branch: str) -> bool:
    if fam.continuous:
        return True
    return deformation_poly(fam, p, branch).degree == p.l


# ── ScalarFn ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ScalarFn:
    """A real function of x with analytic derivatives, vectorized over numpy arrays."""

    value: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    deriv2: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __call__(self, x):
        return self.value(np.asarray(x, dtype=float))

    def d(self, x):
        return self.deriv(np.asarray(x, dtype=float))

    def d2(self, x):
        if self.deriv2 is None:
            raise DomainError(f"{self.name or 'function'} carries no second derivative")
        return self.deriv2(np.asarray(x, dtype=float))


def check_domain(fam: Family, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    lo, hi = fam.domain
    bad = ~((xs > lo) & (xs < hi)) | ~np.isfinite(xs)
    if np.any(bad):
        first = float(np.atleast_1d(xs)[np.atleast_1d(bad)][0])
        raise DomainError(f"x={first} lies outside the {fam.slug} domain ({lo}, {hi})")
    return xs


def _guarded(fam: Family, fn: Callable) -> Callable:
    def wrapped(x):
        return fn(check_domain(fam, x))

    return wrapped


def couplings(fam: Family, p: Params) -> Tuple[Number, Optional[Number]]:
    """Shifted couplings (G, H) at which W0 is evaluated."""
    G = p.g + p.l
    if fam.kind == "trigonometric":
        return G, p.h + p.l
    if fam.kind == "hyperbolic":
        return G, p.h - p.l
    return G, None


def base_function(kind: str, G: float, H: Optional[float]) -> Tuple[Callable, Callable]:
    """Value and derivative callables of W0 for raw couplings."""
    G = float(G)
    if kind == "radial":
        return (lambda x: -x + G / x), (lambda x: -1.0 - G / (x * x))
    H = float(H)
    if kind == "trigonometric":
        return (
            lambda x: G / np.tan(x) - H * np.tan(x),
            lambda x: -G / np.sin(x) ** 2 - H / np.cos(x) ** 2,
        )
    return (
        lambda x: G / np.tanh(x) - H * np.tanh(x),
        lambda x: -G / np.sinh(x) ** 2 - H / np.cosh(x) ** 2,
    )


def base_superpotential(fam: Family, p: Params) -> ScalarFn:
    """W0(x, a): the classical superpotential at the shifted couplings."""
    G, H = couplings(fam, p)
    value, deriv = base_function(fam.kind, G, H)
    return ScalarFn(_guarded(fam, value), _guarded(fam, deriv), name="W0")


# ── Substitution ────────────────────────────────────────────────────


@dataclass(frozen=True)
class Substitution:
    """s = s(x) with its derivatives, and the exact kernel polynomials in s.

    a_poly = (ds/dx)^2 and b_poly = d2s/dx2 expressed in s; basis_polys are
    b1(x) ds/dx and b2(x) ds/dx for the family's basis functions (b1, b2).
    """

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    second: Callable[[np.ndarray], np.ndarray]
    a_poly: Poly
    b_poly: Poly
    basis: Tuple[Callable, Callable]
    basis_polys: Tuple[Poly, Poly]

    def __call__(self, x):
        return self.forward(np.asarray(x, dtype=float)), self.derivative(np.asarray(x, dtype=float))


_SUBSTITUTIONS = {
    "radial": Substitution(
        name="z = x^2",
        forward=lambda x: x * x,
        derivative=lambda x: 2.0 * x,
        second=lambda x: np.full_like(x, 2.0),
        a_poly=Poly.of(0, 4),
        b_poly=Poly.of(2),
        basis=(lambda x: 1.0 / x, lambda x: x),
        basis_polys=(Poly.of(2), Poly.of(0, 2)),
    ),
    "trigonometric": Substitution(
        name="y = cos 2x",
        forward=lambda x: np.cos(2 * x),
        derivative=lambda x: -2.0 * np.sin(2 * x),
        second=lambda x: -4.0 * np.cos(2 * x),
        a_poly=Poly.of(4, 0, -4),
        b_poly=Poly.of(0, -4),
        basis=(lambda x: 1.0 / np.tan(x), np.tan),
        basis_polys=(Poly.of(-2, -2), Poly.of(-2, 2)),
    ),
    "hyperbolic": Substitution(
        name="y = cosh 2x",
        forward=lambda x: np.cosh(2 * x),
        derivative=lambda x: 2.0 * np.sinh(2 * x),
        second=lambda x: 4.0 * np.cosh(2 * x),
        a_poly=Poly.of(-4, 0, 4),
        b_poly=Poly.of(0, 4),
        basis=(lambda x: 1.0 / np.tanh(x), np.tanh),
        basis_polys=(Poly.of(2, 2), Poly.of(-2, 2)),
    ),
}


def substitution(fam: Family) -> Substitution:
    return _SUBSTITUTIONS[fam.kind]


def base_coefficients(fam: Family, p: Params) -> Tuple[Number, Number]:
    """W0 = k1*b1 + k2*b2 on the family basis."""
    G, H = couplings(fam, p)
    if fam.kind == "radial":
        return G, -1
    return G, -H


# ── Deformations ────────────────────────────────────────────────────


@lru_cache(maxsize=512)
def deformation_poly(fam: Family, p: Params, branch: str, strict: bool = False) -> Poly:
    """Exact psi_plus / psi_minus as a Poly in the substitution variable.

    A Jacobi branch whose degree collapses is the lower-degree polynomial
    unless strict=True, which raises DegreeCollapse instead.
    """
    if fam.continuous:
        raise ParameterError(f"{fam.slug} has no polynomial deformation")
    _check_branch(branch)
    g, l = p.g, p.l
    shift = 1 if branch == PLUS else 0
    if fam is Family.RADIAL_OSCILLATOR:
        return laguerre_neg_arg(l, g + shift + l - Fraction(3, 2))
    a = -(g + shift) - l - Fraction(1, 2)
    if fam is Family.TRIG_DPT:
        b = p.h + shift + l - Fraction(3, 2)
    else:
        b = -(p.h - shift) + l - Fraction(3, 2)
    poly = jacobi(l, a, b, strict=strict)
    if poly.is_zero():
        raise NodefulDeformation(f"psi_{branch} for {p.text(fam)} vanishes identically")
    return poly


def _check_branch(branch: str) -> None:
    if branch not in BRANCHES:
        raise ParameterError(f"Unknown branch {branch!r} (expected plus or minus)")


@dataclass(frozen=True)
class _Chart:
    """s = c0 + c1*t, with t computed from x directly for accuracy."""

    c0: int
    c1: int
    t: Callable[[np.ndarray], np.ndarray]
    applies: Callable[[np.ndarray], np.ndarray]


def _everywhere(x):
    return np.ones_like(x, dtype=bool)


_CHARTS = {
    "radial": (_Chart(0, 1, lambda x: x * x, _everywhere),),
    "trigonometric": (
        _Chart(1, -2, lambda x: np.sin(x) ** 2, lambda x: x <= math.pi / 4),
        _Chart(-1, 2, lambda x: np.cos(x) ** 2, lambda x: x > math.pi / 4),
    ),
    "hyperbolic": (_Chart(1, 1, lambda x: 2.0 * np.sinh(x) ** 2, _everywhere),),
}


class PolyEvaluator:
    """Float evaluation of P(s), P'(s), P''(s) through per-chart Taylor coefficients."""

    def __init__(self, poly: Poly, kind: str):
        self.poly = poly
        self.charts = []
        for chart in _CHARTS[kind]:
            q = poly.compose_linear(chart.c0, chart.c1)
            self.charts.append((chart, q.to_floats(), q.derivative().to_floats(), q.derivative().derivative().to_floats()))

    def __call__(self, s_x: np.ndarray):
        x = np.asarray(s_x, dtype=float)
        p0 = np.empty_like(x)
        p1 = np.empty_like(x)
        p2 = np.empty_like(x)
        for chart, q0, q1, q2 in self.charts:
            m = chart.applies(x)
            if not np.any(m):
                continue
            t = chart.t(x[m])
            p0[m] = npoly.polyval(t, q0)
            p1[m] = npoly.polyval(t, q1) / chart.c1
            p2[m] = npoly.polyval(t, q2) / chart.c1**2
        return p0, p1, p2


def _poly_deformation(fam: Family, poly: Poly, label: str) -> ScalarFn:
    sub = substitution(fam)
    ev = PolyEvaluator(poly, fam.kind)

    def value(x):
        return ev(x)[0]

    def deriv(x):
        return sub.derivative(x) * ev(x)[1]

    def deriv2(x):
        _, p1, p2 = ev(x)
        return sub.derivative(x) ** 2 * p2 + sub.second(x) * p1

    return ScalarFn(_guarded(fam, value), _guarded(fam, deriv), _guarded(fam, deriv2), name=label)


def series_parameters(fam: Family, p: Params, branch: str) -> Tuple[str, Tuple[float, ...]]:
    """(kind, params) of the hypergeometric function behind a continuous deformation."""
    _check_branch(branch)
    g = float(p.g) + (1.0 if branch == PLUS else 0.0)
    l = float(p.l)
    if fam is Family.RADIAL_OSCILLATOR_CONTL:
        return "1F1", (-l, g + l - 0.5)
    if fam is Family.TRIG_DPT_CONTL:
        return "2F1", (-l, float(p.g) - float(p.h) + l - 1.0, g + l - 0.5)
    raise ParameterError(f"{fam.slug} is not a continuous family")


def normalization(fam: Family, p: Params, branch: str) -> float:
    """Gamma(g+2l-1/2) / (Gamma(l+1) Gamma(g+l-1/2)), with g -> g+1 on the plus branch."""
    g = float(p.g) + (1.0 if branch == PLUS else 0.0)
    l = float(p.l)
    return gamma_ratio([g + 2 * l - 0.5], [l + 1.0, g + l - 0.5])


# argument u(x) of the series and its first two x-derivatives
_SERIES_ARGUMENT = {
    "radial": (lambda x: -x * x, lambda x: -2.0 * x, lambda x: np.full_like(x, -2.0)),
    "trigonometric": (lambda x: np.sin(x) ** 2, lambda x: np.sin(2 * x), lambda x: 2.0 * np.cos(2 * x)),
}


def _series_deformation(fam: Family, p: Params, branch: str, normalized: bool, series: SeriesConfig) -> ScalarFn:
    kind, params = series_parameters(fam, p, branch)
    u, du, d2u = _SERIES_ARGUMENT[fam.kind]
    scale = normalization(fam, p, branch) if normalized else 1.0

    def evaluate(order):
        if order == 0:
            fn = hyp1f1 if kind == "1F1" else hyp2f1
            return np.vectorize(lambda z: fn(*params, z, series), otypes=[float])
        return np.vectorize(lambda z: hyp_derivative(kind, params, z, series, order), otypes=[float])

    f0, f1, f2 = evaluate(0), evaluate(1), evaluate(2)

    def value(x):
        return scale * f0(u(x))

    def deriv(x):
        return scale * du(x) * f1(u(x))

    def deriv2(x):
        z = u(x)
        return scale * (du(x) ** 2 * f2(z) + d2u(x) * f1(z))

    return ScalarFn(_guarded(fam, value), _guarded(fam, deriv), _guarded(fam, deriv2), name=f"psi_{branch}")


@lru_cache(maxsize=512)
def _deformation(fam: Family, p: Params, branch: str, normalized: bool, series: SeriesConfig) -> ScalarFn:
    if fam.continuous:
        return _series_deformation(fam, p, branch, normalized, series)
    return _poly_deformation(fam, deformation_poly(fam, p, branch), f"psi_{branch}")


def deformation(
    fam: Family,
    p: Params,
    branch: str,
    normalized: bool = False,
    series: SeriesConfig = DEFAULT_SERIES,
    checked: bool = True,
) -> ScalarFn:
    """psi_plus or psi_minus as a ScalarFn.

    With checked=True the branch is required to be nodeless on the domain
    (window or scan); the scan result is cached per (family, params, branch).
    normalized=True applies the Gamma-ratio prefactor of the continuous
    families; it has no effect on polynomial families.
    """
    _check_branch(branch)
    if checked and not in_window(fam, p):
        ensure_nodeless(fam, p, branch, series)
    return _deformation(fam, p, branch, normalized and fam.continuous, series)


# ── Node scan ───────────────────────────────────────────────────────


def scan_grid(fam: Family, series: SeriesConfig = DEFAULT_SERIES, n: int = 2001) -> np.ndarray:
    """Dense sample of the domain used for the sign-change scan."""
    if fam.kind == "trigonometric":
        hi = math.pi / 2 - 1e-4
        if fam.continuous:
            hi = min(hi, series_x_max(series))
        return np.linspace(1e-4, hi, n)
    if fam.kind == "hyperbolic":
        return np.geomspace(1e-4, 12.0, n)
    if fam.continuous:
        # 1F1(-l; b; -x^2) ~ x^(2l) Gamma(b) / Gamma(b + l) past this point
        return np.geomspace(1e-4, 6.0, n)
    return np.geomspace(1e-4, 30.0, n)


def series_x_max(series: SeriesConfig) -> float:
    """Largest x with sin^2 x inside the 2F1 margin (with a small inset)."""
    return math.asin(math.sqrt(1.0 - series.margin)) - 1e-6


def find_node(values: np.ndarray, xs: np.ndarray) -> Optional[float]:
    signs = np.sign(values)
    if np.any(signs == 0):
        return float(xs[np.argmax(signs == 0)])
    flips = np.nonzero(signs[1:] != signs[:-1])[0]
    if flips.size:
        i = int(flips[0])
        return float(0.5 * (xs[i] + xs[i + 1]))
    return None


@lru_cache(maxsize=1024)
def ensure_nodeless(fam: Family, p: Params, branch: str, series: SeriesConfig = DEFAULT_SERIES) -> None:
    """Raise NodefulDeformation when psi changes sign on the domain."""
    if fam.continuous:
        psi = _deformation(fam, p, branch, False, series)
    else:
        poly = deformation_poly(fam, p, branch)
        _check_poly_ends(fam, p, branch, poly)
        psi = _poly_deformation(fam, poly, f"psi_{branch}")
    xs = scan_grid(fam, series)
    node = find_node(psi(xs), xs)
    if node is not None:
        raise NodefulDeformation(f"psi_{branch} for {p.text(fam)} changes sign near x={node:.6g}", x=node)


def _check_poly_ends(fam: Family, p: Params, branch: str, poly: Poly) -> None:
    """Opposite signs at the two ends of an unbounded domain imply a node."""
    if fam.kind == "trigonometric" or poly.degree < 1:
        return
    start = poly(0 if fam.kind == "radial" else 1)
    if start == 0 or (start > 0) != (poly.leading() > 0):
        raise NodefulDeformation(f"psi_{branch} for {p.text(fam)} vanishes or changes sign on the half-line")


# ── Shifts and remainders ───────────────────────────────────────────


_SHIFT = {
    "radial": (-1, 0),
    "trigonometric": (-1, -1),
    "hyperbolic": (-1, 1),
}


def _shifted(fam: Family, p: Params, sign: int) -> Params:
    dg, dh = _SHIFT[fam.kind]
    h = None if p.h is None else p.h + sign * dh
    return replace(p, g=p.g + sign * dg, h=h)


def parameter_shift(fam: Family, p: Params, validate: bool = True, series: SeriesConfig = DEFAULT_SERIES) -> Params:
    """f(a): the translation linking psi_minus(a) with psi_plus(f(a))."""
    q = _shifted(fam, p, 1)
    if validate:
        validate_params(fam, q, series)
    return q


def inverse_shift(fam: Family, p: Params, validate: bool = False, series: SeriesConfig = DEFAULT_SERIES) -> Params:
    q = _shifted(fam, p, -1)
    if validate:
        validate_params(fam, q, series)
    return q


def shape_remainder(fam: Family, p: Params) -> Number:
    """Closed-form R of W^2(a) - W^2(f(a)) + W'(f(a)) + W'(a)."""
    if fam.kind == "radial":
        return -4.0 if fam.continuous else Fraction(-4)
    if fam.kind == "trigonometric":
        return -4 * (p.g + p.h + 2 * p.l - 1)
    return 4 * (p.g - p.h + 2 * p.l - 1)


def predicted_levels(fam: Family, p: Params, k: int) -> list:
    """E_n(a) = -sum_{j=1..n} R(f^{-j}(a)) for n < k: the zero-mode potential's ladder."""
    levels = [0.0]
    q = p
    total = 0.0
    for _ in range(1, k):
        q = inverse_shift(fam, q)
        total -= float(shape_remainder(fam, q))
        levels.append(total)
    return levels


@dataclass(frozen=True)
class OdeCoefficients:
    """psi'' = lam*psi + 2*(c1*b1 + c2*b2)*psi' on the family basis (b1, b2)."""

    lam: Number
    c1: Number
    c2: Number


def ode_coefficients(fam: Family, p: Params, branch: str) -> OdeCoefficients:
    _check_branch(branch)
    G, H = couplings(fam, p)
    g, l = p.g, p.l
    plus = branch == PLUS
    if fam.kind == "radial":
        return OdeCoefficients(4 * l, -G if plus else 1 - G, -1)
    if fam is Family.TRIG_DPT:
        return OdeCoefficients(4 * l * (g - p.h - l + 1), G + 1 if plus else G, H if plus else H - 1)
    if fam is Family.HYP_DPT:
        return OdeCoefficients(4 * l * (l - g - p.h - 1), G + 1 if plus else G, H if plus else H + 1)
    return OdeCoefficients(-4 * l * (l + g - p.h - 1), -G if plus else 1 - G, -(H + 1) if plus else -H)


@dataclass(frozen=True)
class OrientationCheck:
    """Which translation orientation each criterion selects (+1 forward, -1 reversed)."""

    family: Family
    from_pairing: Optional[int]
    from_base: Optional[int]

    @property
    def agree(self) -> bool:
        return self.from_pairing is not None and self.from_pairing == self.from_base

    def to_dict(self) -> dict:
        return {"family": self.family.slug, "fromPairing": self.from_pairing, "fromBase": self.from_base, "agree": self.agree}


def _sample_params(fam: Family) -> Params:
    if fam is Family.RADIAL_OSCILLATOR:
        return Params(g=Fraction(7, 2), l=2)
    if fam is Family.TRIG_DPT:
        return Params(g=Fraction(7, 2), l=2, h=Fraction(9, 2))
    if fam is Family.HYP_DPT:
        return Params(g=Fraction(7, 3), l=2, h=Fraction(13, 2))
    if fam is Family.RADIAL_OSCILLATOR_CONTL:
        return Params(g=3.5, l=1.5)
    return Params(g=3.0, l=1.5, h=4.0)


def check_shift_orientation(fam: Family, tol: float = 1e-9) -> OrientationCheck:
    """Pin the orientation of f twice and report both answers.

    Pairing: psi_minus(a) must equal psi_plus(f(a)). Base: the shape-invariance
    residual of W0 under f must be independent of x.
    """
    p = _sample_params(fam)
    xs = standard_grid(fam, series=DEFAULT_SERIES)
    psi_minus = deformation(fam, p, MINUS, checked=False)
    pairing = []
    base = []
    for sign in (1, -1):
        q = _shifted(fam, p, sign)
        if fam.continuous:
            other = deformation(fam, q, PLUS, checked=False)
            diff = np.max(np.abs(psi_minus(xs) - other(xs)) / np.abs(psi_minus(xs)))
            if diff <= tol:
                pairing.append(sign)
        elif deformation_poly(fam, p, MINUS) == deformation_poly(fam, q, PLUS):
            pairing.append(sign)
        w_a = base_superpotential(fam, p)
        w_f = base_superpotential(fam, q)
        residual = w_a(xs) ** 2 - w_f(xs) ** 2 + w_f.d(xs) + w_a.d(xs)
        if np.ptp(residual) <= tol * (1 + abs(np.mean(residual))):
            base.append(sign)
    check = OrientationCheck(
        family=fam,
        from_pairing=pairing[0] if len(pairing) == 1 else None,
        from_base=base[0] if len(base) == 1 else None,
    )
    logger.debug("shift orientation %s: pairing=%s base=%s", fam.slug, check.from_pairing, check.from_base)
    return check


# ── Grids ───────────────────────────────────────────────────────────


def standard_grid(fam: Family, config: Optional[dict] = None, series: SeriesConfig = DEFAULT_SERIES) -> np.ndarray:
    """The verification grid of a family (config key grids.<kind>)."""
    config = config or {}
    spec = dict(setting(config, f"grids.{fam.kind}"))
    lo = float(spec["min"])
    hi = spec.get("max")
    hi = math.pi / 2 - lo if hi is None else float(hi)
    n = int(spec["n"])
    if fam is Family.TRIG_DPT_CONTL and hi > series_x_max(series):
        logger.warning("Clipping %s grid from %.6g to %.6g (2F1 margin %.3g)", fam.slug, hi, series_x_max(series), series.margin)
        hi = series_x_max(series)
    return make_grid(fam, lo, hi, n, spec.get("spacing", "linear"))


def make_grid(fam: Family, lo: float, hi: float, n: int, spacing: str = "linear") -> np.ndarray:
    if n < 2:
        raise DomainError(f"Grid needs at least 2 points, got {n}")
    if not lo < hi:
        raise DomainError(f"Grid bounds must satisfy min < max, got {lo} and {hi}")
    if spacing == "log":
        if lo <= 0:
            raise DomainError(f"Log-spaced grid needs min > 0, got {lo}")
        xs = np.geomspace(lo, hi, n)
    elif spacing == "linear":
        xs = np.linspace(lo, hi, n)
    else:
        raise DomainError(f"Unknown grid spacing {spacing!r}")
    return check_domain(fam, xs)


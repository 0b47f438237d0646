"""Exact rational scalars and dense univariate polynomials over them.

This is the substrate for identity certificates: coefficients are
fractions.Fraction, never floats, and every Poly is kept canonical
(no trailing zero coefficient). The zero polynomial has degree
ZERO_DEGREE.

Parameters such as g and h are instantiated to concrete rationals before a
Poly is built; claims symbolic in a parameter are certified elsewhere by
checking enough distinct instantiations.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Tuple, Union

import numpy as np

from lib.errors import ParameterError

Rational = Fraction
RationalLike = Union[Fraction, int, str]

ZERO_DEGREE = -1

_LITERAL = re.compile(r"^\s*([+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*(?:/\s*(\d+))?\s*$")


def rational(value) -> Fraction:
    """Coerce an int, Fraction, literal string or float to an exact Fraction.

    Floats go through their shortest repr so 0.1 becomes 1/10, not the binary
    expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParameterError(f"Not a rational value: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not np.isfinite(value):
            raise ParameterError(f"Not a finite value: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        return parse_rational(value)
    raise ParameterError(f"Not a rational value: {value!r}")


def parse_rational(text: str) -> Fraction:
    """Parse '3', '-5/2', '2.75' or '1e-3' exactly."""
    match = _LITERAL.match(text)
    if not match:
        raise ParameterError(f"Invalid rational literal: {text!r}")
    num, den = match.groups()
    value = Fraction(num)
    if den is not None:
        if int(den) == 0:
            raise ParameterError(f"Zero denominator in literal: {text!r}")
        value /= int(den)
    return value


def format_rational(value: Fraction) -> str:
    """Canonical 'p/q' text; integers keep the '/1' so the schema stays uniform."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def _canonical(coeffs: Iterable[RationalLike]) -> Tuple[Fraction, ...]:
    out = [rational(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


@dataclass(frozen=True)
class Poly:
    """Dense polynomial; coeffs[k] multiplies t**k."""

    coeffs: Tuple[Fraction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _canonical(self.coeffs))

    # --- constructors ---

    @classmethod
    def of(cls, *coeffs: RationalLike) -> "Poly":
        """Poly.of(c0, c1, c2) is c0 + c1*t + c2*t**2."""
        return cls(tuple(coeffs))

    @classmethod
    def constant(cls, c: RationalLike) -> "Poly":
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c: RationalLike = 1) -> "Poly":
        return cls((0,) * k + (c,))

    @classmethod
    def zero(cls) -> "Poly":
        return cls(())

    @classmethod
    def one(cls) -> "Poly":
        return cls((1,))

    # --- structure ---

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else ZERO_DEGREE

    def __getitem__(self, k: int) -> Fraction:
        if k < 0:
            raise IndexError("negative power")
        return self.coeffs[k] if k < len(self.coeffs) else Fraction(0)

    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    # --- arithmetic ---

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(tuple(self[k] + other[k] for k in range(n)))

    __radd__ = __add__

    def __neg__(self):
        return Poly(tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        other = _as_poly(other)
        if self.is_zero() or other.is_zero():
            return Poly.zero()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(tuple(out))

    __rmul__ = __mul__

    def scale(self, c: RationalLike) -> "Poly":
        c = rational(c)
        return Poly(tuple(c * a for a in self.coeffs))

    def derivative(self) -> "Poly":
        return Poly(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def integral(self) -> "Poly":
        """Antiderivative with zero constant term."""
        return Poly((0,) + tuple(c / (k + 1) for k, c in enumerate(self.coeffs)))

    def __call__(self, t: RationalLike) -> Fraction:
        return poly_eval(self, rational(t))

    def compose_linear(self, c0: RationalLike, c1: RationalLike) -> "Poly":
        """Coefficients of p(c0 + c1*t) in t (exact Horner)."""
        inner = Poly.of(c0, c1)
        out = Poly.zero()
        for c in reversed(self.coeffs):
            out = out * inner + c
        return out

    # --- float views ---

    def to_floats(self) -> np.ndarray:
        """Ascending float coefficients; [0.0] for the zero polynomial."""
        if not self.coeffs:
            return np.zeros(1)
        return np.array([float(c) for c in self.coeffs])

    def __str__(self):
        return self.format()

    def format(self, var: str = "t") -> str:
        """Human-readable sum of terms in the variable `var`."""
        if not self.coeffs:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            power = "" if k == 0 else (var if k == 1 else f"{var}^{k}")
            if power and c == 1:
                terms.append(power)
            elif power and c == -1:
                terms.append(f"-{power}")
            else:
                terms.append(f"{c}{'*' + power if power else ''}")
        return " + ".join(terms).replace("+ -", "- ")


def _as_poly(value) -> Poly:
    if isinstance(value, Poly):
        return value
    return Poly.constant(value)


# --- operation surface ---


def poly_arith(p: Poly, q: Poly, op: str) -> Poly:
    """Exact add / sub / mul in canonical form."""
    if op == "add":
        return p + q
    if op == "sub":
        return p - q
    if op == "mul":
        return p * q
    raise ParameterError(f"Unknown polynomial operation: {op!r}")


def poly_derivative(p: Poly) -> Poly:
    return p.derivative()


def poly_eval(p: Poly, x: Fraction) -> Fraction:
    """Exact Horner evaluation."""
    acc = Fraction(0)
    for c in reversed(p.coeffs):
        acc = acc * x + c
    return acc


def poly_is_zero(p: Poly) -> bool:
    return all(c == 0 for c in p.coeffs)

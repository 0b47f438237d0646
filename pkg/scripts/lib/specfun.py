"""Orthogonal polynomials as exact Polys, plus hypergeometric and Gamma evaluators.

Laguerre and Jacobi polynomials are built by their three-term recurrences in
exact rational arithmetic. The hypergeometric series are plain double
precision sums with a relative tail test; they back the continuous-l
deformations, where l is not an integer and no polynomial exists.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from scipy import special

from lib.errors import DegreeCollapse, DomainError, ParameterError, SeriesNonConvergence
from lib.load_config import setting
from lib.rational_poly import Poly, rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeriesConfig:
    """Truncation policy for the 1F1 / 2F1 series."""

    tolerance: float = 1e-14
    max_terms: int = 400
    margin: float = 0.05

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ParameterError(f"Series tolerance must be > 0, got {self.tolerance}")
        if self.max_terms < 2:
            raise ParameterError(f"Series max_terms must be >= 2, got {self.max_terms}")
        if not 0 <= self.margin < 1:
            raise ParameterError(f"Series margin must lie in [0, 1), got {self.margin}")

    @classmethod
    def from_config(cls, config) -> "SeriesConfig":
        return cls(
            tolerance=float(setting(config, "series.tolerance")),
            max_terms=int(setting(config, "series.maxTerms")),
            margin=float(setting(config, "series.margin")),
        )


DEFAULT_SERIES = SeriesConfig()


# ── Orthogonal polynomials ──────────────────────────────────────────


def laguerre(n: int, alpha) -> Poly:
    """Coefficients of L_n^(alpha)(t) in t.

    (k+1) L_{k+1} = (2k+1+alpha-t) L_k - (k+alpha) L_{k-1}
    """
    if n < 0:
        raise ParameterError(f"Laguerre degree must be >= 0, got {n}")
    alpha = rational(alpha)
    prev, cur = Poly.one(), Poly.of(1 + alpha, -1)
    if n == 0:
        return prev
    for k in range(1, n):
        nxt = (Poly.of(2 * k + 1 + alpha, -1) * cur - prev.scale(k + alpha)).scale(Fraction(1, k + 1))
        prev, cur = cur, nxt
    return cur


def laguerre_neg_arg(n: int, alpha) -> Poly:
    """Coefficients of L_n^(alpha)(-z) in z."""
    return laguerre(n, alpha).compose_linear(0, -1)


def _binom(r: Fraction, m: int) -> Fraction:
    """Generalized binomial coefficient C(r, m) for rational r."""
    out = Fraction(1)
    for j in range(m):
        out = out * (r - j) / (j + 1)
    return out


def jacobi_leading(n: int, a, b) -> Fraction:
    """Leading coefficient (n+a+b+1)_n / (2^n n!) of P_n^(a,b)."""
    a, b = rational(a), rational(b)
    out = Fraction(1)
    for j in range(n):
        out *= (n + a + b + 1 + j) / Fraction(2 * (j + 1))
    return out


def _jacobi_binomial_sum(n: int, a: Fraction, b: Fraction) -> Poly:
    minus = Poly.of(Fraction(-1, 2), Fraction(1, 2))  # (y-1)/2
    plus = Poly.of(Fraction(1, 2), Fraction(1, 2))  # (y+1)/2
    out = Poly.zero()
    for k in range(n + 1):
        term = Poly.constant(_binom(n + a, n - k) * _binom(n + b, k))
        for _ in range(k):
            term = term * minus
        for _ in range(n - k):
            term = term * plus
        out = out + term
    return out


def jacobi(n: int, a, b, strict: bool = True) -> Poly:
    """Coefficients of P_n^(a,b)(y) in y.

    The leading coefficient vanishes for negative integer values of
    n+a+b+1+j. With strict=True that raises DegreeCollapse; otherwise the
    explicit binomial sum gives the lower-degree polynomial.
    """
    if n < 0:
        raise ParameterError(f"Jacobi degree must be >= 0, got {n}")
    a, b = rational(a), rational(b)
    if jacobi_leading(n, a, b) == 0:
        if strict:
            raise DegreeCollapse(n, a, b)
        logger.debug("Jacobi P_%d^(%s,%s) collapses; using binomial sum", n, a, b)
        return _jacobi_binomial_sum(n, a, b)
    if n == 0:
        return Poly.one()
    prev = Poly.one()
    cur = Poly.of((a - b) / 2, (a + b + 2) / 2)
    for k in range(2, n + 1):
        s = 2 * k + a + b
        divisor = 2 * k * (k + a + b) * (s - 2)
        if divisor == 0:
            logger.warning("Jacobi recurrence singular at k=%d for a=%s b=%s; using binomial sum", k, a, b)
            return _jacobi_binomial_sum(n, a, b)
        nxt = (
            Poly.of(a * a - b * b, s * (s - 2)).scale(s - 1) * cur
            - prev.scale(2 * (k + a - 1) * (k + b - 1) * s)
        ).scale(1 / divisor)
        prev, cur = cur, nxt
    return cur


# ── Hypergeometric series ───────────────────────────────────────────


def _is_nonpositive_integer(v: float) -> bool:
    return v <= 0 and float(v).is_integer()


def _sum_series(ratio, cfg: SeriesConfig, label: str, floor: float = 0.0) -> float:
    """Sum 1 + sum_k t_k where t_{k+1} = t_k * ratio(k).

    Stops when the geometric tail bound |t_k| r/(1-r) falls below
    tolerance * |sum|, r being the next term ratio (at least `floor`).
    A term of exactly zero means the series terminated.
    """
    term = 1.0
    total = 1.0
    tail = math.inf
    for k in range(cfg.max_terms):
        term *= ratio(k)
        total += term
        if term == 0.0:
            logger.debug("%s terminated after %d terms", label, k + 1)
            return total
        r = max(abs(ratio(k + 1)), floor)
        if r < 1.0:
            tail = abs(term) * r / (1.0 - r)
            if tail <= cfg.tolerance * abs(total):
                logger.debug("%s converged after %d terms (tail %.3g)", label, k + 1, tail)
                return total
    raise SeriesNonConvergence(
        f"{label} did not converge within {cfg.max_terms} terms (last tail estimate {tail:.3g})",
        tail=tail,
        terms=cfg.max_terms,
    )


def hyp1f1(a: float, b: float, z: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Confluent hypergeometric 1F1(a; b; z) for real arguments.

    For z < 0 with a non-terminating series, Kummer's transformation
    1F1(a; b; z) = e^z 1F1(b-a; b; -z) keeps every term positive.
    """
    a, b, z = float(a), float(b), float(z)
    if _is_nonpositive_integer(b):
        raise DomainError(f"1F1 lower parameter b={b} is a nonpositive integer")
    if z == 0.0:
        return 1.0
    label = f"1F1({a:g}; {b:g}; {z:g})"
    if z < 0 and not _is_nonpositive_integer(a):
        aa = b - a
        return math.exp(z) * _sum_series(lambda k: (aa + k) / (b + k) * (-z) / (k + 1), cfg, label)
    return _sum_series(lambda k: (a + k) / (b + k) * z / (k + 1), cfg, label)


def hyp2f1(a: float, b: float, c: float, z: float, cfg: SeriesConfig = DEFAULT_SERIES) -> float:
    """Gauss hypergeometric 2F1(a, b; c; z) for |z| <= 1 - margin."""
    a, b, c, z = float(a), float(b), float(c), float(z)
    if _is_nonpositive_integer(c):
        raise DomainError(f"2F1 lower parameter c={c} is a nonpositive integer")
    if abs(z) > 1.0 - cfg.margin:
        raise DomainError(f"2F1 argument z={z} is within margin {cfg.margin} of the unit circle")
    if z == 0.0:
        return 1.0
    label = f"2F1({a:g}, {b:g}; {c:g}; {z:g})"
    return _sum_series(lambda k: ((a + k) * (b + k)) / ((c + k) * (k + 1)) * z, cfg, label, floor=abs(z))


def hyp_derivative(kind: str, params: Sequence[float], z: float, cfg: SeriesConfig = DEFAULT_SERIES, order: int = 1) -> float:
    """Analytic z-derivative of 1F1 (params = (a, b)) or 2F1 (params = (a, b, c)).

    d^m/dz^m 1F1(a; b; z) = (a)_m / (b)_m 1F1(a+m; b+m; z), and likewise
    (a)_m (b)_m / (c)_m 2F1(a+m, b+m; c+m; z).
    """
    if order < 0:
        raise ParameterError(f"Derivative order must be >= 0, got {order}")
    if kind == "1F1":
        a, b = (float(p) for p in params)
        factor = 1.0
        for j in range(order):
            factor *= (a + j) / (b + j)
        if factor == 0.0:
            return 0.0
        return factor * hyp1f1(a + order, b + order, z, cfg)
    if kind == "2F1":
        a, b, c = (float(p) for p in params)
        factor = 1.0
        for j in range(order):
            factor *= ((a + j) * (b + j)) / (c + j)
        if factor == 0.0:
            return 0.0
        return factor * hyp2f1(a + order, b + order, c + order, z, cfg)
    raise ParameterError(f"Unknown hypergeometric kind: {kind!r} (expected 1F1 or 2F1)")


# ── Gamma ───────────────────────────────────────────────────────────


def gamma_ratio(num_args: Sequence[float], den_args: Sequence[float]) -> float:
    """prod Gamma(num) / prod Gamma(den) via log-Gamma differences."""
    for v in list(num_args) + list(den_args):
        if _is_nonpositive_integer(float(v)):
            raise DomainError(f"Gamma pole at argument {v}")
    log_value = sum(special.gammaln(float(v)) for v in num_args) - sum(special.gammaln(float(v)) for v in den_args)
    sign = 1.0
    for v in list(num_args) + list(den_args):
        sign *= special.gammasgn(float(v))
    return float(sign * math.exp(log_value))

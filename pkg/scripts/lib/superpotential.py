"""Extended superpotential W = W0 + W1+ - W1- and its partner potentials.

W1± = psi±'/psi±. Both the term-by-term (full) and the reduced
construction of (V, V~) are kept so they can be compared against each other.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from lib.errors import DomainError
from lib.families import (
    MINUS,
    PLUS,
    Family,
    Params,
    ScalarFn,
    base_superpotential,
    deformation,
)
from lib.rational_poly import Poly
from lib.specfun import DEFAULT_SERIES, SeriesConfig

logger = logging.getLogger(__name__)


def log_derivative(psi: ScalarFn) -> ScalarFn:
    """psi'/psi, with derivative psi''/psi - (psi'/psi)^2."""

    def nonzero(x):
        v = psi(x)
        if np.any(v == 0) or not np.all(np.isfinite(v)):
            bad = np.atleast_1d(x)[np.atleast_1d((v == 0) | ~np.isfinite(v))][0]
            raise DomainError(f"{psi.name or 'psi'} vanishes or overflows at x={float(bad)}")
        return v

    def value(x):
        return psi.d(x) / nonzero(x)

    def deriv(x):
        v = nonzero(x)
        w = psi.d(x) / v
        return psi.d2(x) / v - w * w

    return ScalarFn(value, deriv, name=f"W1_{psi.name}")


@dataclass(frozen=True)
class PartnerPair:
    v: ScalarFn
    v_tilde: ScalarFn
    construction: str

    def values(self, xs):
        return self.v(xs), self.v_tilde(xs)


@dataclass(frozen=True)
class ExtendedSuperpotential:
    family: Family
    params: Params
    w0: ScalarFn
    psi_plus: ScalarFn
    psi_minus: ScalarFn

    @property
    def w1_plus(self) -> ScalarFn:
        return log_derivative(self.psi_plus)

    @property
    def w1_minus(self) -> ScalarFn:
        return log_derivative(self.psi_minus)

    def w(self) -> ScalarFn:
        w0, wp, wm = self.w0, self.w1_plus, self.w1_minus
        return ScalarFn(
            lambda x: w0(x) + wp(x) - wm(x),
            lambda x: w0.d(x) + wp.d(x) - wm.d(x),
            name="W",
        )

    def classical(self) -> PartnerPair:
        w0 = self.w0
        return PartnerPair(
            v=_fn(lambda x: w0(x) ** 2 - w0.d(x), "V0"),
            v_tilde=_fn(lambda x: w0(x) ** 2 + w0.d(x), "V0~"),
            construction="classical",
        )

    def partners_full(self) -> PartnerPair:
        """V, V~ assembled from W0, W1± term by term."""
        w0, wp, wm = self.w0, self.w1_plus, self.w1_minus

        def common(x):
            a, p, m = w0(x), wp(x), wm(x)
            return (
                a * a
                + p * p + wp.d(x)
                + m * m + wm.d(x)
                - 2 * a * m + 2 * a * p
                - 2 * m * p
            )

        return PartnerPair(
            v=_fn(lambda x: common(x) - w0.d(x) - 2 * wp.d(x), "V"),
            v_tilde=_fn(lambda x: common(x) + w0.d(x) - 2 * wm.d(x), "V~"),
            construction="full",
        )

    def partners_reduced(self) -> PartnerPair:
        """V = V0 - 2 W1+', V~ = V0~ - 2 W1-'."""
        base = self.classical()
        wp, wm = self.w1_plus, self.w1_minus
        return PartnerPair(
            v=_fn(lambda x: base.v(x) - 2 * wp.d(x), "V"),
            v_tilde=_fn(lambda x: base.v_tilde(x) - 2 * wm.d(x), "V~"),
            construction="reduced",
        )

    def with_psi(self, plus: Optional[ScalarFn] = None, minus: Optional[ScalarFn] = None) -> "ExtendedSuperpotential":
        return replace(self, psi_plus=plus or self.psi_plus, psi_minus=minus or self.psi_minus)


def _fn(value, name: str) -> ScalarFn:
    def no_derivative(x):
        raise DomainError(f"{name} carries no derivative")

    return ScalarFn(value, no_derivative, name=name)


def build(fam: Family, p: Params, series: SeriesConfig = DEFAULT_SERIES, checked: bool = True) -> ExtendedSuperpotential:
    return ExtendedSuperpotential(
        family=fam,
        params=p,
        w0=base_superpotential(fam, p),
        psi_plus=deformation(fam, p, PLUS, series=series, checked=checked),
        psi_minus=deformation(fam, p, MINUS, series=series, checked=checked),
    )


def full_superpotential(fam: Family, p: Params, series: SeriesConfig = DEFAULT_SERIES) -> ScalarFn:
    return build(fam, p, series).w()


def partner_pair_full(fam: Family, p: Params, series: SeriesConfig = DEFAULT_SERIES) -> PartnerPair:
    return build(fam, p, series).partners_full()


def partner_pair_reduced(fam: Family, p: Params, series: SeriesConfig = DEFAULT_SERIES) -> PartnerPair:
    return build(fam, p, series).partners_reduced()


def classical_partners(fam: Family, p: Params) -> PartnerPair:
    w0 = base_superpotential(fam, p)
    return ExtendedSuperpotential(fam, p, w0, w0, w0).classical()


def potentials_from_w(w: ScalarFn) -> PartnerPair:
    """(W^2 - W', W^2 + W') straight from a superpotential."""
    return PartnerPair(
        v=_fn(lambda x: w(x) ** 2 - w.d(x), "V"),
        v_tilde=_fn(lambda x: w(x) ** 2 + w.d(x), "V~"),
        construction="direct",
    )


# ── Gauge ───────────────────────────────────────────────────────────


def gauge_factor(psi: ScalarFn, gauge: Poly) -> ScalarFn:
    """chi = exp(int g) * psi, so that chi'/chi = psi'/psi + g."""
    g = gauge.to_floats()
    dg = gauge.derivative().to_floats()
    big_g = gauge.integral().to_floats()

    def value(x):
        return np.exp(npoly.polyval(x, big_g)) * psi(x)

    def deriv(x):
        return np.exp(npoly.polyval(x, big_g)) * (psi.d(x) + npoly.polyval(x, g) * psi(x))

    def deriv2(x):
        gx = npoly.polyval(x, g)
        return np.exp(npoly.polyval(x, big_g)) * (
            psi.d2(x) + 2 * gx * psi.d(x) + (npoly.polyval(x, dg) + gx * gx) * psi(x)
        )

    return ScalarFn(value, deriv, deriv2, name=f"chi_{psi.name}")


def gauged(ext: ExtendedSuperpotential, gauge: Poly, plus: bool = True, minus: bool = True) -> ExtendedSuperpotential:
    """Apply the gauge factor to one or both branches."""
    logger.debug("gauging %s with g(x) = %s (plus=%s, minus=%s)", ext.params.text(ext.family), gauge, plus, minus)
    return ext.with_psi(
        plus=gauge_factor(ext.psi_plus, gauge) if plus else None,
        minus=gauge_factor(ext.psi_minus, gauge) if minus else None,
    )

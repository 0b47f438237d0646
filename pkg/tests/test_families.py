"""Tests for scripts/lib/families.py."""

import math
from fractions import Fraction

import numpy as np
import pytest

from lib.errors import DegreeCollapse, DomainError, NodefulDeformation, ParameterError
from lib.families import (
    MINUS,
    PLUS,
    POLYNOMIAL_FAMILIES,
    Family,
    Params,
    ScalarFn,
    base_superpotential,
    check_domain,
    check_shift_orientation,
    couplings,
    deformation,
    deformation_poly,
    find_node,
    hyp_h_floor,
    in_window,
    inverse_shift,
    make_grid,
    make_params,
    normalization,
    ode_coefficients,
    parameter_shift,
    predicted_levels,
    scan_grid,
    series_x_max,
    shape_remainder,
    standard_grid,
    substitution,
)
from lib.rational_poly import Poly
from lib.specfun import DEFAULT_SERIES

# ── Helpers ──────────────────────────────────────────────────────────────────

RO = Family.RADIAL_OSCILLATOR
TRIG = Family.TRIG_DPT
HYP = Family.HYP_DPT
RO_CONTL = Family.RADIAL_OSCILLATOR_CONTL
TRIG_CONTL = Family.TRIG_DPT_CONTL


def assert_scaled_close(actual, expected, rel):
    """Relative agreement measured against the largest expected magnitude."""
    np.testing.assert_allclose(actual, expected, rtol=rel, atol=rel * np.max(np.abs(expected)))


def poly_params(fam, l):
    if fam is RO:
        return Params(g=Fraction(5, 2), l=l)
    if fam is TRIG:
        return Params(g=Fraction(7, 3), l=l, h=Fraction(5, 2))
    return Params(g=Fraction(7, 3), l=l, h=hyp_h_floor(l) + 1)


# ═══════════════════════════════════════════════════════════════════════════
# Family and Params
# ═══════════════════════════════════════════════════════════════════════════


class TestFamily:
    @pytest.mark.parametrize(
        "text,fam",
        [
            ("ro", RO),
            ("radial-oscillator", RO),
            ("TRIG_DPT", TRIG),
            ("hdpt", HYP),
            ("ro-contl", RO_CONTL),
            ("trig-dpt-contl", TRIG_CONTL),
        ],
    )
    def test_parse(self, text, fam):
        assert Family.parse(text) is fam

    def test_parse_unknown(self):
        with pytest.raises(ParameterError, match="Unknown family"):
            Family.parse("morse")

    def test_properties(self):
        assert RO.kind == "radial" and not RO.has_h
        assert TRIG_CONTL.continuous and TRIG_CONTL.kind == "trigonometric"
        assert TRIG.domain == (0.0, math.pi / 2)
        assert HYP.domain == (0.0, math.inf)


class TestMakeParams:
    def test_polynomial_family_is_exact(self):
        p = make_params(RO, "5/2", "3")
        assert p == Params(g=Fraction(5, 2), l=3)
        assert isinstance(p.l, int)

    def test_continuous_family_is_float(self):
        p = make_params(RO_CONTL, "3", "1.5")
        assert p == Params(g=3.0, l=1.5)

    def test_fractional_l_rejected_for_polynomials(self):
        with pytest.raises(ParameterError, match="integer l"):
            make_params(RO, "3", "3/2")

    def test_h_required(self):
        with pytest.raises(ParameterError, match="needs an h"):
            make_params(TRIG, "3", "1")

    def test_h_forbidden(self):
        with pytest.raises(ParameterError, match="takes no h"):
            make_params(RO, "3", "1", "2")

    def test_continuous_l_positive(self):
        with pytest.raises(ParameterError, match="l > 0"):
            make_params(RO_CONTL, "3", "0")

    def test_to_dict(self):
        p = make_params(TRIG, "5/2", 1, "7/2")
        assert p.to_dict() == {"g": "5/2", "h": "7/2", "l": "1"}

    def test_outside_window_nodeless_accepted(self):
        # g < 3/2, but L_1 at -z stays positive for both branches
        assert make_params(RO, "1", "1") == Params(g=Fraction(1), l=1)

    def test_outside_window_nodeful_rejected(self):
        # psi_minus = -1/2 + z changes sign at x = 1/sqrt(2)
        with pytest.raises(NodefulDeformation):
            make_params(RO, "-1", "1")

    def test_validate_false_skips_scan(self):
        assert make_params(RO, "-1", "1", validate=False).g == -1


class TestWindow:
    def test_floor(self):
        assert in_window(RO, Params(g=Fraction(3, 2), l=4))
        assert not in_window(RO, Params(g=Fraction(1), l=4))

    def test_trig_needs_h(self):
        assert not in_window(TRIG, Params(g=Fraction(2), l=1, h=Fraction(1)))

    def test_hyp_floor(self):
        assert hyp_h_floor(1) == Fraction(5, 2)
        assert hyp_h_floor(8) == Fraction(15)
        assert in_window(HYP, Params(g=Fraction(2), l=8, h=Fraction(15)))
        assert not in_window(HYP, Params(g=Fraction(2), l=8, h=Fraction(19, 2)))

    def test_continuous_trig_always_scanned(self):
        assert not in_window(TRIG_CONTL, Params(g=30.0, l=1.0, h=30.0))


# ═══════════════════════════════════════════════════════════════════════════
# Base superpotential and substitution
# ═══════════════════════════════════════════════════════════════════════════


class TestBaseSuperpotential:
    def test_couplings(self):
        assert couplings(TRIG, Params(g=Fraction(2), l=1, h=Fraction(3))) == (3, 4)
        assert couplings(HYP, Params(g=Fraction(2), l=1, h=Fraction(3))) == (3, 2)
        assert couplings(RO, Params(g=Fraction(2), l=1)) == (3, None)

    @pytest.mark.parametrize("fam", list(Family))
    def test_derivative_matches_differences(self, fam, sample_params, fd_derivative):
        w0 = base_superpotential(fam, sample_params[fam])
        xs = np.linspace(0.2, 1.2, 11)
        assert_scaled_close(w0.d(xs), fd_derivative(w0, xs), 1e-7)

    def test_radial_value(self):
        w0 = base_superpotential(RO, Params(g=Fraction(2), l=1))
        assert w0(np.array([1.5]))[0] == pytest.approx(-1.5 + 3 / 1.5)

    def test_outside_domain(self):
        w0 = base_superpotential(TRIG, Params(g=Fraction(2), l=1, h=Fraction(2)))
        with pytest.raises(DomainError, match="outside"):
            w0(np.array([2.0]))


class TestSubstitution:
    @pytest.mark.parametrize("kind_fam", [RO, TRIG, HYP])
    def test_kernel_polys(self, kind_fam):
        sub = substitution(kind_fam)
        xs = np.linspace(0.1, 1.4, 9)
        s, ds = sub(xs)
        a = np.polynomial.polynomial.polyval(s, sub.a_poly.to_floats())
        b = np.polynomial.polynomial.polyval(s, sub.b_poly.to_floats())
        np.testing.assert_allclose(a, ds**2, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(b, sub.second(xs), rtol=1e-12, atol=1e-12)
        for fn, poly in zip(sub.basis, sub.basis_polys):
            np.testing.assert_allclose(
                np.polynomial.polynomial.polyval(s, poly.to_floats()), fn(xs) * ds, rtol=1e-12, atol=1e-12
            )


# ═══════════════════════════════════════════════════════════════════════════
# Deformations
# ═══════════════════════════════════════════════════════════════════════════


class TestDeformationPoly:
    def test_radial_degree_one(self):
        p = Params(g=Fraction(3), l=1)
        assert deformation_poly(RO, p, MINUS) == Poly.of(Fraction(7, 2), 1)
        assert deformation_poly(RO, p, PLUS) == Poly.of(Fraction(9, 2), 1)

    def test_l_zero_is_one(self):
        for fam in POLYNOMIAL_FAMILIES:
            for branch in (PLUS, MINUS):
                assert deformation_poly(fam, poly_params(fam, 0), branch) == Poly.one()

    @pytest.mark.parametrize("fam", POLYNOMIAL_FAMILIES)
    @pytest.mark.parametrize("l", [1, 3, 6])
    def test_minus_at_a_is_plus_at_shift(self, fam, l):
        p = poly_params(fam, l)
        q = parameter_shift(fam, p, validate=False)
        assert deformation_poly(fam, p, MINUS) == deformation_poly(fam, q, PLUS)

    @pytest.mark.parametrize("fam", POLYNOMIAL_FAMILIES)
    def test_degree_is_l(self, fam):
        assert deformation_poly(fam, poly_params(fam, 4), PLUS).degree == 4

    def test_collapsed_jacobi_drops_to_lower_degree(self):
        # g = h at l = 1: n + a + b + 1 = 0 on both branches
        p = Params(g=Fraction(3), l=1, h=Fraction(3))
        assert deformation_poly(TRIG, p, MINUS) == Poly.constant(Fraction(-7, 2))
        assert deformation_poly(TRIG, p, PLUS) == Poly.constant(Fraction(-9, 2))

    def test_collapsed_jacobi_strict(self):
        with pytest.raises(DegreeCollapse):
            deformation_poly(TRIG, Params(g=Fraction(3), l=1, h=Fraction(3)), MINUS, strict=True)

    def test_identically_zero_branch(self):
        with pytest.raises(NodefulDeformation, match="identically"):
            deformation_poly(TRIG, Params(g=Fraction(-1, 2), l=1, h=Fraction(-1, 2)), MINUS)

    def test_collapsed_params_accepted(self):
        p = make_params(TRIG, "3", 1, "3")
        assert parameter_shift(TRIG, p) == Params(g=Fraction(2), l=1, h=Fraction(2))
        assert deformation_poly(TRIG, parameter_shift(TRIG, p), PLUS) == deformation_poly(TRIG, p, MINUS)

    def test_continuous_family_has_no_poly(self):
        with pytest.raises(ParameterError):
            deformation_poly(RO_CONTL, Params(g=3.0, l=1.5), MINUS)

    def test_unknown_branch(self):
        with pytest.raises(ParameterError, match="branch"):
            deformation_poly(RO, Params(g=Fraction(3), l=1), "up")


class TestDeformation:
    @pytest.mark.parametrize("fam", list(Family))
    def test_derivatives_match_differences(self, fam, sample_params, fd_derivative):
        xs = np.linspace(0.2, 1.2, 11)
        for branch in (PLUS, MINUS):
            psi = deformation(fam, sample_params[fam], branch)
            assert_scaled_close(psi.d(xs), fd_derivative(psi, xs), 1e-6)
            assert_scaled_close(psi.d2(xs), fd_derivative(psi.d, xs), 1e-6)

    def test_normalized_series_matches_laguerre(self):
        # at integer l the normalized 1F1 deformation is the Laguerre polynomial
        xs = np.linspace(0.1, 3.0, 15)
        for branch in (PLUS, MINUS):
            series = deformation(RO_CONTL, Params(g=3.0, l=2.0), branch, normalized=True)
            poly = deformation(RO, Params(g=Fraction(3), l=2), branch)
            np.testing.assert_allclose(series(xs), poly(xs), rtol=1e-12)

    def test_normalization_value(self):
        # Gamma(g+2l-1/2) / (Gamma(l+1) Gamma(g+l-1/2)) with g=3, l=1: Gamma(4.5)/Gamma(3.5) = 3.5
        assert normalization(RO_CONTL, Params(g=3.0, l=1.0), MINUS) == pytest.approx(3.5, rel=1e-13)

    def test_trig_chart_is_continuous_at_pi_over_4(self):
        psi = deformation(TRIG, Params(g=Fraction(5, 2), l=3, h=Fraction(7, 2)), MINUS)
        left, right = psi(np.array([math.pi / 4])), psi(np.array([math.pi / 4 + 1e-12]))
        assert left[0] == pytest.approx(right[0], rel=1e-9)

    def test_positive_on_scan(self, sample_params):
        for fam in Family:
            xs = scan_grid(fam)
            for branch in (PLUS, MINUS):
                assert np.all(deformation(fam, sample_params[fam], branch)(xs) > 0)


class TestNodes:
    def test_find_node_sign_change(self):
        xs = np.array([0.0, 1.0, 2.0, 3.0])
        assert find_node(np.array([1.0, 0.5, -0.5, -1.0]), xs) == 1.5

    def test_find_node_exact_zero(self):
        xs = np.array([0.0, 1.0, 2.0])
        assert find_node(np.array([1.0, 0.0, 1.0]), xs) == 1.0

    def test_find_node_none(self):
        assert find_node(np.array([1.0, 2.0]), np.array([0.0, 1.0])) is None

    def test_scalar_fn_without_second_derivative(self):
        fn = ScalarFn(np.sin, np.cos, name="sin")
        with pytest.raises(DomainError, match="second derivative"):
            fn.d2(0.3)


# ═══════════════════════════════════════════════════════════════════════════
# Shifts, remainders and ODE coefficients
# ═══════════════════════════════════════════════════════════════════════════


class TestShifts:
    def test_parameter_shift(self):
        assert parameter_shift(RO, Params(g=Fraction(3), l=1)) == Params(g=Fraction(2), l=1)
        assert parameter_shift(TRIG, Params(g=Fraction(3), l=1, h=Fraction(3))) == Params(g=Fraction(2), l=1, h=Fraction(2))
        assert parameter_shift(HYP, Params(g=Fraction(3), l=1, h=Fraction(4))) == Params(g=Fraction(2), l=1, h=Fraction(5))

    def test_inverse_shift_undoes_shift(self, sample_params):
        for fam, p in sample_params.items():
            assert inverse_shift(fam, parameter_shift(fam, p, validate=False)) == p

    def test_remainders(self):
        assert shape_remainder(RO, Params(g=Fraction(3), l=2)) == -4
        assert shape_remainder(TRIG, Params(g=Fraction(5, 2), l=1, h=Fraction(7, 2))) == -28
        assert shape_remainder(HYP, Params(g=Fraction(7, 3), l=1, h=Fraction(5))) == Fraction(-20, 3)
        assert shape_remainder(RO_CONTL, Params(g=3.0, l=1.5)) == -4.0

    def test_predicted_levels(self):
        assert predicted_levels(RO, Params(g=Fraction(3), l=1), 4) == [0.0, 4.0, 8.0, 12.0]
        assert predicted_levels(TRIG, Params(g=Fraction(5, 2), l=1, h=Fraction(7, 2)), 3) == [0.0, 36.0, 80.0]

    @pytest.mark.parametrize("fam", list(Family))
    def test_orientation_agrees(self, fam):
        check = check_shift_orientation(fam)
        assert check.agree
        assert check.from_pairing == 1
        assert check.to_dict()["agree"] is True


class TestOdeCoefficients:
    def test_radial(self):
        c = ode_coefficients(RO, Params(g=Fraction(3), l=2), PLUS)
        assert (c.lam, c.c1, c.c2) == (8, -5, -1)
        c = ode_coefficients(RO, Params(g=Fraction(3), l=2), MINUS)
        assert (c.lam, c.c1, c.c2) == (8, -4, -1)

    def test_trig(self):
        c = ode_coefficients(TRIG, Params(g=Fraction(5, 2), l=1, h=Fraction(7, 2)), MINUS)
        # lam = 4 l (g - h - l + 1), G = g + l, H - 1 = h + l - 1
        assert (c.lam, c.c1, c.c2) == (-4, Fraction(7, 2), Fraction(7, 2))


# ═══════════════════════════════════════════════════════════════════════════
# Grids
# ═══════════════════════════════════════════════════════════════════════════


class TestGrids:
    def test_radial_standard_grid(self):
        xs = standard_grid(RO)
        assert xs.size == 60
        assert xs[0] == pytest.approx(0.05) and xs[-1] == pytest.approx(4.0)

    def test_trig_standard_grid_stays_inside(self):
        xs = standard_grid(TRIG)
        assert xs[-1] == pytest.approx(math.pi / 2 - 0.05)

    def test_continuous_trig_grid_clipped(self, caplog):
        xs = standard_grid(TRIG_CONTL)
        assert xs[-1] <= series_x_max(DEFAULT_SERIES)
        assert "Clipping" in caplog.text

    def test_grid_from_config(self):
        xs = standard_grid(HYP, {"grids": {"hyperbolic": {"min": 0.5, "max": 2.0, "n": 4, "spacing": "linear"}}})
        np.testing.assert_allclose(xs, [0.5, 1.0, 1.5, 2.0])

    def test_make_grid_errors(self):
        with pytest.raises(DomainError):
            make_grid(RO, 0.1, 1.0, 1)
        with pytest.raises(DomainError):
            make_grid(RO, 1.0, 0.1, 10)
        with pytest.raises(DomainError, match="spacing"):
            make_grid(RO, 0.1, 1.0, 10, "cubic")

    def test_check_domain(self):
        with pytest.raises(DomainError):
            check_domain(RO, [0.0, 1.0])
        with pytest.raises(DomainError):
            check_domain(TRIG, [0.5, math.pi / 2])
        with pytest.raises(DomainError):
            check_domain(HYP, [np.nan])

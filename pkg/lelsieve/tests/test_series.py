from fractions import Fraction

import mpmath
import pytest

from lelsieve.lattice import anchored_multiplicity, enumerate_polygons, parse_sap
from lelsieve.powerseries import RatSeries, series_matrix_det
from lelsieve.series import (
    alpha,
    closed_form_check,
    closed_form_series_order,
    convergence_slope,
    elliptic_e,
    elliptic_k,
    f_w,
    mu_tilde,
    r_series,
    ratio_convergence,
    resolvent_entry_series,
    rp_series_infinite,
    rp_series_torus,
    torus,
    zeta_tilde,
)
from lelsieve.verify import golden


def test_closed_walk_series():
    assert r_series(6).coeffs == [1, 0, 4, 0, 36, 0, 400]


def test_resolvent_entries():
    assert resolvent_entry_series(1, 0, 3).coeffs == [0, 1, 0, 9]
    assert resolvent_entry_series(0, 0, 4) == r_series(4)
    assert resolvent_entry_series(-2, 1, 7) == resolvent_entry_series(1, 2, 7)
    assert resolvent_entry_series(1, 1, 1).coeffs == [0, 0]


@pytest.mark.parametrize("name", ["edge", "square"])
def test_published_coefficients(name: str):
    entry = golden()["series"][name]
    want = {int(k): v for k, v in entry["coefficients"].items()}
    series = rp_series_infinite(parse_sap(entry["steps"]), max(want))
    assert {k: series[k] for k in want} == want
    assert all(series[k] == 0 for k in range(parse_sap(entry["steps"]).length))


def test_series_below_polygon_length():
    assert rp_series_infinite(parse_sap("RULD"), 3).coeffs == [0, 0, 0, 0]


def test_rooted_hike_series():
    g = golden()
    zeta = zeta_tilde(12)
    mu = mu_tilde(12)
    assert zeta.coeffs == g["zeta_tilde"]["coefficients"]
    assert mu.coeffs == g["mu_tilde"]["coefficients"]
    assert zeta * mu == RatSeries.const(1, 12)


def test_alpha():
    assert float(alpha(64)) == pytest.approx(0.8025, abs=5e-5)
    with mpmath.workprec(200):
        want = mpmath.exp(4 * mpmath.catalan / mpmath.pi) / 4
        assert abs(alpha(160).value - want) < mpmath.mpf(2) ** -150


def test_walk_density():
    assert f_w(4) == Fraction(9, 64)
    assert f_w(3) == 0
    assert f_w(-2) == 0


def test_completeness():
    # every closed walk of length l has exactly one last erased loop
    order = 10
    total = RatSeries([], order)
    for length in range(2, order + 1, 2):
        for p in enumerate_polygons(length):
            total = total + anchored_multiplicity(p) * rp_series_infinite(p, order)
    r = r_series(order)
    assert total.coeffs[1:] == r.coeffs[1:]


def test_series_determinant():
    z = RatSeries.z(4)
    one = RatSeries.const(1, 4)
    rows = [[one + z, z], [z, one]]
    assert series_matrix_det(rows).coeffs == [1, 1, -1, 0, 0]


@pytest.mark.parametrize("steps", ["RL", "RULD"])
def test_ratios_converge_like_inverse_length(steps: str):
    rows = ratio_convergence(parse_sap(steps), 40)
    assert rows[0].length == len(steps)
    assert rows[-1].length == 40
    assert all(abs(r.scaled_error) < 2 for r in rows)
    assert convergence_slope(rows) == pytest.approx(-1, abs=0.3)


def test_ratio_against_given_limit():
    rows = ratio_convergence(parse_sap("RL"), 4, limit=0.125)
    assert [r.ratio for r in rows] == [Fraction(1, 4), Fraction(7, 36)]
    assert rows[0].scaled_error == pytest.approx(0.25)


def test_convergence_slope_needs_points():
    rows = ratio_convergence(parse_sap("RL"), 10)
    with pytest.raises(ValueError):
        convergence_slope(rows)


def test_elliptic_integrals():
    with mpmath.workdps(30):
        assert elliptic_k(0) == mpmath.pi / 2
        assert abs(elliptic_k(mpmath.mpf("0.16")) - mpmath.ellipk(mpmath.mpf("0.16"))) < 1e-25
        assert abs(elliptic_e(mpmath.mpf("0.16")) - mpmath.ellipe(mpmath.mpf("0.16"))) < 1e-25


def test_closed_form_order():
    assert closed_form_series_order(0.1, 1e-9) == 23
    assert closed_form_series_order(0) == 0
    with pytest.raises(ValueError):
        closed_form_series_order(0.25)


@pytest.mark.parametrize("which", ["edge", "square"])
def test_closed_forms_agree(which: str):
    series, closed = closed_form_check(which, 0.1)
    assert series == pytest.approx(closed, abs=1e-8)


def test_edge_closed_form_value():
    series, _ = closed_form_check("edge", 0.1)
    assert series == pytest.approx(0.0107792, abs=2e-6)


def test_torus_series_matches_lattice_before_wrapping():
    p = parse_sap("RL")
    assert rp_series_torus(torus(8), p, 6) == rp_series_infinite(p, 6)

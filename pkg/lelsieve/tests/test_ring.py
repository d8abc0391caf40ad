import random
from fractions import Fraction

import mpmath
import pytest

from lelsieve.linalg import bareiss_det, leverrier, leverrier_det, newton_interpolate
from lelsieve.ring import BigFloat, PiPoly, check_precision

SAMPLES = [
    PiPoly.parse("1/2 - 3/pi"),
    PiPoly.parse("-1 + 5/7/pi^2"),
    PiPoly.linear(2, -4),
    PiPoly.const(Fraction(-3, 8)),
    PiPoly(),
]


def test_parse_and_format():
    p = PiPoly.parse("1/2 - 3/pi + 5/7/pi^2")
    assert p.coeffs == (Fraction(1, 2), Fraction(-3), Fraction(5, 7))
    assert str(p) == "1/2 - 3/pi + 5/7/pi^2"
    assert PiPoly.parse(str(p)) == p


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        PiPoly.parse("1/2 * pi")
    with pytest.raises(ValueError):
        PiPoly.parse("1 2/pi")


def test_canonical_zero():
    z = PiPoly([0, 0, 0])
    assert z == PiPoly()
    assert z == 0
    assert not z
    assert z.degree == -1
    assert str(z) == "0"


@pytest.mark.parametrize("a", SAMPLES)
@pytest.mark.parametrize("b", SAMPLES)
def test_ring_axioms(a: PiPoly, b: PiPoly):
    c = PiPoly.parse("7 - 1/pi^3")
    assert a + b == b + a
    assert a * b == b * a
    assert a * (b + c) == a * b + a * c
    assert (a + b) - b == a
    assert a * 1 == a
    assert a + 0 == a


def _random_poly(rng: random.Random) -> PiPoly:
    return PiPoly(Fraction(rng.randint(-50, 50), rng.randint(1, 12)) for _ in range(rng.randint(0, 4)))


def test_evaluation_is_a_ring_homomorphism():
    rng = random.Random(1729)
    for _ in range(200):
        a, b = _random_poly(rng), _random_poly(rng)
        chi = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        assert (a * b).at(chi) == a.at(chi) * b.at(chi)
        assert (a - b).at(chi) == a.at(chi) - b.at(chi)
        assert PiPoly.parse(str(a)) == a


def test_scalar_division():
    p = PiPoly.linear(3, 6)
    assert p.exact_div(3) == PiPoly.linear(1, 2)
    with pytest.raises(ZeroDivisionError):
        p.exact_div(0)


def test_from_pi_polynomial_unit_square():
    # 128 (pi - 2) / (4^4 pi^3) = chi^2 / 2 - chi^3
    p = PiPoly.from_pi_polynomial([-256, 128], 256, 3)
    assert p.coeffs == (0, 0, Fraction(1, 2), -1)
    assert float(p) == pytest.approx(0.018409, abs=5e-6)


def test_from_pi_polynomial_needs_room():
    with pytest.raises(ValueError):
        PiPoly.from_pi_polynomial([1, 2, 3], 1, 1)


def test_evaluate_matches_mpmath():
    p = PiPoly.parse("1 - 4/pi + 3/pi^2")
    got = p.evaluate(200)
    with mpmath.workprec(240):
        want = 1 - 4 / mpmath.pi + 3 / mpmath.pi**2
    assert got.precision == 200
    assert abs(float(got.value - want)) < 1e-55


def test_evaluate_resolves_cancellation():
    # large coefficients nearly cancelling at chi = 1/pi
    big = 10**40
    p = PiPoly([big, -big * 3]) + PiPoly.const(1)
    value = p.evaluate(64)
    with mpmath.workprec(400):
        want = big + 1 - 3 * big / mpmath.pi
    assert float(value) == pytest.approx(float(want), rel=1e-15)


def test_at_rational_chi():
    p = PiPoly([1, 2, 3])
    assert p.at(Fraction(1, 2)) == Fraction(11, 4)


def test_check_precision_clamps():
    with pytest.warns(UserWarning):
        assert check_precision(20) == 53
    assert check_precision(128) == 128


def test_bigfloat_arithmetic():
    a = BigFloat.of(1, 64)
    b = BigFloat.of(3, 128)
    assert float(a + Fraction(1, 2)) == 1.5
    assert (a / b).precision == 64
    assert float(a - b) == -2.0
    assert (-a) < a
    assert abs(-a).value == 1
    assert BigFloat.from_log(0, -1, 53).value == -1


def test_bigfloat_tiny_values():
    v = BigFloat.from_log(-1000, 1, 80)
    assert v.log10() == pytest.approx(-1000 / 2.302585092994046, rel=1e-12)
    assert float(v) == 0.0
    assert "e-435" in v.to_decimal(5)


def test_bareiss_det():
    assert bareiss_det([[2, 1], [1, 3]]) == 5
    assert bareiss_det([[0, 1], [1, 0]]) == -1
    assert bareiss_det([[1, 2], [2, 4]]) == 0
    assert bareiss_det([[Fraction(1, 2), 1], [0, 4]]) == 2
    assert bareiss_det([]) == 1
    m = [[2, -1, 0, 0], [-1, 2, -1, 0], [0, -1, 2, -1], [0, 0, -1, 2]]
    assert bareiss_det(m) == 5


def test_leverrier_charpoly_and_adjugate():
    coeffs, adj = leverrier([[2, 1], [1, 3]])
    assert coeffs == [5, -5, 1]
    assert adj == [[3, -1], [-1, 2]]
    assert leverrier_det([[2, 1], [1, 3]]) == 5


def test_leverrier_over_pi_polys():
    chi = PiPoly.chi()
    m = [[PiPoly.const(1), chi], [chi, PiPoly.const(2)]]
    zero, one = PiPoly(), PiPoly.const(1)
    det = leverrier_det(m, zero, one)
    assert det == PiPoly([2, 0, -1])


def test_newton_interpolate():
    assert newton_interpolate([0, 1, 2], [1, 3, 7]) == [1, 1, 1]
    coeffs = newton_interpolate([0, 1, 2, 3], [Fraction(0), 1, 8, 27])
    assert coeffs == [0, 0, 0, 1]

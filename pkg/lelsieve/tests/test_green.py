from fractions import Fraction

import numpy as np
import pytest

from lelsieve.green import CTable, c_entry, c_entry_numeric, c_matrix, numeric_c_matrix
from lelsieve.lattice import build_patch, parse_sap, rectangle
from lelsieve.ring import PiPoly


def test_seed_values():
    assert c_entry(0, 0) == 0
    assert c_entry(1, 0) == -1
    assert c_entry(1, 1) == PiPoly.linear(0, -4)
    assert c_entry(2, 0) == PiPoly.linear(-4, 8)
    assert c_entry(2, 1) == PiPoly.linear(1, -8)
    assert c_entry(2, 2) == PiPoly.linear(0, Fraction(-16, 3))


def test_symmetry():
    for dx in range(-4, 5):
        for dy in range(-4, 5):
            e = c_entry(dx, dy)
            assert c_entry(-dx, dy) == e
            assert c_entry(dy, dx) == e


def test_harmonic_with_unit_source_at_origin():
    for x in range(0, 7):
        for y in range(0, 7):
            around = c_entry(x + 1, y) + c_entry(x - 1, y) + c_entry(x, y + 1) + c_entry(x, y - 1)
            delta = 4 if (x, y) == (0, 0) else 0
            assert 4 * c_entry(x, y) == around + delta


def test_diagonal_sum_starts_at_zero():
    for m in range(1, 8):
        want = -4 * sum(Fraction(1, 2 * k + 1) for k in range(m))
        assert c_entry(m, m) == PiPoly.linear(0, want)


def test_two_sided_recursion_fails_on_the_diagonal():
    # lambda C(m,n) = sum over N(n) of C(m,i) + sum over N(m) of C(j,n), at m = n = 0
    lhs = 4 * c_entry(0, 0)
    rhs = sum((c_entry(dx, dy) for dx, dy in [(1, 0), (-1, 0), (0, 1), (0, -1)]), PiPoly()) * 2
    assert lhs == 0
    assert rhs == -8


def test_second_neighbour_identity():
    assert 4 * c_entry(2, 0) + 8 * c_entry(1, 1) == -16


@pytest.mark.parametrize(("dx", "dy"), [(1, 0), (1, 1), (2, 1), (3, 0)])
def test_integral_agrees(dx: int, dy: int):
    assert c_entry_numeric(dx, dy) == pytest.approx(float(c_entry(dx, dy)), abs=1e-8)


def test_integral_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        c_entry_numeric(1, 0, quadrature_tol=0)


def test_table_growth_and_rows():
    table = CTable(radius=2)
    assert table.radius == 2
    rows = list(table.as_rows(2))
    assert len(rows) == 6
    assert rows[0] == (0, 0, 0, 0)
    assert rows[1] == (1, 0, -1, 0)
    table.entry(5, 3)
    assert table.radius >= 5


def test_c_matrix_shape():
    patch = build_patch(parse_sap("RL"))
    m = c_matrix(patch)
    assert len(m) == patch.size
    assert all(m[i][i] == 0 for i in range(patch.size))
    assert m[0][1] == -1


def test_numeric_matrix_matches_exact():
    patch = build_patch(rectangle(2, 1))
    exact = c_matrix(patch)
    want = np.array([[float(e) for e in row] for row in exact])
    got = numeric_c_matrix(patch)
    np.testing.assert_allclose(got, want, atol=1e-14)
    mp = numeric_c_matrix(patch, precision=128)
    assert float(mp[2, 5]) == pytest.approx(want[2, 5], abs=1e-14)

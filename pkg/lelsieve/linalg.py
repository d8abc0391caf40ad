"""Exact linear algebra over integers, rationals and Q[chi]

Dense matrices are plain lists of rows. The routines are generic over any
commutative ring whose elements support ``+ - *``; the only division performed is
either exact (Bareiss) or by small integers (Faddeev-LeVerrier).
"""
from __future__ import annotations

from fractions import Fraction
from typing import Any, Callable, List, Sequence, TypeVar

from typing_extensions import TypeAlias

T = TypeVar("T")
Matrix: TypeAlias = List[List[Any]]


def identity(n: int, one: Any = 1, zero: Any = 0) -> Matrix:
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def matmul(a: Sequence[Sequence[T]], b: Sequence[Sequence[T]], zero: Any = 0) -> Matrix:
    cols = list(zip(*b))
    out: Matrix = []
    for row in a:
        nz = [(k, x) for k, x in enumerate(row) if x]
        out.append([sum((x * col[k] for k, x in nz), zero) for col in cols])
    return out


def bareiss_det(matrix: Sequence[Sequence[Any]]) -> Any:
    """Fraction-free determinant.

    Every division in the elimination is exact, so integer input stays integer
    throughout and the intermediate entries are themselves minors of the input.
    Rows are swapped when a pivot vanishes.

    Parameters
    ----------
    matrix : square list of rows
        Integer (or rational) entries. Not modified.

    Returns
    -------
    int or Fraction
        The determinant.
    """
    m = [list(row) for row in matrix]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        row_k = m[k]
        for i in range(k + 1, n):
            row_i = m[i]
            lead = row_i[k]
            for j in range(k + 1, n):
                v = row_i[j] * pivot - lead * row_k[j]
                row_i[j] = v // prev if isinstance(v, int) else v / prev
            row_i[k] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def _div_int(x: Any, k: int) -> Any:
    exact_div: Callable[[int], Any] | None = getattr(x, "exact_div", None)
    if exact_div is not None:
        return exact_div(k)
    return Fraction(x) / k


def leverrier(
    matrix: Sequence[Sequence[Any]], zero: Any = 0, one: Any = 1
) -> tuple[list[Any], Matrix]:
    """Characteristic polynomial and adjugate by the Faddeev-LeVerrier iteration.

    Works over any commutative ring containing Q: the divisions are by the
    integers 1..n only.

    Returns
    -------
    charpoly : list
        ``c_0, ..., c_n`` with ``det(x I - A) = sum(c_k x^k)`` and ``c_n = 1``.
    adjugate : list of rows
        ``adj(A)``, satisfying ``A adj(A) = det(A) I``.
    """
    a = [list(row) for row in matrix]
    n = len(a)
    coeffs: list[Any] = [zero] * (n + 1)
    coeffs[n] = one
    if n == 0:
        return coeffs, []
    m_k: Matrix = identity(n, zero, zero)
    m_prev: Matrix = m_k
    for k in range(1, n + 1):
        am = matmul(a, m_prev, zero) if k > 1 else identity(n, zero, zero)
        m_k = [
            [am[i][j] + (coeffs[n - k + 1] if i == j else zero) for j in range(n)]
            for i in range(n)
        ]
        am_k = matmul(a, m_k, zero)
        trace = sum((am_k[i][i] for i in range(n)), zero)
        coeffs[n - k] = _div_int(-trace, k)
        m_prev = m_k
    sign = one if (n - 1) % 2 == 0 else -one
    adj = [[sign * x for x in row] for row in m_k]
    return coeffs, adj


def leverrier_det(matrix: Sequence[Sequence[Any]], zero: Any = 0, one: Any = 1) -> Any:
    coeffs, _ = leverrier(matrix, zero, one)
    n = len(matrix)
    return coeffs[0] if n % 2 == 0 else -coeffs[0]


def newton_interpolate(xs: Sequence[int | Fraction], ys: Sequence[Any]) -> list[Fraction]:
    """Monomial coefficients of the polynomial through ``(xs[i], ys[i])``.

    Divided differences are taken over Q, so the result is exact.
    """
    if len(xs) != len(ys):
        raise ValueError("xs and ys differ in length")
    n = len(xs)
    table = [Fraction(y) for y in ys]
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            table[i] = (table[i] - table[i - 1]) / (xs[i] - xs[i - level])
    coeffs = [Fraction(0)] * n
    # Horner expansion of the Newton form, highest divided difference first
    for i in range(n - 1, -1, -1):
        for j in range(n - 1, 0, -1):
            coeffs[j] = coeffs[j - 1] - xs[i] * coeffs[j]
        coeffs[0] = table[i] - xs[i] * coeffs[0]
    return coeffs

"""Truncated power series with exact rational coefficients

A ``RatSeries`` of order L knows its coefficients of ``z^0 .. z^L``; higher
coefficients are unknown, not zero. Combining series of different orders gives
the lower order.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, List, Optional, Sequence, Union

import mpmath
from typing_extensions import TypeAlias

from lelsieve.ring import DEFAULT_PRECISION, BigFloat

Coefficient: TypeAlias = Union[int, Fraction]


def _norm(c: Coefficient) -> Coefficient:
    if isinstance(c, Fraction) and c.denominator == 1:
        return c.numerator
    return c


class RatSeries:
    __slots__ = ("_c", "order")

    def __init__(self, coeffs: Iterable[Coefficient], order: int):
        if order < 0:
            raise ValueError("order must be non-negative")
        cs = [_norm(c) for c, _ in zip(coeffs, range(order + 1))]
        cs.extend([0] * (order + 1 - len(cs)))
        self._c: List[Coefficient] = cs
        self.order = order

    @classmethod
    def const(cls, value: Coefficient, order: int) -> RatSeries:
        return cls([value], order)

    @classmethod
    def z(cls, order: int) -> RatSeries:
        return cls([0, 1], order)

    @property
    def coeffs(self) -> List[Coefficient]:
        return list(self._c)

    def __getitem__(self, k: int) -> Coefficient:
        if k < 0:
            return 0
        if k > self.order:
            raise IndexError(f"coefficient z^{k} beyond order {self.order}")
        return self._c[k]

    def __iter__(self) -> Iterator[Coefficient]:
        return iter(self._c)

    def __len__(self):
        return self.order + 1

    def __eq__(self, other: object):
        if isinstance(other, RatSeries):
            return self.order == other.order and self._c == other._c
        return NotImplemented

    def __repr__(self):
        return f"RatSeries({self._c!r}, order={self.order})"

    def agrees_with(self, other: RatSeries) -> bool:
        """Equal on the common known coefficients."""
        n = min(self.order, other.order)
        return self._c[: n + 1] == other._c[: n + 1]

    def truncate(self, order: int) -> RatSeries:
        return RatSeries(self._c, min(order, self.order))

    def shift(self, k: int) -> RatSeries:
        """Multiply by ``z^k``; the order grows by ``k``."""
        return RatSeries([0] * k + self._c, self.order + k)

    @staticmethod
    def _lift(other: RatSeries | Coefficient, order: int) -> RatSeries:
        if isinstance(other, RatSeries):
            return other
        return RatSeries.const(other, order)

    def __add__(self, other: RatSeries | Coefficient) -> RatSeries:
        rhs = self._lift(other, self.order)
        n = min(self.order, rhs.order)
        return RatSeries((a + b for a, b in zip(self._c, rhs._c)), n)

    __radd__ = __add__

    def __neg__(self) -> RatSeries:
        return RatSeries((-a for a in self._c), self.order)

    def __sub__(self, other: RatSeries | Coefficient) -> RatSeries:
        return self + (-self._lift(other, self.order))

    def __rsub__(self, other: RatSeries | Coefficient) -> RatSeries:
        return self._lift(other, self.order) - self

    def __mul__(self, other: RatSeries | Coefficient) -> RatSeries:
        if not isinstance(other, RatSeries):
            return RatSeries((a * other for a in self._c), self.order)
        n = min(self.order, other.order)
        out: List[Coefficient] = [0] * (n + 1)
        b = other._c
        for i in range(n + 1):
            a = self._c[i]
            if not a:
                continue
            for j in range(n + 1 - i):
                if b[j]:
                    out[i + j] += a * b[j]
        return RatSeries(out, n)

    __rmul__ = __mul__

    def reciprocal(self) -> RatSeries:
        a = self._c
        if a[0] == 0:
            raise ZeroDivisionError("series reciprocal needs a nonzero constant term")
        a0 = a[0]
        out: List[Coefficient] = [Fraction(1, 1) / a0 if a0 != 1 else 1]
        for n in range(1, self.order + 1):
            acc: Coefficient = 0
            for k in range(1, n + 1):
                if a[k]:
                    acc += a[k] * out[n - k]
            out.append(-acc if a0 == 1 else -Fraction(acc) / a0)
        return RatSeries(out, self.order)

    def __truediv__(self, other: RatSeries | Coefficient) -> RatSeries:
        if isinstance(other, RatSeries):
            return self * other.reciprocal()
        return RatSeries((Fraction(a) / other for a in self._c), self.order)

    def derivative(self) -> RatSeries:
        if self.order == 0:
            return RatSeries([], 0)
        return RatSeries((k * self._c[k] for k in range(1, self.order + 1)), self.order - 1)

    def integral(self) -> RatSeries:
        """Antiderivative vanishing at 0; the order grows by one."""
        return RatSeries(
            [0] + [Fraction(c) / (k + 1) for k, c in enumerate(self._c)], self.order + 1
        )

    def log(self) -> RatSeries:
        if self._c[0] != 1:
            raise ValueError("log needs constant term 1")
        if self.order == 0:
            return RatSeries([], 0)
        return (self.derivative() / self.truncate(self.order - 1)).integral()

    def exp(self) -> RatSeries:
        if self._c[0] != 0:
            raise ValueError("exp needs constant term 0")
        # n e_n = sum_k k a_k e_{n-k}
        a = self._c
        out: List[Coefficient] = [1]
        for n in range(1, self.order + 1):
            acc: Coefficient = 0
            for k in range(1, n + 1):
                if a[k]:
                    acc += k * a[k] * out[n - k]
            out.append(_norm(Fraction(acc) / n))
        return RatSeries(out, self.order)

    def evaluate(self, x: object, precision: int = DEFAULT_PRECISION) -> BigFloat:
        with mpmath.workprec(precision + 16):
            xv = mpmath.mpf(x) if not isinstance(x, Fraction) else mpmath.mpf(x.numerator) / x.denominator
            acc = mpmath.mpf(0)
            for c in reversed(self._c):
                term = mpmath.mpf(c) if isinstance(c, int) else mpmath.mpf(c.numerator) / c.denominator
                acc = acc * xv + term
        with mpmath.workprec(precision):
            return BigFloat(+acc, precision)

    def hadamard_divide(self, other: RatSeries) -> List[Optional[Fraction]]:
        """Coefficient-wise ratios; ``None`` where ``other`` vanishes."""
        n = min(self.order, other.order)
        return [
            Fraction(self._c[k]) / other._c[k] if other._c[k] else None
            for k in range(n + 1)
        ]


def series_matrix_det(rows: Sequence[Sequence[RatSeries]]) -> RatSeries:
    """Determinant of a square matrix of series by elimination.

    Pivots are chosen with a nonzero constant term, so each is invertible as a
    series. Matrices of the form ``I + z M`` never need a swap.
    """
    m = [list(r) for r in rows]
    n = len(m)
    if n == 0:
        raise ValueError("empty matrix")
    order = min(e.order for r in m for e in r)
    det = RatSeries.const(1, order)
    for k in range(n):
        pivot_row = next((i for i in range(k, n) if m[i][k][0] != 0), None)
        if pivot_row is None:
            raise ZeroDivisionError("series matrix is singular at z = 0")
        if pivot_row != k:
            m[k], m[pivot_row] = m[pivot_row], m[k]
            det = -det
        pivot = m[k][k]
        det = det * pivot
        inv = pivot.reciprocal()
        for i in range(k + 1, n):
            if not any(m[i][k]):
                continue
            factor = m[i][k] * inv
            row_k = m[k]
            m[i] = [
                e if j <= k else e - factor * row_k[j] for j, e in enumerate(m[i])
            ]
    return det

"""Exact and high-precision number types

``PiPoly`` is an element of Q[chi] with chi = 1/pi: every exact value produced by the
square-lattice sieve lives there. ``BigFloat`` pairs an mpmath float with the precision
it was computed at, so results can report what they are good for.
"""
from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import mpmath
from typing_extensions import TypeAlias

Rational: TypeAlias = Fraction
RationalLike: TypeAlias = "Union[int, Fraction]"

DEFAULT_PRECISION = 256
MIN_PRECISION = 53


def check_precision(precision: int) -> int:
    if precision < MIN_PRECISION:
        warnings.warn(
            f"precision={precision} is below {MIN_PRECISION} bits; using "
            f"{MIN_PRECISION}"
        )
        return MIN_PRECISION
    return int(precision)


def as_rational(value: RationalLike | str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    return Fraction(value)


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class BigFloat:
    """A float carrying the mantissa precision (bits) it was computed with."""

    value: mpmath.mpf
    precision: int

    @classmethod
    def of(cls, value: object, precision: int = DEFAULT_PRECISION) -> BigFloat:
        precision = check_precision(precision)
        with mpmath.workprec(precision):
            return cls(mpmath.mpf(value), precision)  # type: ignore

    @classmethod
    def from_log(cls, log_abs: object, sign: int, precision: int) -> BigFloat:
        """Build ``sign * exp(log_abs)``, for magnitudes outside float range."""
        with mpmath.workprec(precision):
            return cls(sign * mpmath.exp(mpmath.mpf(log_abs)), precision)  # type: ignore

    def _binary(self, other: BigFloat | RationalLike | float, op: str) -> BigFloat:
        if isinstance(other, BigFloat):
            prec = min(self.precision, other.precision)
            rhs = other.value
        else:
            prec = self.precision
            rhs = other
        with mpmath.workprec(prec):
            if isinstance(rhs, Fraction):
                rhs = mpmath.mpf(rhs.numerator) / rhs.denominator
            lhs = self.value
            if op == "+":
                out = lhs + rhs
            elif op == "-":
                out = lhs - rhs
            elif op == "*":
                out = lhs * rhs
            else:
                out = lhs / rhs
            return BigFloat(out, prec)

    def __add__(self, other: BigFloat | RationalLike | float):
        return self._binary(other, "+")

    def __sub__(self, other: BigFloat | RationalLike | float):
        return self._binary(other, "-")

    def __mul__(self, other: BigFloat | RationalLike | float):
        return self._binary(other, "*")

    def __truediv__(self, other: BigFloat | RationalLike | float):
        return self._binary(other, "/")

    def __neg__(self):
        return BigFloat(-self.value, self.precision)

    def __abs__(self):
        return BigFloat(abs(self.value), self.precision)

    def __lt__(self, other: BigFloat | float) -> bool:
        return self.value < (other.value if isinstance(other, BigFloat) else other)

    def __gt__(self, other: BigFloat | float) -> bool:
        return self.value > (other.value if isinstance(other, BigFloat) else other)

    def __float__(self) -> float:
        return float(self.value)

    @property
    def digits(self) -> int:
        """Decimal digits carried by the mantissa."""
        return max(1, int(self.precision * math.log10(2)))

    def log10(self) -> float:
        with mpmath.workprec(self.precision):
            return float(mpmath.log10(abs(self.value)))

    def to_decimal(self, digits: int | None = None) -> str:
        with mpmath.workprec(self.precision):
            return mpmath.nstr(self.value, digits or self.digits)

    def __str__(self) -> str:
        return self.to_decimal()


_TERM = re.compile(
    r"\s*([+-])?\s*(\d+)(?:\s*/\s*(\d+))?(?:\s*/\s*pi(?:\s*\^\s*(\d+))?)?\s*"
)


class PiPoly:
    """Polynomial in chi = 1/pi with rational coefficients, constant term first.

    Instances are immutable and always canonical: no trailing zero coefficient, so
    the zero polynomial has an empty coefficient tuple.
    """

    __slots__ = ("_coeffs", "_hash")

    def __init__(self, coeffs: Iterable[RationalLike | str] = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self._coeffs: tuple[Fraction, ...] = tuple(cs)
        self._hash: int | None = None

    @classmethod
    def chi(cls) -> PiPoly:
        return cls((0, 1))

    @classmethod
    def const(cls, value: RationalLike) -> PiPoly:
        return cls((value,))

    @classmethod
    def linear(cls, a: RationalLike, b: RationalLike) -> PiPoly:
        """``a + b/pi``"""
        return cls((a, b))

    @classmethod
    def from_pi_polynomial(
        cls, pi_coeffs: Sequence[RationalLike], denominator: RationalLike, pi_power: int
    ) -> PiPoly:
        """Convert ``sum(a_k pi^k) / (denominator * pi^pi_power)`` into Q[chi].

        Parameters
        ----------
        pi_coeffs : sequence of rationals
            ``a_0, a_1, ...``, the coefficients of increasing powers of pi.
        denominator : rational
            Rational part of the denominator.
        pi_power : int
            Power of pi in the denominator. Must be at least ``len(pi_coeffs) - 1``
            so the result is a polynomial in 1/pi.
        """
        if len(pi_coeffs) - 1 > pi_power:
            raise ValueError("expression is not a polynomial in 1/pi")
        den = as_rational(denominator)
        out = [Fraction(0)] * (pi_power + 1)
        for k, a in enumerate(pi_coeffs):
            out[pi_power - k] = as_rational(a) / den
        return cls(out)

    @classmethod
    def parse(cls, text: str) -> PiPoly:
        """Parse the textual form ``a0 + a1/pi + a2/pi^2 + ...``."""
        text = text.strip()
        if text in ("", "0"):
            return cls()
        out: dict[int, Fraction] = {}
        pos = 0
        first = True
        while pos < len(text):
            m = _TERM.match(text, pos)
            if m is None or m.end() == pos:
                raise ValueError(f"cannot parse pi-polynomial at {text[pos:]!r}")
            sign, num, den, power = m.groups()
            if sign is None and not first:
                raise ValueError(f"missing operator before {text[pos:]!r}")
            value = Fraction(int(num), int(den) if den else 1)
            if sign == "-":
                value = -value
            if m.group(0).find("pi") < 0:
                k = 0
            else:
                k = int(power) if power else 1
            out[k] = out.get(k, Fraction(0)) + value
            pos = m.end()
            first = False
        degree = max(out) if out else -1
        return cls(out.get(k, 0) for k in range(degree + 1))

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return self._coeffs

    @property
    def degree(self) -> int:
        """Degree in chi; -1 for the zero polynomial."""
        return len(self._coeffs) - 1

    def __len__(self):
        return len(self._coeffs)

    def __getitem__(self, k: int) -> Fraction:
        if 0 <= k < len(self._coeffs):
            return self._coeffs[k]
        return Fraction(0)

    def __bool__(self):
        return bool(self._coeffs)

    def __eq__(self, other: object):
        if isinstance(other, PiPoly):
            return self._coeffs == other._coeffs
        if isinstance(other, (int, Fraction)):
            return self._coeffs == PiPoly.const(other)._coeffs
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._coeffs)
        return self._hash

    def __repr__(self):
        return f"PiPoly({str(self)!r})"

    def __str__(self):
        if not self._coeffs:
            return "0"
        parts: list[str] = []
        for k, c in enumerate(self._coeffs):
            if c == 0:
                continue
            body = format_rational(abs(c))
            if k == 1:
                body += "/pi"
            elif k > 1:
                body += f"/pi^{k}"
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts)

    @staticmethod
    def _lift(other: PiPoly | RationalLike) -> PiPoly:
        if isinstance(other, PiPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return PiPoly.const(other)
        raise TypeError(f"cannot combine PiPoly with {type(other).__name__}")

    def __add__(self, other: PiPoly | RationalLike) -> PiPoly:
        rhs = self._lift(other)._coeffs
        lhs = self._coeffs
        if len(lhs) < len(rhs):
            lhs, rhs = rhs, lhs
        return PiPoly(
            [a + rhs[i] if i < len(rhs) else a for i, a in enumerate(lhs)]
        )

    __radd__ = __add__

    def __neg__(self) -> PiPoly:
        return PiPoly(-c for c in self._coeffs)

    def __sub__(self, other: PiPoly | RationalLike) -> PiPoly:
        return self + (-self._lift(other))

    def __rsub__(self, other: PiPoly | RationalLike) -> PiPoly:
        return self._lift(other) - self

    def __mul__(self, other: PiPoly | RationalLike) -> PiPoly:
        if isinstance(other, (int, Fraction)):
            return PiPoly(c * other for c in self._coeffs)
        rhs = self._lift(other)._coeffs
        if not self._coeffs or not rhs:
            return PiPoly()
        out = [Fraction(0)] * (len(self._coeffs) + len(rhs) - 1)
        for i, a in enumerate(self._coeffs):
            if a == 0:
                continue
            for j, b in enumerate(rhs):
                out[i + j] += a * b
        return PiPoly(out)

    __rmul__ = __mul__

    def exact_div(self, k: RationalLike) -> PiPoly:
        """Divide every coefficient by the scalar ``k``.

        Over Q this always stays in Q[chi]; the method exists so algorithms whose
        divisions are exact by construction can name them.
        """
        k = as_rational(k)
        if k == 0:
            raise ZeroDivisionError("PiPoly division by zero")
        return PiPoly(c / k for c in self._coeffs)

    def at(self, chi: RationalLike) -> Fraction:
        """Exact value at a rational chi (Horner)."""
        acc = Fraction(0)
        for c in reversed(self._coeffs):
            acc = acc * chi + c
        return acc

    def guard_bits(self) -> int:
        """Extra bits needed so cancellation between coefficients is resolved."""
        if not self._coeffs:
            return 0
        size = max(
            max(c.numerator.bit_length(), c.denominator.bit_length())
            for c in self._coeffs
        )
        return size + 2 * len(self._coeffs) + 16

    def evaluate(self, precision: int = DEFAULT_PRECISION) -> BigFloat:
        precision = check_precision(precision)
        with mpmath.workprec(precision + self.guard_bits()):
            chi = 1 / mpmath.pi
            acc = mpmath.mpf(0)
            for c in reversed(self._coeffs):
                acc = acc * chi + mpmath.mpf(c.numerator) / c.denominator
        with mpmath.workprec(precision):
            return BigFloat(+acc, precision)

    def __float__(self) -> float:
        return float(self.evaluate(MIN_PRECISION))


def pipoly_eval(p: PiPoly, precision: int = DEFAULT_PRECISION) -> BigFloat:
    return p.evaluate(precision)


ZERO = PiPoly()
ONE = PiPoly.const(1)

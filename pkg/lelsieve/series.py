"""Walk generating functions on the infinite square lattice

All series count walks, so their coefficients are integers computed exactly.
The closed-walk series of the lattice is ``R(z) = sum(C(2n, n)^2 z^(2n))`` and the
series of closed walks whose last erased loop is ``p`` is

    R_p(z) = z^l(p) det(I + z R(z)|_{G_p} B_p).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
from typing_extensions import Literal

from lelsieve.finite import TorusGraph, torus, viennot_series
from lelsieve.lattice import Sap, build_patch, parse_sap
from lelsieve.powerseries import RatSeries, series_matrix_det
from lelsieve.ring import DEFAULT_PRECISION, BigFloat, check_precision
from lelsieve.sieve import EXACT_FALLBACK_LIMIT, fraction_exact, fraction_numeric

logger = logging.getLogger(__name__)

__all__ = [
    "torus",
    "TorusGraph",
    "r_series",
    "resolvent_entry_series",
    "rp_series_infinite",
    "rp_series_torus",
    "zeta_tilde",
    "mu_tilde",
    "alpha",
    "ratio_convergence",
    "convergence_slope",
    "f_w",
    "elliptic_k",
    "elliptic_e",
    "closed_form_check",
    "closed_form_series_order",
]


def r_series(order: int) -> RatSeries:
    return RatSeries(
        (math.comb(n, n // 2) ** 2 if n % 2 == 0 else 0 for n in range(order + 1)), order
    )


@lru_cache(maxsize=4096)
def _walk_counts(dx: int, dy: int, order: int) -> Tuple[int, ...]:
    out = []
    for n in range(order + 1):
        a, b = n + dx + dy, n + dx - dy
        if a % 2 or not (0 <= a <= 2 * n and 0 <= b <= 2 * n):
            out.append(0)
        else:
            out.append(math.comb(n, a // 2) * math.comb(n, b // 2))
    return tuple(out)


def resolvent_entry_series(dx: int, dy: int, order: int) -> RatSeries:
    """Walks of each length from the origin to ``(dx, dy)``.

    Rotating coordinates by 45 degrees splits a step into two independent
    +-1 moves, which gives the product of binomials.
    """
    x, y = abs(dx), abs(dy)
    if y > x:
        x, y = y, x
    return RatSeries(_walk_counts(x, y, order), order)


def rp_series_infinite(p: Sap, order: int) -> RatSeries:
    """Closed walks (from a fixed start) whose last erased loop is ``p``."""
    ell = p.length
    if order < ell:
        return RatSeries([], order)
    inner = order - ell
    patch = build_patch(p)
    verts = patch.vertices
    n = patch.size
    # z R|_p, one entry per ordered pair
    zr = [
        [
            resolvent_entry_series(v.x - u.x, v.y - u.y, inner).shift(1).truncate(inner)
            for v in verts
        ]
        for u in verts
    ]
    zero = RatSeries([], inner)
    rows: List[List[RatSeries]] = []
    for i in range(n):
        row = []
        for k in range(n):
            acc = zero
            for j in patch.neighbours[k]:
                acc = acc + zr[i][j]
            if i == k:
                acc = acc + 1
            row.append(acc)
        rows.append(row)
    logger.debug("series determinant of a %dx%d patch to order %d", n, n, inner)
    return series_matrix_det(rows).shift(ell)


def rp_series_torus(t: TorusGraph, p: Sap, order: int) -> RatSeries:
    return viennot_series(t, t.embed(p), p.length, order)


def zeta_tilde(order: int) -> RatSeries:
    """Rooted-hike zeta function ``exp(int (R(z) - 1)/z dz)``."""
    r = r_series(order)
    return RatSeries([0] + [Fraction(r[n], n) for n in range(1, order + 1)], order).exp()


def mu_tilde(order: int) -> RatSeries:
    return zeta_tilde(order).reciprocal()


def alpha(precision: int = DEFAULT_PRECISION) -> BigFloat:
    """``exp(4G/pi)/4``, G Catalan's constant."""
    precision = check_precision(precision)
    with mpmath.workprec(precision + 16):
        value = mpmath.exp(4 * mpmath.catalan / mpmath.pi) / 4
    with mpmath.workprec(precision):
        return BigFloat(+value, precision)


def f_w(length: int) -> Fraction:
    """Closed-walk density ``[z^l] R(z/4)``; zero at odd and negative ``l``."""
    if length < 0 or length % 2:
        return Fraction(0)
    return Fraction(math.comb(length, length // 2) ** 2, 4**length)


@dataclass(frozen=True)
class RatioRow:
    length: int
    ratio: Fraction
    scaled_error: float


def _limit(p: Sap) -> float:
    if build_patch(p).size <= EXACT_FALLBACK_LIMIT:
        return float(fraction_exact(p).evaluate(106))
    return float(fraction_numeric(p, 53))


def ratio_convergence(p: Sap, order: int, limit: Optional[float] = None) -> List[RatioRow]:
    """``[z^l]R_p / [z^l]R`` against the sieve limit, for even ``l`` up to ``order``.

    ``scaled_error`` is ``(ratio - limit) * l``; it stays bounded when the error
    decays like ``1/l``.
    """
    rp = rp_series_infinite(p, order)
    r = r_series(order)
    if limit is None:
        limit = _limit(p)
    rows = []
    for length, ratio in enumerate(rp.hadamard_divide(r)):
        if ratio is None or length < p.length or length % 2:
            continue
        rows.append(RatioRow(length, ratio, (float(ratio) - limit) * length))
    return rows


def convergence_slope(rows: Sequence[RatioRow], lo: int = 20, hi: int = 40) -> float:
    """Log-log slope of ``|ratio - limit|`` against ``l`` over ``lo <= l <= hi``."""
    pts = [(r.length, abs(r.scaled_error) / r.length) for r in rows if lo <= r.length <= hi]
    pts = [(x, y) for x, y in pts if y > 0]
    if len(pts) < 2:
        raise ValueError(f"need two nonzero errors in [{lo}, {hi}]")
    slope, _ = np.polyfit(np.log([x for x, _ in pts]), np.log([y for _, y in pts]), 1)
    return float(slope)


def elliptic_k(m: object) -> mpmath.mpf:
    """``K(m) = int_0^{pi/2} (1 - m sin^2)^(-1/2)`` by the arithmetic-geometric mean."""
    m = mpmath.mpf(m)
    return mpmath.pi / (2 * mpmath.agm(1, mpmath.sqrt(1 - m)))


def elliptic_e(m: object) -> mpmath.mpf:
    """Second kind, from the same AGM sequence: ``E = K (1 - sum 2^(j-1) c_j^2)``."""
    m = mpmath.mpf(m)
    a, b = mpmath.mpf(1), mpmath.sqrt(1 - m)
    c2 = m
    total = c2 / 2
    power = mpmath.mpf(1) / 2
    eps = mpmath.mpf(2) ** (-mpmath.mp.prec)
    while c2 > eps * eps:
        a, b, c = (a + b) / 2, mpmath.sqrt(a * b), (a - b) / 2
        power *= 2
        c2 = c * c
        total += power * c2
    k = mpmath.pi / (2 * a)
    return k * (1 - total)


def redge_closed_form(z: object) -> mpmath.mpf:
    z = mpmath.mpf(z)
    pi = mpmath.pi
    k = elliptic_k(16 * z**2)
    return (
        pi / 4
        - mpmath.mpf(1) / 16
        + (64 * z**2 - 4) * k**2 / (16 * pi**2)
        + (k - pi**2) / (4 * pi)
    )


def r11_closed_form(z: object) -> mpmath.mpf:
    z = mpmath.mpf(z)
    if z == 0:
        return mpmath.mpf(0)
    pi = mpmath.pi
    m = 16 * z**2
    k, e = elliptic_k(m), elliptic_e(m)
    head = ((m - 1) * k + e) ** 2
    tail = (1 - m) * k**2 + 2 * k * (8 * pi * z**2 - e) - 4 * pi**2 * z**2 + e**2
    return head * tail / (256 * pi**4 * z**4)


def closed_form_series_order(z0: float, tol: float = 1e-9) -> int:
    """Smallest order whose tail bound ``(4 z0)^(L+1) / (1 - 4 z0)`` is below ``tol``."""
    if not 0 <= z0 < 0.25:
        raise ValueError("z0 must lie in [0, 1/4)")
    if z0 == 0:
        return 0
    q = 4 * z0
    order = math.ceil(math.log(tol * (1 - q)) / math.log(q)) - 1
    return max(order, 0)


CLOSED_FORMS = {
    "edge": ("RL", redge_closed_form),
    "square": ("RULD", r11_closed_form),
}


def closed_form_check(
    which: Union[Literal["edge", "square"], str], z0: float, tol: float = 1e-9, digits: int = 40
) -> tuple[float, float]:
    """Truncated series and elliptic closed form of ``R_p`` at ``z0``."""
    steps, closed = CLOSED_FORMS[which]
    p = parse_sap(steps)
    order = max(closed_form_series_order(z0, tol), p.length)
    with mpmath.workdps(digits):
        series_value = rp_series_infinite(p, order).evaluate(z0, int(digits * 3.33)).value
        closed_value = closed(mpmath.mpf(z0))
        return float(series_value), float(closed_value)

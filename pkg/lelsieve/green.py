"""Regularized Green matrix of the square lattice

Entries ``c(dx, dy)`` are exact elements ``a + b/pi`` of Q[chi]. The table is seeded
with ``c(0, 0) = 0``, ``c(1, 0) = -1`` and the diagonal

    c(m, m) = -(4/pi) * sum(1/(2k + 1) for k in 0..m-1)

and filled outward one diagonal at a time with the discrete harmonic relation
``4 c(v) = 4 delta(v) + sum(c(u) for u next to v)``.
"""
from __future__ import annotations

import logging
import threading
from fractions import Fraction
from typing import Iterator, List, Tuple

import mpmath
import numpy as np

from lelsieve.exceptions import QuadratureNotConverged
from lelsieve.lattice import PatchGraph
from lelsieve.ring import MIN_PRECISION, PiPoly

logger = logging.getLogger(__name__)

CMatrix = List[List[PiPoly]]


def _octant(dx: int, dy: int) -> Tuple[int, int]:
    x, y = abs(dx), abs(dy)
    return (x, y) if x >= y else (y, x)


class CTable:
    """Memo of exact entries over the octant ``0 <= y <= x <= radius``.

    Grown on demand; lookups after growth are read-only.
    """

    def __init__(self, radius: int = 8):
        self._lock = threading.Lock()
        self._radius = -1
        self._entries: dict[Tuple[int, int], PiPoly] = {}
        self._numeric: dict[Tuple[int, int, int], object] = {}
        self._grid: np.ndarray | None = None
        self.ensure(radius)

    @property
    def radius(self) -> int:
        return self._radius

    def ensure(self, radius: int):
        if radius <= self._radius:
            return
        with self._lock:
            if radius <= self._radius:
                return
            target = max(radius, 2 * self._radius)
            logger.debug("growing C table to radius %d", target)
            self._entries = self._build(target)
            self._radius = target

    @staticmethod
    def _build(radius: int) -> dict[Tuple[int, int], PiPoly]:
        c: dict[Tuple[int, int], PiPoly] = {(0, 0): PiPoly()}
        if radius == 0:
            return c

        def get(x: int, y: int) -> PiPoly:
            return c[_octant(x, y)]

        # diagonal
        harmonic = Fraction(0)
        for m in range(1, radius + 1):
            harmonic += Fraction(1, 2 * m - 1)
            c[(m, m)] = PiPoly.linear(0, -4 * harmonic)
        # first off-diagonal, from harmonicity at (m, m)
        c[(1, 0)] = PiPoly.const(-1)
        for m in range(1, radius):
            c[(m + 1, m)] = 2 * c[(m, m)] - c[(m, m - 1)]
        # remaining diagonals, from harmonicity at (y + d - 1, y)
        for d in range(2, radius + 1):
            for y in range(0, radius - d + 1):
                x = y + d
                c[(x, y)] = (
                    4 * get(x - 1, y)
                    - get(x - 2, y)
                    - get(x - 1, y + 1)
                    - get(x - 1, y - 1)
                )
        return c

    def entry(self, dx: int, dy: int) -> PiPoly:
        key = _octant(dx, dy)
        if key[0] > self._radius:
            self.ensure(key[0])
        return self._entries[key]

    def numeric(self, dx: int, dy: int, precision: int = MIN_PRECISION):
        """Entry evaluated with guard bits; a float at 53 bits, else an mpf."""
        key = _octant(dx, dy)
        memo = (key[0], key[1], precision)
        found = self._numeric.get(memo)
        if found is None:
            value = self.entry(*key).evaluate(max(precision, MIN_PRECISION)).value
            found = float(value) if precision <= MIN_PRECISION else value
            self._numeric[memo] = found
        return found

    def float_grid(self, radius: int) -> np.ndarray:
        """``grid[|dx|, |dy|]`` in float64 for every offset up to ``radius``."""
        grid = self._grid
        if grid is None or grid.shape[0] <= radius:
            size = max(radius, 2 * (grid.shape[0] - 1) if grid is not None else 0)
            self.ensure(size)
            grid = np.empty((size + 1, size + 1), dtype=np.float64)
            for x in range(size + 1):
                for y in range(x + 1):
                    grid[x, y] = grid[y, x] = self.numeric(x, y)
            self._grid = grid
        return grid

    def as_rows(self, radius: int) -> Iterator[Tuple[int, int, Fraction, Fraction]]:
        """``(dx, dy, a, b)`` with ``c(dx, dy) = a + b/pi`` over the octant."""
        self.ensure(radius)
        for x in range(radius + 1):
            for y in range(x + 1):
                e = self._entries[(x, y)]
                yield x, y, e[0], e[1]


C_TABLE = CTable()


def c_entry(dx: int, dy: int) -> PiPoly:
    return C_TABLE.entry(dx, dy)


def c_entry_numeric(dx: int, dy: int, quadrature_tol: float = 1e-10) -> float:
    """Integral representation of ``c(dx, dy)``.

    Evaluates ``-(1/pi) Re int_0^inf (1/t)(1 - ((t-i)/(t+i))^(dx-dy) ((t-1)/(t+1))^(dx+dy)) dt``
    by tanh-sinh quadrature.

    Raises
    ------
    QuadratureNotConverged
        When the quadrature error estimate exceeds ``quadrature_tol``.
    """
    if quadrature_tol <= 0:
        raise ValueError("quadrature_tol must be positive")
    a, b = dx - dy, dx + dy

    def integrand(t):
        rot = ((t - 1j) / (t + 1j)) ** a
        rad = ((t - 1) / (t + 1)) ** b
        return mpmath.re((1 - rot * rad) / t)

    with mpmath.workdps(30):
        value, err = mpmath.quad(integrand, [0, 1, mpmath.inf], error=True)
        if err > quadrature_tol:
            raise QuadratureNotConverged(
                f"c({dx}, {dy}): quadrature error {float(err):.3g} > {quadrature_tol}"
            )
        return float(-value / mpmath.pi)


def patch_extent(patch: PatchGraph) -> int:
    """Largest coordinate offset between two patch vertices."""
    xs = [v.x for v in patch.vertices]
    ys = [v.y for v in patch.vertices]
    return max(max(xs) - min(xs), max(ys) - min(ys))


def c_matrix(patch: PatchGraph, table: CTable = C_TABLE) -> CMatrix:
    verts = patch.vertices
    table.ensure(patch_extent(patch))
    return [[table.entry(v.x - u.x, v.y - u.y) for v in verts] for u in verts]


def numeric_c_matrix(patch: PatchGraph, precision: int = MIN_PRECISION, table: CTable = C_TABLE):
    """``C|_p`` as a float64 array at 53 bits, else as an ``mpmath.matrix``."""
    verts = patch.vertices
    n = len(verts)
    if precision <= MIN_PRECISION:
        xs = np.array([v.x for v in verts])
        ys = np.array([v.y for v in verts])
        grid = table.float_grid(patch_extent(patch))
        return grid[np.abs(xs[None, :] - xs[:, None]), np.abs(ys[None, :] - ys[:, None])]
    table.ensure(patch_extent(patch))
    with mpmath.workprec(precision):
        m = mpmath.matrix(n, n)
        for i, u in enumerate(verts):
            for j, v in enumerate(verts):
                m[i, j] = table.numeric(v.x - u.x, v.y - u.y, precision)
    return m

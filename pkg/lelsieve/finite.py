"""Sieve identities on finite weighted digraphs

Hike generating functions are ratios of ``det(I - zA)`` polynomials. Those are
computed exactly from traces of adjacency powers,

    det(I - zA) = exp(-sum(tr(A^k) z^k / k)),

so every coefficient stays rational; only the dominant eigenvalue and its
multiplicity need floating point, and row-regular graphs get the eigenvalue exactly.
"""
from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np

from lelsieve.exceptions import SapDoesNotFit, UsageError, ZeroDensity
from lelsieve.green import patch_extent
from lelsieve.lattice import Sap, build_patch
from lelsieve.linalg import bareiss_det
from lelsieve.powerseries import Coefficient, RatSeries
from lelsieve.ring import DEFAULT_PRECISION, BigFloat

logger = logging.getLogger(__name__)

Number = Union[Fraction, mpmath.mpf]
VertexSet = Tuple[int, ...]


def _weight(w: object) -> Coefficient:
    f = Fraction(str(w)) if isinstance(w, str) else Fraction(w)  # type: ignore[arg-type]
    return f.numerator if f.denominator == 1 else f


def vertex_set(vertices: Iterable[int], n: int) -> VertexSet:
    out = tuple(sorted(set(vertices)))
    if out and (out[0] < 0 or out[-1] >= n):
        raise UsageError(f"vertex set {out} is not inside 0..{n - 1}")
    return out


class Digraph:
    """Finite digraph with rational edge weights, stored as sparse rows."""

    def __init__(self, n: int, rows: Sequence[dict[int, Coefficient]]):
        if n < 0 or len(rows) != n:
            raise ValueError("row count does not match n")
        self.n = n
        self.rows: List[dict[int, Coefficient]] = [dict(r) for r in rows]
        self._traces: List[Coefficient] = []
        self._minors: dict[VertexSet, Digraph] = {}

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[object]]) -> Digraph:
        rows: List[dict[int, Coefficient]] = [{} for _ in range(n)]
        for edge in edges:
            i, j = int(edge[0]), int(edge[1])  # type: ignore[call-overload]
            w = _weight(edge[2]) if len(edge) > 2 else 1
            if not (0 <= i < n and 0 <= j < n):
                raise UsageError(f"edge ({i}, {j}) outside 0..{n - 1}")
            rows[i][j] = rows[i].get(j, 0) + w
        return cls(n, [{j: w for j, w in r.items() if w} for r in rows])

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[object]]) -> Digraph:
        n = len(matrix)
        return cls(
            n,
            [{j: _weight(w) for j, w in enumerate(row) if w} for row in matrix],
        )

    @classmethod
    def from_json(cls, path: Union[str, os.PathLike[str]]) -> Digraph:
        """Read ``{"n": int, "edges": [[i, j, "num/den"], ...]}``."""
        with Path(path).open(encoding="utf-8") as f:
            obj = json.load(f)
        try:
            return cls.from_edges(int(obj["n"]), obj["edges"])
        except (KeyError, TypeError, ValueError) as err:
            raise UsageError(f"{os.fspath(path)}: not a digraph file ({err})") from None

    def to_numpy(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.float64)
        for i, r in enumerate(self.rows):
            for j, w in r.items():
                a[i, j] = float(w)
        return a

    def delete(self, support: Iterable[int]) -> Digraph:
        """Induced subgraph on the vertices outside ``support``.

        Memoized per vertex set, so its determinant polynomial is built once.
        """
        key = tuple(sorted(set(support)))
        found = self._minors.get(key)
        if found is not None:
            return found
        gone = set(key)
        keep = [v for v in range(self.n) if v not in gone]
        new = {v: i for i, v in enumerate(keep)}
        minor = Digraph(
            len(keep),
            [{new[j]: w for j, w in self.rows[v].items() if j in new} for v in keep],
        )
        self._minors[key] = minor
        return minor

    def closed_walks_from(self, v: int, length: int) -> List[Coefficient]:
        """Weights of closed walks at ``v`` of each length ``0..length``."""
        out: List[Coefficient] = [1]
        vec: dict[int, Coefficient] = {v: 1}
        for _ in range(length):
            nxt: dict[int, Coefficient] = {}
            for i, x in vec.items():
                for j, w in self.rows[i].items():
                    nxt[j] = nxt.get(j, 0) + x * w
            vec = nxt
            out.append(vec.get(v, 0))
        return out

    def trace_powers(self, length: int) -> List[Coefficient]:
        """``tr(A^k)`` for ``k = 0..length``."""
        if len(self._traces) <= length:
            totals: List[Coefficient] = [0] * (length + 1)
            for v in range(self.n):
                for k, c in enumerate(self.closed_walks_from(v, length)):
                    totals[k] += c
            self._traces = totals
        return self._traces[: length + 1]

    @cached_property
    def det_poly(self) -> RatSeries:
        """``det(I - zA)`` as an exact polynomial (a series of order n)."""
        n = self.n
        if n == 0:
            return RatSeries.const(1, 0)
        tr = self.trace_powers(n)
        log_det = RatSeries([0] + [Fraction(-tr[k], k) for k in range(1, n + 1)], n)
        return log_det.exp()

    def det_series(self, order: int) -> RatSeries:
        """``det(I - zA)`` to ``order``; coefficients past n are exactly zero."""
        return RatSeries(self.det_poly.coeffs, order)

    def is_row_regular(self) -> bool:
        sums = {sum(r.values()) for r in self.rows}
        return len(sums) == 1 and all(w >= 0 for r in self.rows for w in r.values())

    def _mp_eig(self, precision: int) -> List[mpmath.mpc]:
        with mpmath.workprec(precision):
            m = mpmath.matrix(self.n, self.n)
            for i, r in enumerate(self.rows):
                for j, w in r.items():
                    m[i, j] = mpmath.mpf(w.numerator) / w.denominator if isinstance(w, Fraction) else w
            return list(mpmath.eig(m, left=False, right=False))

    def spectrum(self, precision: int = DEFAULT_PRECISION) -> List[mpmath.mpc]:
        """Eigenvalues by mpmath QR.

        A QR run that does not converge is retried at twice and four times the
        precision; after that numpy's float64 eigenvalues are returned.
        """
        prec = precision
        for _ in range(3):
            try:
                return self._mp_eig(prec)
            except RuntimeError as err:
                logger.debug("eigenvalues at %d bits: %s", prec, err)
                prec *= 2
        logger.info("mpmath QR did not converge up to %d bits, using float64 eigenvalues", prec // 2)
        return [mpmath.mpc(complex(e)) for e in np.linalg.eigvals(self.to_numpy())]

    def dominant(self, precision: int = DEFAULT_PRECISION) -> tuple[Number, int]:
        """Dominant eigenvalue modulus and the number of eigenvalues attaining it.

        Row-regular graphs with non-negative weights report the row sum exactly,
        and count its multiplicity from float64 eigenvalues.
        """
        if self.is_row_regular():
            lam = Fraction(sum(self.rows[0].values()))
            mods = np.abs(np.linalg.eigvals(self.to_numpy()))
            g = int(np.count_nonzero(np.abs(mods - float(lam)) <= 1e-7 * max(float(lam), 1.0)))
            return lam, g
        spec = self.spectrum(precision)
        with mpmath.workprec(precision):
            mods = [abs(e) for e in spec]
            lam_f = max(mods)
            tol = lam_f * mpmath.mpf(2) ** (-precision // 2)
            g = sum(1 for m in mods if abs(m - lam_f) <= tol)
        return lam_f, g


class TorusGraph(Digraph):
    """``n x n`` square lattice with periodic wraparound; vertex ``(x, y)`` is ``x + n*y``."""

    def __init__(self, n: int):
        if n < 3:
            raise UsageError(f"torus side must be at least 3, got {n}")
        self.side = n
        rows: List[dict[int, Coefficient]] = []
        for y in range(n):
            for x in range(n):
                rows.append(
                    {
                        ((x + 1) % n) + n * y: 1,
                        ((x - 1) % n) + n * y: 1,
                        x + n * ((y + 1) % n): 1,
                        x + n * ((y - 1) % n): 1,
                    }
                )
        super().__init__(n * n, rows)

    def index(self, x: int, y: int) -> int:
        return (x % self.side) + self.side * (y % self.side)

    def trace_powers(self, length: int) -> List[Coefficient]:
        if len(self._traces) <= length:
            # vertex transitive
            self._traces = [self.n * c for c in self.closed_walks_from(0, length)]
        return self._traces[: length + 1]

    def eigenvalues(self, precision: int = DEFAULT_PRECISION) -> List[mpmath.mpf]:
        """``2cos(2 pi a/n) + 2cos(2 pi b/n)``, index ``a + n*b``."""
        n = self.side
        with mpmath.workprec(precision):
            cos = [2 * mpmath.cos(2 * mpmath.pi * a / n) for a in range(n)]
            return [cos[a] + cos[b] for b in range(n) for a in range(n)]

    def spectrum(self, precision: int = DEFAULT_PRECISION) -> List[mpmath.mpc]:
        return [mpmath.mpc(e) for e in self.eigenvalues(precision)]

    def dominant(self, precision: int = DEFAULT_PRECISION) -> tuple[Number, int]:
        return Fraction(4), 2 if self.side % 2 == 0 else 1

    def embed(self, p: Sap) -> VertexSet:
        """Torus vertices of ``p``'s support.

        Raises
        ------
        SapDoesNotFit
            If the patch of ``p`` would wrap onto itself.
        """
        extent = patch_extent(build_patch(p))
        if extent + 2 > self.side:
            raise SapDoesNotFit(
                f"{p.steps}: patch spans {extent + 1} sites, torus side is {self.side}"
            )
        return vertex_set((self.index(v.x, v.y) for v in p.vertices), self.n)


def torus(n: int) -> TorusGraph:
    return TorusGraph(n)


def zeta_series(g: Digraph, order: int) -> RatSeries:
    """``1/det(I - zA)``; coefficient ``z^l`` counts (weighs) hikes of length ``l``."""
    return g.det_series(order).reciprocal()


def mu_poly(g: Digraph) -> RatSeries:
    return g.det_poly


def lambda_series(g: Digraph, order: int) -> RatSeries:
    """``tr((I - zA)^-1) - n``, the log-derivative ``z zeta'/zeta``."""
    tr = g.trace_powers(order)
    return RatSeries([0] + tr[1:], order)


def viennot_series(g: Digraph, support: Iterable[int], p_len: int, order: int) -> RatSeries:
    """Closed walks whose last erased loop is the prime with the given support and length."""
    rest = g.delete(vertex_set(support, g.n))
    if p_len > order:
        return RatSeries([], order)
    body = rest.det_series(order - p_len) * zeta_series(g, order - p_len)
    return body.shift(p_len)


def _number(x: object, lam: Number) -> Number:
    if isinstance(lam, Fraction):
        return Fraction(x)  # type: ignore[arg-type]
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)  # type: ignore[arg-type]


def _to_bigfloat(x: Number, precision: int) -> BigFloat:
    with mpmath.workprec(precision):
        if isinstance(x, Fraction):
            return BigFloat(mpmath.mpf(x.numerator) / x.denominator, precision)
        return BigFloat(+x, precision)


def _poly_derivative_at(coeffs: Sequence[Coefficient], k: int, z: Number) -> Number:
    acc = _number(0, z)
    for i in range(len(coeffs) - 1, k - 1, -1):
        c = coeffs[i]
        if c:
            acc += _number(c, z) * (math.perm(i, k)) * z ** (i - k)
    return acc


def sieve_asymptote(
    g: Digraph, support: Iterable[int], p_len: int, precision: int = DEFAULT_PRECISION
) -> BigFloat:
    """``lambda^-p_len det(I - A_{G-p}/lambda)``"""
    lam, _ = g.dominant(precision)
    with mpmath.workprec(precision):
        inv = 1 / lam
        rest = g.delete(vertex_set(support, g.n))
        value = _poly_derivative_at(rest.det_poly.coeffs, 0, inv) * inv**p_len
        return _to_bigfloat(value, precision)


def density(g: Digraph, length: int, lam: Optional[Number] = None, precision: int = DEFAULT_PRECISION) -> Number:
    """``f(l) = |H_l| / lambda^l``; zero for negative ``l``."""
    if length < 0:
        return _number(0, lam if lam is not None else Fraction(1))
    if lam is None:
        lam, _ = g.dominant(precision)
    with mpmath.workprec(precision):
        return _number(zeta_series(g, length)[length], lam) / lam**length


def hike_count_scaling(g: Digraph, length: int, precision: int = DEFAULT_PRECISION) -> Number:
    return density(g, length, precision=precision)


def viennot_ratio(g: Digraph, support: Iterable[int], p_len: int, length: int) -> Fraction:
    """Exact fraction of length-``l`` hikes whose last prime is ``p``."""
    hikes = zeta_series(g, length)[length]
    if hikes == 0:
        raise ZeroDensity(f"no hikes of length {length}")
    return Fraction(viennot_series(g, support, p_len, length)[length]) / hikes


def length_corollary_error(
    g: Digraph,
    support: Iterable[int],
    p_len: int,
    length: int,
    k_max: Optional[int] = None,
    precision: int = DEFAULT_PRECISION,
) -> BigFloat:
    """Error of the sieve asymptote at hike length ``l``.

    With ``D(z) = det(I - z A_{G-p})``, ``f`` the hike density and ``x = l - p_len``::

        Err = lambda^-p_len sum_k ((-1)^k nabla^k f(x) / (f(l) lambda^k k!) - [k = 0]) D^(k)(1/lambda)

    ``nabla`` is the backward difference. ``D`` is a polynomial, so ``k_max`` equal
    to its degree makes the sum exact.

    Raises
    ------
    ZeroDensity
        If there are no hikes of length ``l``.
    """
    lam, _ = g.dominant(precision)
    rest = g.delete(vertex_set(support, g.n))
    d = rest.det_poly.coeffs
    if k_max is None:
        k_max = len(d) - 1
    hikes = zeta_series(g, max(length, 0)).coeffs
    with mpmath.workprec(precision + 32):

        def f(m: int) -> Number:
            if m < 0:
                return _number(0, lam)
            return _number(hikes[m], lam) / lam**m

        fl = f(length)
        if fl == 0:
            raise ZeroDensity(f"hike density vanishes at length {length}")
        inv = 1 / lam
        x = length - p_len
        total = _number(0, lam)
        for k in range(k_max + 1):
            nabla = sum(
                ((-1) ** j * math.comb(k, j) * f(x - j) for j in range(k + 1)),
                _number(0, lam),
            )
            coef = (-1) ** k * nabla / (fl * lam**k * math.factorial(k))
            if k == 0:
                coef -= 1
            total += coef * _poly_derivative_at(d, k, inv)
        return _to_bigfloat(total * inv**p_len, precision)


def alpha_n(t: TorusGraph, precision: int = DEFAULT_PRECISION) -> BigFloat:
    """Product of ``1 - lambda_i/4`` over the torus eigenvalues other than 4."""
    eig = t.eigenvalues(precision + 32)
    with mpmath.workprec(precision + 32):
        prod = mpmath.mpf(1)
        for i, e in enumerate(eig):
            if i == 0:
                continue
            prod *= 1 - e / 4
        return _to_bigfloat(prod, precision)


def walks_to_hikes_check(t: TorusGraph, precision: int = DEFAULT_PRECISION) -> tuple[BigFloat, BigFloat]:
    """``(det(I - A_{t-v}/4), alpha_N/N)`` for a single deleted vertex ``v``."""
    n = t.n
    rest = t.delete([0])
    m = [[0] * (n - 1) for _ in range(n - 1)]
    for i, row in enumerate(rest.rows):
        m[i][i] = 4
        for j, w in row.items():
            m[i][j] -= w
    lhs = Fraction(bareiss_det(m), 4 ** (n - 1))
    rhs = alpha_n(t, precision)
    return _to_bigfloat(lhs, precision), rhs / n


@dataclass(frozen=True)
class FiniteCheck:
    length: int
    exact_ratio: Fraction
    asymptote: BigFloat
    error: BigFloat

    @property
    def residual(self) -> float:
        return abs(float(self.exact_ratio) - float(self.asymptote) - float(self.error))


def sieve_check(
    g: Digraph, support: Iterable[int], p_len: int, lengths: Iterable[int], precision: int = DEFAULT_PRECISION
) -> List[FiniteCheck]:
    """Compare exact ratio against asymptote plus error at each hike length."""
    support = vertex_set(support, g.n)
    asym = sieve_asymptote(g, support, p_len, precision)
    out: List[FiniteCheck] = []
    for length in lengths:
        ratio = viennot_ratio(g, support, p_len, length)
        err = length_corollary_error(g, support, p_len, length, precision=precision)
        out.append(FiniteCheck(length, ratio, asym, err))
    return out

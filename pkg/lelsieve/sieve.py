"""Last-erased-loop fractions on the square lattice

For a polygon p with patch graph G_p the fraction of closed walks whose last erased
loop is p is

    F_p / 4^l(p) = deg^T adj(I + C|_p B_p / 4) 1 / 4^(l(p) + 1)

with C the regularized Green matrix (z R(z) at z = 1/4 less its divergent part) and
B_p the lattice edges touching p. Exactly, this is a polynomial in 1/pi.
"""
from __future__ import annotations

import enum
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Iterator, List, Optional, Sequence

import mpmath
import numpy as np

from lelsieve.exceptions import InsufficientData, PrecisionInsufficient, UsageError
from lelsieve.green import c_matrix, numeric_c_matrix
from lelsieve.lattice import (
    SQUARE,
    PatchGraph,
    Sap,
    anchored_multiplicity,
    build_patch,
    canonical_key,
    enumerate_anchored_saps,
    enumerate_polygons,
)
from lelsieve.linalg import bareiss_det, leverrier, matmul, newton_interpolate
from lelsieve.ring import MIN_PRECISION, ONE, ZERO, BigFloat, PiPoly, check_precision

if TYPE_CHECKING:
    from lelsieve.store import Store

logger = logging.getLogger(__name__)

LAMBDA = SQUARE.degree
QUARTER = Fraction(1, LAMBDA)

# patches above this size are never sent to the exact fallback
EXACT_FALLBACK_LIMIT = 64
# nor to the arbitrary-precision solver
MP_FALLBACK_LIMIT = 200
MAX_PRECISION = 4096


class Method(enum.Enum):
    INTERPOLATION = "interpolation"
    LEVERRIER = "leverrier"


class Mode(enum.Enum):
    EXACT = "exact"
    NUMERIC = "numeric"


@dataclass(frozen=True)
class FractionResult:
    sap_key: str
    exact: Optional[PiPoly]
    numeric: BigFloat
    ell: int
    patch_size: int

    def to_dict(self) -> dict[str, object]:
        out: dict[str, object] = {
            "sap": self.sap_key,
            "ell": self.ell,
            "patch_size": self.patch_size,
        }
        if self.exact is not None:
            out["exact"] = str(self.exact)
        out["numeric"] = self.numeric.to_decimal()
        out["precision"] = self.numeric.precision
        return out


def m_matrix_exact(patch: PatchGraph) -> List[List[PiPoly]]:
    """``I + C|_p B_p / 4`` over Q[chi]."""
    c = c_matrix(patch)
    n = patch.size
    rows: List[List[PiPoly]] = []
    for i in range(n):
        ci = c[i]
        row = [sum((ci[j] for j in patch.neighbours[k]), ZERO) * QUARTER for k in range(n)]
        row[i] = row[i] + ONE
        rows.append(row)
    return rows


def _affine_parts(m: Sequence[Sequence[PiPoly]]) -> tuple[list[list[int]], list[list[int]], int]:
    """Split ``m = (P0 + chi P1) / D`` with integer ``P0``, ``P1``."""
    den = 1
    for row in m:
        for e in row:
            if e.degree > 1:
                raise ValueError("patch matrix entries must be affine in chi")
            for c in e.coeffs:
                den = den * c.denominator // math.gcd(den, c.denominator)
    p0 = [[int(e[0] * den) for e in row] for row in m]
    p1 = [[int(e[1] * den) for e in row] for row in m]
    return p0, p1, den


def bordered_value(patch: PatchGraph) -> PiPoly:
    """``deg^T adj(M) 1`` via ``-det([[M, 1], [deg^T, 0]])`` sampled at integer chi.

    The result has chi-degree below the patch size, so ``size + 1`` samples
    determine it.
    """
    m = m_matrix_exact(patch)
    n = patch.size
    p0, p1, den = _affine_parts(m)
    scale = den**n
    deg = list(patch.deg)
    xs = list(range(n + 1))
    ys: list[Fraction] = []
    for chi in xs:
        bordered = [[a + chi * b for a, b in zip(r0, r1)] + [den] for r0, r1 in zip(p0, p1)]
        bordered.append(deg + [0])
        ys.append(Fraction(-bareiss_det(bordered), scale))
    return PiPoly(newton_interpolate(xs, ys))


def leverrier_value(patch: PatchGraph) -> PiPoly:
    _, adj = leverrier(m_matrix_exact(patch), ZERO, ONE)
    total = ZERO
    for d, row in zip(patch.deg, adj):
        total = total + sum(row, ZERO) * d
    return total


def fraction_exact(p: Sap, method: Method | str = Method.INTERPOLATION) -> PiPoly:
    """Exact ``F_p / 4^l(p)`` as an element of Q[chi]."""
    patch = build_patch(p)
    if Method(method) is Method.LEVERRIER:
        value = leverrier_value(patch)
    else:
        value = bordered_value(patch)
    return value.exact_div(LAMBDA ** (p.length + 1))


def adjugate_check(p: Sap) -> tuple[List[List[PiPoly]], List[List[PiPoly]]]:
    """``(M adj(M), det(M) I)`` for the patch matrix of ``p``."""
    m = m_matrix_exact(build_patch(p))
    coeffs, adj = leverrier(m, ZERO, ONE)
    n = len(m)
    det = coeffs[0] if n % 2 == 0 else -coeffs[0]
    lhs = matmul(m, adj, ZERO)
    rhs = [[det if i == j else ZERO for j in range(n)] for i in range(n)]
    return lhs, rhs


def _float_system(patch: PatchGraph) -> np.ndarray:
    c = numeric_c_matrix(patch, MIN_PRECISION)
    return np.eye(patch.size) + (c @ patch.b_matrix.astype(np.float64)) / LAMBDA


def _numeric_float(patch: PatchGraph, m: np.ndarray, ell: int) -> BigFloat:
    sign, logdet = np.linalg.slogdet(m)
    x = np.linalg.solve(m, np.ones(patch.size))
    s = float(np.dot(np.asarray(patch.deg, dtype=np.float64), x))
    if sign == 0 or s == 0:
        return BigFloat.of(0, MIN_PRECISION)
    log_abs = logdet + math.log(abs(s)) - (ell + 1) * math.log(LAMBDA)
    return BigFloat.from_log(log_abs, int(sign) * (1 if s > 0 else -1), MIN_PRECISION)


def _numeric_mp(patch: PatchGraph, ell: int, precision: int) -> BigFloat:
    n = patch.size
    guard = precision + 32
    c = numeric_c_matrix(patch, guard)
    with mpmath.workprec(guard):
        m = mpmath.matrix(n, n)
        for i in range(n):
            for k in range(n):
                m[i, k] = mpmath.fsum(c[i, j] for j in patch.neighbours[k]) / LAMBDA
            m[i, i] += 1
        # one factorization serves both the determinant and the solve
        try:
            lu, perm = mpmath.mp.LU_decomp(m, overwrite=True, use_cache=False)
        except ZeroDivisionError:
            raise PrecisionInsufficient(f"patch matrix of size {n} is singular at {guard} bits") from None
        sign = 1
        for i, j in enumerate(perm):
            if i != j:
                sign = -sign
        log_abs = mpmath.mpf(0)
        for i in range(n):
            u = lu[i, i]
            if u < 0:
                sign = -sign
            log_abs += mpmath.log(abs(u))
        y = mpmath.mp.L_solve(lu, mpmath.matrix([1] * n), perm)
        x = mpmath.mp.U_solve(lu, y)
        s = mpmath.fsum(d * x[i] for i, d in enumerate(patch.deg))
        if s == 0:
            return BigFloat.of(0, precision)
        if s < 0:
            sign = -sign
        log_abs += mpmath.log(abs(s)) - (ell + 1) * mpmath.log(LAMBDA)
        value = sign * mpmath.exp(log_abs)
    with mpmath.workprec(precision):
        return BigFloat(+value, precision)


def fraction_numeric(
    p: Sap,
    precision: int = 256,
    exact_limit: int = EXACT_FALLBACK_LIMIT,
) -> BigFloat:
    """Evaluate the sieve formula in floating point.

    Parameters
    ----------
    p : Sap
    precision : int
        Mantissa bits. 53 uses numpy float64, anything above uses mpmath LU.
    exact_limit : int
        Largest patch that may fall back to the exact path when the system is
        ill-conditioned.

    Raises
    ------
    PrecisionInsufficient
        If the patch matrix is too ill-conditioned and no fallback applies.
    """
    precision = check_precision(precision)
    patch = build_patch(p)
    m = _float_system(patch)
    cond = float(np.linalg.cond(m, 1))
    if not math.isfinite(cond) or cond > 2.0 ** (precision / 2):
        n = patch.size
        warnings.warn(
            f"patch matrix of {p.steps} has condition ~{cond:.3g} at {precision} bits; "
            "falling back"
        )
        if n <= exact_limit:
            return fraction_exact(p).evaluate(precision)
        if n <= MP_FALLBACK_LIMIT and 2 * precision <= MAX_PRECISION:
            return fraction_numeric(p, 2 * precision, exact_limit)
        raise PrecisionInsufficient(
            f"{p.steps}: condition {cond:.3g} exceeds 2^{precision // 2} and the "
            f"{n}x{n} patch is too large to fall back"
        )
    if precision <= MIN_PRECISION:
        return _numeric_float(patch, m, p.length)
    return _numeric_mp(patch, p.length, precision)


def evaluate(p: Sap, precision: int = 256, exact: bool = False) -> FractionResult:
    patch = build_patch(p)
    key = canonical_key(p)
    if exact:
        poly = fraction_exact(p)
        return FractionResult(key, poly, poly.evaluate(precision), p.length, patch.size)
    return FractionResult(key, None, fraction_numeric(p, precision), p.length, patch.size)


@dataclass
class SweepUnit:
    """One support class: a representative polygon and its anchored count."""

    key: str
    representative: Sap
    multiplicity: int = 0


@dataclass(frozen=True)
class SweepRow:
    length: int
    total: BigFloat
    count: int


@dataclass
class SweepTable:
    rows: List[SweepRow] = field(default_factory=list)
    computed: int = 0
    """Fractions actually evaluated (not replayed from a cache)."""

    def __iter__(self) -> Iterator[SweepRow]:
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def to_csv_rows(self) -> Iterator[tuple[int, int, str]]:
        for r in self.rows:
            yield r.length, r.count, r.total.to_decimal()


def sweep_units(max_len: int, dedup: bool = True) -> list[SweepUnit]:
    """Work units for a sweep, in a fixed order.

    With ``dedup`` one unit per vertex-support class of polygons, carrying the number
    of anchored oriented polygons it stands for. Without it one unit per anchored
    oriented polygon at the origin.
    """
    if max_len < 2 or max_len % 2:
        raise UsageError(f"--max-len must be even and >= 2, got {max_len}")
    units: dict[str, SweepUnit] = {}
    if dedup:
        for length in range(2, max_len + 1, 2):
            for poly in enumerate_polygons(length):
                key = poly.support_key()
                unit = units.setdefault(key, SweepUnit(key, poly))
                unit.multiplicity += anchored_multiplicity(poly)
    else:
        for sap in enumerate_anchored_saps(max_len):
            key = canonical_key(sap)
            units[key] = SweepUnit(key, sap, 1)
    return sorted(units.values(), key=lambda u: (u.representative.length, u.key))


def _evaluate_unit(args: tuple[str, str, int, bool]) -> tuple[str, Optional[str], str]:
    steps, key, precision, exact = args
    p = Sap(steps)
    if exact:
        poly = fraction_exact(p)
        return key, str(poly), poly.evaluate(precision).to_decimal()
    return key, None, fraction_numeric(p, precision).to_decimal()


def _run_units(
    jobs: list[tuple[str, str, int, bool]], threads: int
) -> Iterable[tuple[str, Optional[str], str]]:
    if threads <= 1 or len(jobs) < 2:
        return map(_evaluate_unit, jobs)
    executor = ProcessPoolExecutor(max_workers=threads)
    try:
        return list(executor.map(_evaluate_unit, jobs, chunksize=8))
    finally:
        executor.shutdown()


def sweep(
    max_len: int,
    mode: Mode | str = Mode.NUMERIC,
    cache: Store | None = None,
    precision: int = 256,
    dedup: bool = True,
    threads: int = 1,
) -> SweepTable:
    """Partial sums ``S(L)`` of last-erased-loop fractions for every even ``L``.

    Results are merged in a fixed key order, so the table does not depend on
    ``threads``. With a ``cache`` already holding a class, that class is replayed
    and not recomputed.
    """
    from lelsieve.store import CacheRecord

    mode = Mode(mode)
    precision = check_precision(precision)
    exact = mode is Mode.EXACT
    units = sweep_units(max_len, dedup)
    values: dict[str, str] = {}
    jobs: list[tuple[str, str, int, bool]] = []
    for unit in units:
        record = cache.lookup(unit.key) if cache is not None and dedup else None
        if record is not None and record.usable(precision, exact):
            values[unit.key] = record.numeric
        else:
            jobs.append((unit.representative.steps, unit.key, precision, exact))
    logger.info(
        "sweep to L=%d: %d classes, %d cached, %d to compute",
        max_len,
        len(units),
        len(units) - len(jobs),
        len(jobs),
    )
    by_key = {u.key: u for u in units}
    for key, exact_text, numeric in _run_units(jobs, threads):
        values[key] = numeric
        if cache is not None and dedup:
            unit = by_key[key]
            cache.append(
                CacheRecord(
                    shape_key=key,
                    ell=unit.representative.length,
                    multiplicity=unit.multiplicity,
                    exact=exact_text,
                    numeric=numeric,
                    precision=precision,
                )
            )
    table = SweepTable(computed=len(jobs))
    with mpmath.workprec(precision):
        total = mpmath.mpf(0)
        count = 0
        i = 0
        for length in range(2, max_len + 1, 2):
            while i < len(units) and units[i].representative.length == length:
                unit = units[i]
                total += unit.multiplicity * mpmath.mpf(values[unit.key])
                count += unit.multiplicity
                i += 1
            table.rows.append(SweepRow(length, BigFloat(+total, precision), count))
    return table


def fit_exponent(table: SweepTable | Sequence[tuple[int, float]]) -> float:
    """Slope of ``log(1 - S(L))`` against ``log L`` over the rows with ``L >= 6``."""
    if isinstance(table, SweepTable):
        pairs = [(r.length, float(r.total)) for r in table.rows]
    else:
        pairs = [(int(length), float(s)) for length, s in table]
    pairs = [(length, s) for length, s in pairs if length >= 6 and s < 1]
    if len(pairs) < 4 or len({length for length, _ in pairs}) < 2:
        raise InsufficientData(
            f"need at least 4 distinct rows with L >= 6, got {len(pairs)}"
        )
    x = np.log([length for length, _ in pairs])
    y = np.log([1 - s for _, s in pairs])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def resolve_long_sap(
    length: int, target: float, abs_tol: float, precision: int = MIN_PRECISION
) -> list[Sap]:
    """Polygons of the given length whose fraction matches a printed value.

    Every translation class is evaluated; all of them within ``abs_tol`` of
    ``target`` are returned, in enumeration order.
    """
    found: list[Sap] = []
    for poly in enumerate_polygons(length):
        value = float(fraction_numeric(poly, precision))
        if abs(value - target) <= abs_tol:
            logger.info("candidate %s: %.6g", poly.steps, value)
            found.append(poly)
    return found

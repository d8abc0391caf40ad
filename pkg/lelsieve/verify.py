"""Golden-value checks shipped with the package (``lel verify``)"""
from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Callable, List, Sequence

from typing_extensions import Literal

from lelsieve.exceptions import LelError
from lelsieve.lattice import parse_sap, rectangle
from lelsieve.ring import PiPoly

logger = logging.getLogger(__name__)

GOLDEN_PATH = Path(__file__).parent / "data" / "golden.json"


@lru_cache(maxsize=1)
def golden() -> dict[str, Any]:
    with GOLDEN_PATH.open(encoding="utf-8") as f:
        return json.load(f)


def pi_product(pi_coeffs_factors: Sequence[tuple[Sequence[int], int]], constant: int = 1) -> List[int]:
    """Expand ``constant * prod(f(pi)^k)`` into coefficients of increasing powers of pi."""
    out = [constant]
    for factor, power in pi_coeffs_factors:
        for _ in range(power):
            nxt = [0] * (len(out) + len(factor) - 1)
            for i, a in enumerate(out):
                for j, b in enumerate(factor):
                    nxt[i + j] += a * b
            out = nxt
    return out


def golden_fraction(entry: dict[str, Any]) -> PiPoly:
    """The printed exact fraction of a golden entry, converted to Q[1/pi]."""
    if "pi_coefficients" in entry:
        coeffs = [int(c) * entry["constant"] for c in entry["pi_coefficients"]]
        den = 1
        for base, power in entry["denominator_factors"]:
            den *= base**power
    else:
        coeffs = pi_product([(f, k) for f, k in entry["factors"]], entry["constant"])
        den = entry["denominator"]
    return PiPoly.from_pi_polynomial(coeffs, Fraction(den), entry["pi_power"])


@dataclass(frozen=True)
class GoldenCheck:
    name: str
    expected: str
    got: str
    passed: bool
    source: str
    seconds: float = 0.0

    def to_dict(self) -> dict[str, object]:
        return {
            "name": self.name,
            "expected": self.expected,
            "got": self.got,
            "passed": self.passed,
            "source": self.source,
            "seconds": round(self.seconds, 3),
        }


def _timed(name: str, source: str, fn: Callable[[], tuple[str, str, bool]]) -> GoldenCheck:
    start = time.perf_counter()
    try:
        expected, got, ok = fn()
    except LelError as err:
        expected, got, ok = "", f"{type(err).__name__}: {err}", False
    elapsed = time.perf_counter() - start
    logger.info("%s: %s in %.2fs", name, "pass" if ok else "FAIL", elapsed)
    return GoldenCheck(name, expected, got, ok, source, elapsed)


def _fraction_checks() -> List[GoldenCheck]:
    from lelsieve.sieve import fraction_exact

    out = []
    for entry in golden()["fractions"]:

        def run(entry=entry):
            want = golden_fraction(entry)
            got = fraction_exact(parse_sap(entry["steps"]))
            value = float(got.evaluate(64))
            ok = got == want and abs(value - entry["value"]) <= entry["abs_tol"]
            return f"{entry['value']}", f"{value:.8g}", ok

        out.append(_timed(f"F {entry['name']}", entry["source"], run))
    return out


def _series_checks() -> List[GoldenCheck]:
    from lelsieve.series import alpha, mu_tilde, rp_series_infinite, zeta_tilde

    g = golden()
    out = []
    for name, entry in g["series"].items():

        def run(entry=entry):
            want = {int(k): v for k, v in entry["coefficients"].items()}
            series = rp_series_infinite(parse_sap(entry["steps"]), max(want))
            got = {k: series[k] for k in want}
            return str(list(want.values())), str(list(got.values())), got == want

        out.append(_timed(f"R_{name} coefficients", entry["source"], run))

    def run_zeta():
        want = g["zeta_tilde"]["coefficients"]
        got = zeta_tilde(len(want) - 1).coeffs
        return str(want), str(got), got == want

    def run_mu():
        want = g["mu_tilde"]["coefficients"]
        got = mu_tilde(len(want) - 1).coeffs
        return str(want), str(got), got == want

    def run_alpha():
        want = g["alpha"]["value"]
        got = float(alpha(64))
        return str(want), f"{got:.6f}", abs(got - want) <= g["alpha"]["abs_tol"]

    out.append(_timed("rooted-hike zeta", g["zeta_tilde"]["source"], run_zeta))
    out.append(_timed("rooted-hike Moebius", g["mu_tilde"]["source"], run_mu))
    out.append(_timed("alpha", g["alpha"]["source"], run_alpha))
    return out


def _oracle_checks() -> List[GoldenCheck]:
    from lelsieve.oracle import count_last_loop

    out = []
    for entry in golden()["oracle_counts"]:

        def run(entry=entry):
            got = count_last_loop(parse_sap(entry["steps"]), entry["length"])
            return str(entry["count"]), str(got), got == entry["count"]

        out.append(_timed(f"walks of length {entry['length']} ending on {entry['steps']}", entry["source"], run))
    return out


def _full_checks(threads: int) -> List[GoldenCheck]:
    from lelsieve.sieve import fraction_exact, fraction_numeric, resolve_long_sap, sweep

    g = golden()
    out = []
    long_sap = g["long_sap"]

    def run_long():
        want = golden_fraction(long_sap)
        found = resolve_long_sap(long_sap["length"], long_sap["value"], long_sap["abs_tol"])
        for p in found:
            if fraction_exact(p) == want:
                return f"{long_sap['value']:.5g}", f"{p.steps} ({len(found)} candidates)", True
        return f"{long_sap['value']:.5g}", f"{len(found)} candidates, none exact", False

    sq = g["square_70"]

    def run_square():
        value = float(fraction_numeric(rectangle(sq["side"], sq["side"]), sq["precision"]))
        ok = abs(value / sq["value"] - 1) <= sq["rel_tol"]
        return f"{sq['value']:.5g}", f"{value:.5g}", ok

    table = g["table"]

    def run_table():
        rows = [(length, s) for length, s in table["rows"] if length <= 14]
        got = sweep(14, precision=53, threads=threads)
        values = [float(r.total) for r in got.rows]
        ok = all(abs(v - s) <= table["abs_tol"] for v, (_, s) in zip(values, rows))
        return str([s for _, s in rows]), str([round(v, 4) for v in values]), ok

    out.append(_timed("18-step polygon", long_sap["source"], run_long))
    out.append(_timed("70x70 square", sq["source"], run_square))
    out.append(_timed("S(L) for L <= 14", table["source"], run_table))
    return out


def run_verify(level: Literal["quick", "full"] | str = "quick", threads: int = 1) -> List[GoldenCheck]:
    if level not in ("quick", "full"):
        raise ValueError(f"unknown verify level {level!r}")
    checks = _fraction_checks() + _series_checks() + _oracle_checks()
    if level == "full":
        checks += _full_checks(threads)
    return checks

from __future__ import annotations

import argparse
import os
from pathlib import Path

from typing_extensions import Literal, Self

from lelsieve.exceptions import UsageError
from lelsieve.ring import DEFAULT_PRECISION, MIN_PRECISION

OutputFormat = Literal["json", "csv", "text"]
FORMATS = ("json", "csv", "text")
CACHE_ENV = "LEL_CACHE"


class Config:
    """Run settings shared by every subcommand.

    Built from command-line flags and validated before any engine runs.
    """

    precision: int
    """
    Mantissa bits for floating-point results. At least 53; 53 selects the fast
    float64 path for fractions.
    """
    order: int
    """
    Truncation order of generating series (highest power of z kept).
    """
    cache: Path | None
    """
    Append-only sweep cache file. Defaults to the ``LEL_CACHE`` environment
    variable; None disables caching.
    """
    output_format: OutputFormat
    """
    One of ``json``, ``csv`` or ``text``. Column orders are listed in
    ``docs/formats.md``.
    """
    threads: int
    """
    Worker processes for sweeps and exhaustive enumeration. Results do not depend
    on it.
    """
    lenient: bool
    """
    If True, corrupt cache lines are skipped with a warning instead of aborting.
    """
    dedup: bool
    """
    If True, sweeps evaluate each vertex-support class once and weight it by its
    anchored multiplicity. False evaluates every anchored polygon, for
    differential testing.
    """

    def __init__(
        self,
        precision: int = DEFAULT_PRECISION,
        order: int = 40,
        cache: str | os.PathLike[str] | None = None,
        output_format: str = "json",
        threads: int | None = None,
        lenient: bool = False,
        dedup: bool = True,
    ):
        self.precision = precision
        self.order = order
        if cache is None:
            cache = os.environ.get(CACHE_ENV) or None
        self.cache = Path(cache) if cache is not None else None
        self.output_format = output_format  # type: ignore[assignment]
        self.threads = threads if threads is not None else (os.cpu_count() or 1)
        self.lenient = lenient
        self.dedup = dedup

    def validate(self) -> Self:
        if self.precision < MIN_PRECISION:
            raise UsageError(f"--precision must be at least {MIN_PRECISION}, got {self.precision}")
        if self.order < 0:
            raise UsageError(f"--order must be non-negative, got {self.order}")
        if self.output_format not in FORMATS:
            raise UsageError(f"--format must be one of {', '.join(FORMATS)}, got {self.output_format!r}")
        if self.threads < 1:
            raise UsageError(f"--threads must be at least 1, got {self.threads}")
        return self

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> Self:
        return cls(
            precision=getattr(ns, "precision", DEFAULT_PRECISION),
            order=getattr(ns, "order", 40),
            cache=getattr(ns, "cache", None),
            output_format=getattr(ns, "format", "json"),
            threads=getattr(ns, "threads", None),
            lenient=getattr(ns, "lenient", False),
            dedup=not getattr(ns, "no_dedup", False),
        ).validate()

    def __repr__(self):
        fields = ", ".join(f"{k}={v!r}" for k, v in vars(self).items())
        return f"Config({fields})"

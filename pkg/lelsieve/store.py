"""Append-only cache of sweep results, one JSON record per line"""
from __future__ import annotations

import json
import logging
import os
import threading
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Set, Union

from typing_extensions import Self

from lelsieve.exceptions import CorruptRecord

logger = logging.getLogger(__name__)

ENGINE_VERSION = "1"
SUFFIX = ".lel.jsonl"


@dataclass(frozen=True)
class CacheRecord:
    shape_key: str
    ell: int
    multiplicity: int
    exact: Optional[str]
    numeric: str
    precision: int
    engine_version: str = ENGINE_VERSION

    def usable(self, precision: int, exact: bool = False) -> bool:
        return self.precision >= precision and (not exact or self.exact is not None)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    @classmethod
    def from_dict(cls, obj: dict[str, object]) -> CacheRecord:
        return cls(
            shape_key=str(obj["shape_key"]),
            ell=int(obj["ell"]),  # type: ignore[call-overload]
            multiplicity=int(obj["multiplicity"]),  # type: ignore[call-overload]
            exact=None if obj.get("exact") is None else str(obj["exact"]),
            numeric=str(obj["numeric"]),
            precision=int(obj["precision"]),  # type: ignore[call-overload]
            engine_version=str(obj.get("engine_version", "")),
        )


class Store:
    """Resumable sweep cache.

    Use as a context manager. Records written by another engine version are
    reported and ignored, so their classes get recomputed. When a key is written
    twice the later record wins, and the file is compacted on close.
    """

    def __init__(
        self,
        path: Union[str, os.PathLike[str]],
        lenient: bool = False,
        engine_version: str = ENGINE_VERSION,
    ):
        self.path = Path(path)
        self.lenient = lenient
        self.engine_version = engine_version
        self._lock = threading.Lock()
        self._records: Dict[str, CacheRecord] = {}
        self._stale = 0
        self._duplicates = False
        self._handle = None
        self._load()

    def _load(self):
        if not self.path.exists():
            return
        with self.path.open(encoding="utf-8") as f:
            for number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    record = CacheRecord.from_dict(json.loads(line))
                except (ValueError, KeyError, TypeError) as err:
                    if not self.lenient:
                        raise CorruptRecord(f"{self.path}: {err}", number) from None
                    warnings.warn(f"{self.path}: skipping corrupt line {number}")
                    continue
                if record.engine_version != self.engine_version:
                    self._stale += 1
                    continue
                if record.shape_key in self._records:
                    self._duplicates = True
                self._records[record.shape_key] = record
        if self._stale:
            warnings.warn(
                f"{self.path}: ignoring {self._stale} records from another engine "
                f"version (current {self.engine_version}); they will be recomputed"
            )
        logger.info("loaded %d cached records from %s", len(self._records), self.path)

    def __enter__(self) -> Self:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._handle = self.path.open("a", encoding="utf-8")
        return self

    def __exit__(self, *exc: object):
        self.close()

    def close(self):
        if self._handle is not None:
            self._handle.close()
            self._handle = None
        if self._duplicates or self._stale:
            self.compact()

    def append(self, record: CacheRecord):
        if record.engine_version != self.engine_version:
            record = CacheRecord(**{**asdict(record), "engine_version": self.engine_version})
        with self._lock:
            if record.shape_key in self._records:
                self._duplicates = True
            if self._handle is None:
                with self.path.open("a", encoding="utf-8") as f:
                    f.write(record.to_json() + "\n")
            else:
                self._handle.write(record.to_json() + "\n")
                self._handle.flush()
            self._records[record.shape_key] = record

    def lookup(self, shape_key: str) -> Optional[CacheRecord]:
        return self._records.get(shape_key)

    def __contains__(self, shape_key: str) -> bool:
        return shape_key in self._records

    def __len__(self):
        return len(self._records)

    def keys(self) -> Set[str]:
        return set(self._records)

    def records(self) -> Iterator[CacheRecord]:
        return iter(self._records.values())

    def replay(self) -> List[CacheRecord]:
        """Current records ordered by length, then key."""
        return sorted(self._records.values(), key=lambda r: (r.ell, r.shape_key))

    def compact(self):
        """Rewrite the file with one current record per key."""
        with self._lock:
            tmp = self.path.with_suffix(self.path.suffix + ".tmp")
            with tmp.open("w", encoding="utf-8") as f:
                for record in self.replay():
                    f.write(record.to_json() + "\n")
            os.replace(tmp, self.path)
            self._duplicates = False
            self._stale = 0

    def resume_sweep(self, max_len: int, dedup: bool = True) -> Set[str]:
        """Keys of the sweep to ``max_len`` not yet in the cache."""
        from lelsieve.sieve import sweep_units

        return {u.key for u in sweep_units(max_len, dedup)} - self.keys()

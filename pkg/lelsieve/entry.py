from __future__ import annotations

import json
import os
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Union, overload

from lelsieve.exceptions import CorruptRecord, EmptyInput
from lelsieve.lattice import Sap, parse_sap

if TYPE_CHECKING:
    from typing_extensions import TypeAlias

    StrPath: TypeAlias = Union[str, "os.PathLike[str]"]


@overload
def parse(steps: str) -> Sap:
    ...


@overload
def parse(steps: Iterable[str]) -> list[Sap]:
    ...


def parse(steps: str | Iterable[str]):
    if isinstance(steps, str):
        return parse_sap(steps)
    result: list[Sap] = []
    for s in steps:
        result.append(parse_sap(s))
    return result


def _line_steps(line: str, line_number: int) -> str:
    if line.startswith("{"):
        try:
            obj = json.loads(line)
            return str(obj["steps"])
        except (ValueError, KeyError, TypeError) as err:
            raise CorruptRecord(f"bad JSON polygon ({err})", line_number) from None
    return line


def read_saps(path: StrPath) -> list[Sap]:
    """Read polygons from a file.

    One polygon per line, either a bare step string (``RULD``) or a JSON object
    ``{"steps": "RULD"}``. Blank lines and ``#`` comments are skipped.
    """
    result: list[Sap] = []
    with Path(path).open(encoding="utf-8") as f:
        for i, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            result.append(parse_sap(_line_steps(line, i)))
    if not result:
        raise EmptyInput(f"no polygons in {os.fspath(path)}")
    return result

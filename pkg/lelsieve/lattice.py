"""Square-lattice geometry: steps, self-avoiding polygons and patch graphs"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterator, NamedTuple, Tuple

import numpy as np
from typing_extensions import Protocol

from lelsieve.exceptions import EmptyInput, InvalidStep, NotClosed, NotSimple


class Point(NamedTuple):
    x: int
    y: int

    def __add__(self, other: Tuple[int, int]) -> Point:  # type: ignore[override]
        return Point(self.x + other[0], self.y + other[1])

    def __sub__(self, other: Tuple[int, int]) -> Point:
        return Point(self.x - other[0], self.y - other[1])

    def norm1(self) -> int:
        return abs(self.x) + abs(self.y)


ORIGIN = Point(0, 0)


class Lattice(Protocol):
    """What the sieve needs from a regular lattice."""

    @property
    def degree(self) -> int:
        ...

    @property
    def steps(self) -> Dict[str, Point]:
        ...

    def neighbours(self, v: Point) -> list[Point]:
        ...


class SquareLattice:
    degree = 4
    steps: Dict[str, Point] = {
        "R": Point(1, 0),
        "U": Point(0, 1),
        "L": Point(-1, 0),
        "D": Point(0, -1),
    }
    opposite = {"R": "L", "L": "R", "U": "D", "D": "U"}

    def neighbours(self, v: Point) -> list[Point]:
        return [v + s for s in self.steps.values()]


SQUARE = SquareLattice()
_STEP_ITEMS = tuple(SQUARE.steps.items())


class KeyMode(enum.Enum):
    ORIENTED_ANCHORED = "oriented_anchored"
    SHAPE = "shape"


def trace_steps(steps: str, start: Point = ORIGIN) -> list[Point]:
    """Vertices visited by ``steps``, the start included, the endpoint included."""
    out = [start]
    cur = start
    for c in steps:
        try:
            cur = cur + SQUARE.steps[c]
        except KeyError:
            raise InvalidStep(f"invalid step {c!r} in {steps!r}") from None
        out.append(cur)
    return out


@dataclass(frozen=True)
class Sap:
    """Oriented self-avoiding polygon with a distinguished starting vertex.

    ``vertices`` lists the distinct vertices in visiting order, so
    ``len(vertices) == length``; the closing return to ``start`` is implicit.
    """

    steps: str
    start: Point = ORIGIN
    vertices: Tuple[Point, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if not self.vertices:
            object.__setattr__(
                self, "vertices", tuple(trace_steps(self.steps, self.start)[:-1])
            )

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def is_edge(self) -> bool:
        return len(self.steps) == 2

    @cached_property
    def support(self) -> frozenset[Point]:
        return frozenset(self.vertices)

    @property
    def contains_origin(self) -> bool:
        return ORIGIN in self.support

    def reverse(self) -> Sap:
        """Same polygon traversed the other way from the same start."""
        back = "".join(SquareLattice.opposite[c] for c in reversed(self.steps))
        return Sap(back, self.start)

    def translate(self, dx: int, dy: int) -> Sap:
        return Sap(self.steps, self.start + (dx, dy))

    def start_at(self, index: int) -> Sap:
        """Rotate the step string so traversal starts at ``vertices[index]``."""
        index %= self.length
        return Sap(self.steps[index:] + self.steps[:index], self.vertices[index])

    def anchored(self) -> Sap:
        """Translate so the walk starts at the origin."""
        return Sap(self.steps)

    def support_key(self) -> str:
        """Translation class of the vertex set.

        Fractions depend on nothing else, so this is the cache key for sweeps.
        """
        low = min(self.support, key=lambda v: (v.y, v.x))
        pts = sorted((v.x - low.x, v.y - low.y) for v in self.support)
        return ";".join(f"{x},{y}" for x, y in pts)

    def __str__(self):
        return self.steps


def parse_sap(steps: str, start: Point = ORIGIN) -> Sap:
    """Validate a step string as a self-avoiding polygon.

    Parameters
    ----------
    steps : str
        Word over ``R``, ``L``, ``U``, ``D``. Surrounding whitespace is ignored.
    start : Point
        Vertex the walk starts from.

    Returns
    -------
    Sap
    """
    s = steps.strip().upper()
    if not s:
        raise EmptyInput("empty step string")
    pts = trace_steps(s, start)
    if pts[-1] != start:
        raise NotClosed(f"{s!r} ends at {tuple(pts[-1])}, not at {tuple(start)}")
    if len(s) < 2:
        raise NotClosed(f"{s!r} is too short to be closed")
    inner = pts[:-1]
    if len(set(inner)) != len(inner):
        raise NotSimple(f"{s!r} visits a vertex twice")
    return Sap(s, start, tuple(inner))


def _min_rotation(s: str) -> str:
    return min(s[i:] + s[:i] for i in range(len(s)))


def canonical_key(p: Sap, mode: KeyMode | str = KeyMode.ORIENTED_ANCHORED) -> str:
    mode = KeyMode(mode)
    if mode is KeyMode.ORIENTED_ANCHORED:
        return f"{p.start.x},{p.start.y}:{p.steps}"
    return _min_rotation(p.steps)


def enumerate_anchored_saps(max_len: int) -> Iterator[Sap]:
    """Every polygon through the origin starting there, both orientations.

    Depth-first in step order R, U, L, D; a branch is cut as soon as the
    remaining budget is shorter than the way home.
    """
    if max_len < 2:
        return
    visited = {ORIGIN}
    path: list[str] = []

    def grow(cur: Point) -> Iterator[Sap]:
        depth = len(path)
        for c, d in _STEP_ITEMS:
            nxt = cur + d
            if nxt == ORIGIN:
                if depth >= 1:
                    yield Sap("".join(path) + c)
                continue
            if nxt in visited or nxt.norm1() > max_len - depth - 1:
                continue
            visited.add(nxt)
            path.append(c)
            yield from grow(nxt)
            path.pop()
            visited.discard(nxt)

    yield from grow(ORIGIN)


def count_anchored_saps(max_len: int) -> dict[int, int]:
    counts: dict[int, int] = {}
    for p in enumerate_anchored_saps(max_len):
        counts[p.length] = counts.get(p.length, 0) + 1
    return dict(sorted(counts.items()))


def _above_root(v: Point) -> bool:
    return v.y > 0 or (v.y == 0 and v.x > 0)


def enumerate_polygons(length: int) -> Iterator[Sap]:
    """One polygon per translation class, of exactly ``length`` steps.

    Each is rooted at its lowest, then leftmost, vertex placed at the origin and
    traversed with first step ``R``. Length 2 gives the horizontal and the vertical
    edge.
    """
    if length < 2 or length % 2:
        return
    if length == 2:
        yield Sap("RL")
        yield Sap("UD")
        return
    start = Point(1, 0)
    visited = {ORIGIN, start}
    path = ["R"]

    def grow(cur: Point) -> Iterator[Sap]:
        depth = len(path)
        for c, d in _STEP_ITEMS:
            nxt = cur + d
            if nxt == ORIGIN:
                if depth == length - 1:
                    yield Sap("".join(path) + c)
                continue
            if nxt in visited or not _above_root(nxt):
                continue
            if nxt.norm1() > length - depth - 1:
                continue
            visited.add(nxt)
            path.append(c)
            yield from grow(nxt)
            path.pop()
            visited.discard(nxt)

    yield from grow(start)


def anchored_multiplicity(p: Sap) -> int:
    """Anchored oriented polygons at the origin sharing ``p``'s cycle.

    One per (start vertex, orientation); an edge is its own reversal.
    """
    return p.length if p.is_edge else 2 * p.length


@dataclass(frozen=True)
class PatchGraph:
    """A polygon's vertices, their lattice neighbours, and the edges touching the polygon.

    The polygon support comes first in ``vertices``, in traversal order.
    """

    vertices: Tuple[Point, ...]
    index: Dict[Point, int]
    neighbours: Tuple[Tuple[int, ...], ...]
    support_size: int

    @property
    def size(self) -> int:
        return len(self.vertices)

    @cached_property
    def deg(self) -> Tuple[int, ...]:
        return tuple(len(nb) for nb in self.neighbours)

    @cached_property
    def b_matrix(self) -> np.ndarray:
        b = np.zeros((self.size, self.size), dtype=np.int64)
        for i, nb in enumerate(self.neighbours):
            b[i, list(nb)] = 1
        return b

    def offsets(self) -> set[Tuple[int, int]]:
        """Distinct displacements between vertex pairs."""
        return {(v.x - u.x, v.y - u.y) for u in self.vertices for v in self.vertices}


def build_patch(p: Sap, lattice: Lattice = SQUARE) -> PatchGraph:
    verts: list[Point] = list(p.vertices)
    seen = set(verts)
    for v in p.vertices:
        for u in lattice.neighbours(v):
            if u not in seen:
                seen.add(u)
                verts.append(u)
    index = {v: i for i, v in enumerate(verts)}
    support = p.support
    # only edges with an endpoint on p: B_p is A_G - A_{G-p} restricted to G_p
    neighbours = tuple(
        tuple(
            index[u]
            for u in lattice.neighbours(v)
            if u in index and (v in support or u in support)
        )
        for v in verts
    )
    return PatchGraph(tuple(verts), index, neighbours, len(p.vertices))


def rectangle(width: int, height: int) -> Sap:
    """Boundary of a ``width`` by ``height`` rectangle, counterclockwise from its corner."""
    return parse_sap("R" * width + "U" * height + "L" * width + "D" * height)

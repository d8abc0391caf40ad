"""Brute-force ground truth: loop erasure, exhaustive walk counts, Monte Carlo

Loops are erased chronologically. When a walk steps onto a vertex already on the
current self-avoiding path, the loop (path segment from that vertex plus the
closing step) is erased. For a closed walk the last such loop closes at the start
and is the walk's last erased loop.
"""
from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from lelsieve.exceptions import InvalidStep, LengthTooLarge, OpenWalkNoLast
from lelsieve.lattice import ORIGIN, SQUARE, Point, Sap

logger = logging.getLogger(__name__)

_STEPS = tuple(SQUARE.steps.items())
_LETTERS = "".join(c for c, _ in _STEPS)

COUNT_MAX_LENGTH = 14
HISTOGRAM_MAX_LENGTH = 12


@dataclass(frozen=True)
class Walk:
    steps: str
    start: Point = ORIGIN

    def points(self) -> Iterator[Point]:
        cur = self.start
        yield cur
        for c in self.steps:
            cur = cur + SQUARE.steps[c]
            yield cur

    @property
    def is_closed(self) -> bool:
        *_, end = self.points()
        return end == self.start


def walk_from_steps(steps: str, start: Point = ORIGIN) -> Walk:
    s = steps.strip().upper()
    bad = set(s) - set(_LETTERS)
    if bad:
        raise InvalidStep(f"invalid steps {sorted(bad)} in {steps!r}")
    return Walk(s, start)


def closed_walks(length: int, start: Point = ORIGIN) -> Iterator[Walk]:
    """Every closed walk of ``length`` steps from ``start``, in step-letter order"""
    steps: List[str] = []

    def grow(cur: Point, left: int) -> Iterator[Walk]:
        if left == 0:
            if cur == start:
                yield Walk("".join(steps), start)
            return
        for c, d in _STEPS:
            nxt = cur + d
            if (nxt - start).norm1() > left - 1:
                continue
            steps.append(c)
            yield from grow(nxt, left - 1)
            steps.pop()

    if length >= 0:
        yield from grow(start, length)


@dataclass(frozen=True)
class ErasedLoop:
    anchor: Point
    steps: str

    def as_sap(self) -> Sap:
        return Sap(self.steps, self.anchor)


@dataclass(frozen=True)
class ErasureRecord:
    erased_loops: Tuple[ErasedLoop, ...]
    skeleton: Tuple[Point, ...]
    """Surviving self-avoiding path, start first."""
    closed: bool

    @property
    def last(self) -> str:
        if not self.closed or not self.erased_loops:
            raise OpenWalkNoLast("only a nonempty closed walk has a last erased loop")
        return self.erased_loops[-1].steps


def loop_erase(w: Walk) -> ErasureRecord:
    stack: List[Point] = [w.start]
    path: List[str] = []
    pos: Dict[Point, int] = {w.start: 0}
    loops: List[ErasedLoop] = []
    for c in w.steps:
        nxt = stack[-1] + SQUARE.steps[c]
        i = pos.get(nxt)
        if i is None:
            pos[nxt] = len(stack)
            stack.append(nxt)
            path.append(c)
            continue
        loops.append(ErasedLoop(nxt, "".join(path[i:]) + c))
        for v in stack[i + 1 :]:
            del pos[v]
        del stack[i + 1 :]
        del path[i:]
    return ErasureRecord(tuple(loops), tuple(stack), stack[-1] == w.start)


class _ClosedWalkSearch:
    """Depth-first search over closed walks from the origin with live erasure.

    ``visit`` sees the last erased loop of every closed walk of ``length`` whose
    first steps are ``prefix``.
    """

    def __init__(self, length: int, prefix: str = ""):
        self.length = length
        self.prefix = prefix

    def run(self) -> Counter[str]:
        counts: Counter[str] = Counter()
        stack: List[Point] = [ORIGIN]
        path: List[str] = []
        pos: Dict[Point, int] = {ORIGIN: 0}
        length = self.length

        def step(depth: int, c: str, d: Point) -> Optional[tuple[int, List[Point], List[str]]]:
            nxt = stack[-1] + d
            i = pos.get(nxt)
            if i is None:
                pos[nxt] = len(stack)
                stack.append(nxt)
                path.append(c)
                return None
            popped_v = stack[i + 1 :]
            popped_s = path[i:]
            for v in popped_v:
                del pos[v]
            del stack[i + 1 :]
            del path[i:]
            return i, popped_v, popped_s

        def undo(undo_info: Optional[tuple[int, List[Point], List[str]]]):
            if undo_info is None:
                del pos[stack.pop()]
                path.pop()
                return
            i, popped_v, popped_s = undo_info
            for k, v in enumerate(popped_v, start=i + 1):
                pos[v] = k
            stack.extend(popped_v)
            path.extend(popped_s)

        def grow(depth: int):
            cur = stack[-1]
            remaining = length - depth
            for c, d in _STEPS:
                nxt = cur + d
                if nxt.norm1() > remaining - 1:
                    continue
                if remaining == 1:
                    # only the origin is reachable; it sits at the bottom of the stack
                    counts["".join(path) + c] += 1
                    continue
                info = step(depth, c, d)
                grow(depth + 1)
                undo(info)

        depth = 0
        cur = ORIGIN
        for c in self.prefix:
            d = SQUARE.steps[c]
            nxt = cur + d
            if nxt.norm1() > length - depth - 1:
                return counts
            if depth == length - 1:
                counts["".join(path) + c] += 1
                return counts
            step(depth, c, d)
            depth += 1
            cur = nxt
        grow(depth)
        return counts


def _check_length(length: int, bound: int):
    if length > bound:
        raise LengthTooLarge(f"exhaustive enumeration is limited to length {bound}, got {length}")


def _shards(length: int) -> List[str]:
    k = min(2, length)
    out = [""]
    for _ in range(k):
        out = [s + c for s in out for c in _LETTERS]
    return out


def _run_shard(args: tuple[int, str]) -> Counter[str]:
    length, prefix = args
    return _ClosedWalkSearch(length, prefix).run()


def last_loop_histogram(
    length: int, threads: int = 1, max_length: int = HISTOGRAM_MAX_LENGTH
) -> Dict[str, int]:
    """Last erased loop of every closed walk of ``length`` from the origin.

    Keys are step strings of polygons anchored at the origin. The counts add up to
    ``C(l, l/2)^2``.
    """
    _check_length(length, max_length)
    if length <= 0 or length % 2:
        return {}
    jobs = [(length, s) for s in _shards(length)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(_run_shard, jobs))
    else:
        parts = [_run_shard(j) for j in jobs]
    total: Counter[str] = Counter()
    for part in parts:
        total.update(part)
    return dict(sorted(total.items()))


def count_last_loop(p: Sap, length: int, max_length: int = COUNT_MAX_LENGTH) -> int:
    """Closed walks of ``length`` from the start of ``p`` whose last erased loop is ``p``."""
    _check_length(length, max_length)
    if length < p.length or length % 2:
        return 0
    return _ClosedWalkSearch(length).run().get(p.steps, 0)


@dataclass(frozen=True)
class MonteCarloResult:
    samples: int
    hits: int
    returned: int
    seed: int
    generator: str = "PCG64"

    @property
    def truncated(self) -> int:
        return self.samples - self.returned

    @property
    def truncated_fraction(self) -> float:
        return self.truncated / self.samples

    @property
    def estimate(self) -> float:
        """Share of returning walks whose last erased loop is the target."""
        return self.hits / self.returned if self.returned else 0.0

    @property
    def stderr(self) -> float:
        p = self.estimate
        return math.sqrt(p * (1 - p) / self.returned) if self.returned else math.inf

    @property
    def bounds(self) -> tuple[float, float]:
        """Range of the true probability if abandoned walks all missed or all hit."""
        return self.hits / self.samples, (self.hits + self.truncated) / self.samples

    def to_dict(self) -> dict[str, object]:
        return {
            "samples": self.samples,
            "hits": self.hits,
            "returned": self.returned,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "truncated_fraction": self.truncated_fraction,
            "bounds": list(self.bounds),
            "seed": self.seed,
            "generator": self.generator,
        }


def _first_return_shard(args: tuple[str, int, int, np.random.SeedSequence]) -> tuple[int, int]:
    target, samples, max_len, seed_seq = args
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    deltas = [d for _, d in _STEPS]
    hits = returned = 0
    block = 256
    for _ in range(samples):
        stack: List[Point] = [ORIGIN]
        path: List[str] = []
        pos: Dict[Point, int] = {ORIGIN: 0}
        t = 0
        done = False
        while t < max_len and not done:
            draws = rng.integers(0, 4, size=min(block, max_len - t))
            for r in draws:
                t += 1
                c = _LETTERS[r]
                nxt = stack[-1] + deltas[r]
                if nxt == ORIGIN:
                    returned += 1
                    hits += "".join(path) + c == target
                    done = True
                    break
                i = pos.get(nxt)
                if i is None:
                    pos[nxt] = len(stack)
                    stack.append(nxt)
                    path.append(c)
                else:
                    for v in stack[i + 1 :]:
                        del pos[v]
                    del stack[i + 1 :]
                    del path[i:]
    return hits, returned


MC_SHARDS = 8


def mc_first_return(
    p: Sap, samples: int, max_len: int, seed: int, threads: int = 1
) -> MonteCarloResult:
    """Run walks from the origin until they first come back (or ``max_len`` steps).

    Samples are split over a fixed number of independent streams spawned from
    ``seed``, so the result does not depend on ``threads``.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    shards = min(MC_SHARDS, samples)
    sizes = [samples // shards + (1 if k < samples % shards else 0) for k in range(shards)]
    seeds = np.random.SeedSequence(seed).spawn(shards)
    jobs = [(p.steps, n, max_len, s) for n, s in zip(sizes, seeds)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(_first_return_shard, jobs))
    else:
        parts = [_first_return_shard(j) for j in jobs]
    hits = sum(h for h, _ in parts)
    returned = sum(r for _, r in parts)
    logger.info("monte carlo: %d/%d returned, %d hits", returned, samples, hits)
    return MonteCarloResult(samples, hits, returned, seed)

import math
from collections import Counter

import pytest

from lelsieve.exceptions import InvalidStep, LengthTooLarge, OpenWalkNoLast
from lelsieve.lattice import ORIGIN, Point, enumerate_anchored_saps, parse_sap
from lelsieve.oracle import (
    closed_walks,
    count_last_loop,
    last_loop_histogram,
    loop_erase,
    mc_first_return,
    walk_from_steps,
)
from lelsieve.series import rp_series_infinite


def test_loop_erasure_order():
    record = loop_erase(walk_from_steps("RUDL"))
    assert [(l.anchor, l.steps) for l in record.erased_loops] == [
        (Point(1, 0), "UD"),
        (ORIGIN, "RL"),
    ]
    assert record.skeleton == (ORIGIN,)
    assert record.last == "RL"
    assert record.erased_loops[0].as_sap().support == {Point(1, 0), Point(1, 1)}


def test_closed_walk_erases_its_whole_length():
    w = walk_from_steps("RULDRRLLUUDD")
    assert w.is_closed
    record = loop_erase(w)
    assert sum(len(l.steps) for l in record.erased_loops) == len(w.steps)
    assert record.last == "UD"


def test_open_walk_has_no_last_loop():
    record = loop_erase(walk_from_steps("RUL"))
    assert not record.closed
    assert record.skeleton == (ORIGIN, Point(1, 0), Point(1, 1), Point(0, 1))
    with pytest.raises(OpenWalkNoLast):
        record.last
    with pytest.raises(OpenWalkNoLast):
        loop_erase(walk_from_steps("")).last


def test_walk_rejects_bad_steps():
    with pytest.raises(InvalidStep):
        walk_from_steps("RUX")


def test_published_counts():
    assert count_last_loop(parse_sap("RL"), 4) == 7
    assert count_last_loop(parse_sap("RULD"), 6) == 12
    assert count_last_loop(parse_sap("RULD"), 5) == 0
    assert count_last_loop(parse_sap("RULD"), 2) == 0


def test_length_limits():
    with pytest.raises(LengthTooLarge):
        count_last_loop(parse_sap("RL"), 16)
    with pytest.raises(LengthTooLarge):
        last_loop_histogram(14)


@pytest.mark.parametrize("length", [2, 4, 6, 8])
def test_histogram_totals(length: int):
    hist = last_loop_histogram(length)
    assert sum(hist.values()) == math.comb(length, length // 2) ** 2
    for steps in hist:
        assert parse_sap(steps).length <= length


def test_histogram_odd_length_is_empty():
    assert last_loop_histogram(7) == {}


def test_histogram_independent_of_threads():
    assert last_loop_histogram(8, threads=2) == last_loop_histogram(8)


def _check_against_series(max_len: int, max_poly: int):
    series = {}
    for p in enumerate_anchored_saps(max_poly):
        key = p.support_key()
        if key not in series:
            series[key] = rp_series_infinite(p, max_len)
    for length in range(2, max_len + 1, 2):
        hist = last_loop_histogram(length)
        for p in enumerate_anchored_saps(min(max_poly, length)):
            assert hist.get(p.steps, 0) == series[p.support_key()][length], (p.steps, length)


def test_brute_force_matches_series():
    _check_against_series(8, 6)


@pytest.mark.slow
def test_brute_force_matches_series_to_length_ten():
    _check_against_series(10, 8)


def test_monte_carlo_is_reproducible():
    p = parse_sap("RL")
    a = mc_first_return(p, 400, 200, seed=7)
    b = mc_first_return(p, 400, 200, seed=7)
    c = mc_first_return(p, 400, 200, seed=7, threads=2)
    assert a == b == c
    assert a.samples == 400
    assert a.returned + a.truncated == 400


def test_monte_carlo_brackets_edge_fraction():
    r = mc_first_return(parse_sap("RL"), 2000, 400, seed=2024)
    low, high = r.bounds
    se = math.sqrt(0.25 / r.samples)
    assert low - 3 * se <= 0.125 <= high + 3 * se
    d = r.to_dict()
    assert d["generator"] == "PCG64"
    assert d["bounds"] == [low, high]


def test_monte_carlo_needs_samples():
    with pytest.raises(ValueError):
        mc_first_return(parse_sap("RL"), 0, 10, seed=1)


@pytest.mark.parametrize("length", [0, 2, 4, 6])
def test_closed_walks_agree_with_the_search(length: int):
    walks = list(closed_walks(length))
    assert len(walks) == math.comb(length, length // 2) ** 2
    assert all(w.is_closed for w in walks)
    if length:
        assert Counter(loop_erase(w).last for w in walks) == last_loop_histogram(length)
    assert list(closed_walks(3)) == []


@pytest.mark.slow
def test_square_count_at_length_twelve():
    assert count_last_loop(parse_sap("RULD"), 12) == 23464

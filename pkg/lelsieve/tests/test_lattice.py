import json
from pathlib import Path

import numpy as np
import pytest

from lelsieve import parse
from lelsieve.entry import read_saps
from lelsieve.exceptions import CorruptRecord, EmptyInput, InvalidStep, NotClosed, NotSimple
from lelsieve.lattice import (
    ORIGIN,
    KeyMode,
    Point,
    Sap,
    anchored_multiplicity,
    build_patch,
    canonical_key,
    count_anchored_saps,
    enumerate_anchored_saps,
    enumerate_polygons,
    parse_sap,
    rectangle,
)


def test_parse_sap():
    p = parse_sap(" ruld ")
    assert p.steps == "RULD"
    assert p.length == 4
    assert p.vertices == (Point(0, 0), Point(1, 0), Point(1, 1), Point(0, 1))
    assert p.contains_origin


@pytest.mark.parametrize(
    ("steps", "err"),
    [
        ("", EmptyInput),
        ("   ", EmptyInput),
        ("RX", InvalidStep),
        ("R", NotClosed),
        ("RU", NotClosed),
        ("RRLL", NotSimple),
        ("RULDRULD", NotSimple),
    ],
)
def test_parse_sap_errors(steps: str, err: type):
    with pytest.raises(err):
        parse_sap(steps)


def test_parse_many():
    saps = parse(["RL", "RULD"])
    assert [s.length for s in saps] == [2, 4]
    assert isinstance(parse("UD"), Sap)


def test_read_saps(tmp_path: Path):
    f = tmp_path / "saps.txt"
    f.write_text(
        "# polygons\n"
        "RL\n"
        "\n"
        + json.dumps({"steps": "RRULLD"})
        + "\n"
    )
    saps = read_saps(f)
    assert [s.steps for s in saps] == ["RL", "RRULLD"]


def test_read_saps_corrupt(tmp_path: Path):
    f = tmp_path / "saps.txt"
    f.write_text("RL\n{\"step\": \"RULD\"}\n")
    with pytest.raises(CorruptRecord) as info:
        read_saps(f)
    assert info.value.line_number == 2


def test_read_saps_empty(tmp_path: Path):
    f = tmp_path / "saps.txt"
    f.write_text("# nothing\n\n")
    with pytest.raises(EmptyInput):
        read_saps(f)


def test_reverse_and_rotate_keep_support():
    p = parse_sap("RRULLD")
    assert p.reverse().steps == "URRDLL"
    assert p.reverse().support == p.support
    q = p.start_at(2)
    assert q.steps == "ULLDRR"
    assert q.start == Point(2, 0)
    assert q.support == p.support
    assert q.anchored().start == ORIGIN


def test_support_key_is_translation_invariant():
    p = parse_sap("RRULLD")
    assert p.translate(3, -5).support_key() == p.support_key()
    assert p.start_at(3).support_key() == p.support_key()
    assert p.reverse().support_key() == p.support_key()
    assert parse_sap("UURDDL").support_key() != p.support_key()


def test_canonical_key():
    p = parse_sap("RULD")
    assert canonical_key(p) == "0,0:RULD"
    assert canonical_key(p, KeyMode.SHAPE) == "DRUL"
    assert canonical_key(p.start_at(1), "shape") == "DRUL"


def test_anchored_counts():
    assert count_anchored_saps(10) == {2: 4, 4: 8, 6: 24, 8: 112, 10: 560}


def test_anchored_saps_are_valid():
    for p in enumerate_anchored_saps(8):
        assert parse_sap(p.steps) == p
        assert p.start == ORIGIN


@pytest.mark.parametrize(
    ("length", "classes", "supports"),
    [(2, 2, 2), (4, 1, 1), (6, 2, 2), (8, 7, 7), (10, 28, 28), (12, 124, 122)],
)
def test_translation_classes(length: int, classes: int, supports: int):
    # the 3x4 grid of sites carries two 12-cycles, once per orientation of the grid
    polys = list(enumerate_polygons(length))
    assert len(polys) == classes
    assert len({p.support_key() for p in polys}) == supports
    assert sum(anchored_multiplicity(p) for p in polys) == count_anchored_saps(length)[length]


def test_enumerate_polygons_rejects_odd():
    assert list(enumerate_polygons(7)) == []
    assert list(enumerate_polygons(0)) == []


def test_edge_patch():
    patch = build_patch(parse_sap("RL"))
    assert patch.size == 8
    assert patch.support_size == 2
    assert sorted(patch.deg) == [1, 1, 1, 1, 1, 1, 4, 4]
    b = patch.b_matrix
    assert (b == b.T).all()
    assert not np.diag(b).any()
    assert (b.sum(axis=1) == np.array(patch.deg)).all()


def test_square_patch():
    patch = build_patch(parse_sap("RULD"))
    assert patch.size == 12
    assert patch.deg[:4] == (4, 4, 4, 4)
    # 4 polygon edges and 8 edges out of the polygon
    assert sum(patch.deg) == 2 * 12


def test_patch_bounds():
    p = rectangle(3, 2)
    assert p.length == 10
    patch = build_patch(p)
    assert p.length <= patch.size <= 4 * p.length
    # neighbour to neighbour edges are not part of the patch
    corner = patch.index[Point(-1, 0)]
    assert patch.deg[corner] == 1

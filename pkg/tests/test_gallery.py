import math

import pytest

from catk import gallery
from catk.errors import InvalidParams
from catk.measure import curvature_measure
from catk.verify import check_cat

NAMES = sorted(gallery.GENERATORS)


@pytest.mark.parametrize("name", NAMES)
def test_expected_properties_rederived(name):
    c, exp = gallery.generate(name)
    assert c.euler_characteristic() == exp["chi"]
    if exp.get("cat_pass") is not None:
        assert check_cat(c).passed is exp["cat_pass"]
    if exp.get("closed"):
        assert c.is_closed
    for faces in exp.get("domains", {}).values():
        assert faces and all(0 <= f < c.n_faces for f in faces)


@pytest.mark.parametrize("name", NAMES)
def test_generation_is_byte_identical(name, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    gallery.write(name, a)
    gallery.write(name, b)
    assert a.read_bytes() == b.read_bytes()
    assert (tmp_path / "a.json.expected.json").read_bytes() == (tmp_path / "b.json.expected.json").read_bytes()


def test_seeds_change_random_fixtures():
    a, _ = gallery.random_flat(seed=1)
    b, _ = gallery.random_flat(seed=2)
    assert a.to_json() != b.to_json()


def test_invalid_params():
    with pytest.raises(InvalidParams):
        gallery.generate("nope")
    with pytest.raises(InvalidParams):
        gallery.generate("cone", sectors=1)
    with pytest.raises(InvalidParams):
        gallery.generate("cone", colour="red")
    with pytest.raises(InvalidParams):
        gallery.generate("cantor_strip", depth=9)


def test_cone_atoms_listed():
    c, exp = gallery.cone(angle=1.5 * math.pi, sectors=6)
    m = curvature_measure(c)
    for v, a in exp["atoms"].items():
        assert m.atom(int(v)) == pytest.approx(a, abs=1e-12)


def test_triple_disk_expectations():
    c, exp = gallery.triple_disk(n=12)
    assert exp["a_violations"] == 12
    theta = math.pi - 2 * math.pi / 12
    assert exp["a_magnitude"] == pytest.approx(2 * (math.pi - theta))


def test_book_spine_atoms_zero():
    c, exp = gallery.book(pages=3)
    m = curvature_measure(c)
    for v, a in exp["spine_atoms"].items():
        assert m.atom(int(v)) == pytest.approx(a, abs=1e-12)


def test_branch_chain_turns_left():
    c, exp = gallery.branch()
    assert check_cat(c).passed
    assert len(exp["chain"]) >= 3
    assert exp["radii"] == sorted(exp["radii"])

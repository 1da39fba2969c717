import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catk import gallery
from catk.complex import Complex, LinkArc, LinkGraph
from catk.domain import Domain
from catk.errors import InvalidTriangle
from catk.verify import check_admissible, check_cat, check_condition_A, check_condition_B, check_size_bounds, shortest_cycle, systole
from oracles import link_cycle_lengths

PI = math.pi


def doubled_triangle(a=1.0):
    return Complex.from_labeled(0, [((0, 1, 2), (a, a, a)), ((0, 2, 1), (a, a, a))])


def graph(arcs):
    nodes = sorted({a for a, _, _ in arcs} | {b for _, b, _ in arcs})
    return LinkGraph(nodes, [LinkArc(u, v, l, ()) for u, v, l in arcs])


arc_st = st.tuples(st.integers(0, 3), st.integers(0, 3), st.floats(0.1, 3.0))


@settings(max_examples=200, deadline=None)
@given(st.lists(arc_st, min_size=1, max_size=7))
def test_systole_matches_cycle_enumeration(arcs):
    cycles = link_cycle_lengths(arcs)
    expected = min(cycles) if cycles else math.inf
    got, witness = shortest_cycle(graph(arcs))
    assert got == pytest.approx(expected, abs=1e-12)
    if cycles:
        assert math.fsum(arcs[i][2] for i in witness) == pytest.approx(got, abs=1e-12)


def test_theta_graph_systole():
    g = graph([(0, 1, 1.0), (0, 1, 2.0), (0, 1, 4.0)])
    assert systole(g) == pytest.approx(3.0)


def test_book_passes():
    for pages in (2, 3, 4):
        c, exp = gallery.book(pages=pages)
        assert check_cat(c).passed
        assert exp["cat_pass"] is True


def test_triple_disk_fails_A_everywhere():
    n = 24
    c, exp = gallery.triple_disk(n=n)
    v = check_cat(c)
    a = v.of_kind("A")
    theta = PI - 2 * PI / n
    assert len(a) == n and len(v.violations) == n
    for x in a:
        assert x.magnitude == pytest.approx(2 * (PI - theta), abs=1e-10)
        # the witness is a pair of fans
        assert len(x.witness) == 2


def test_cone_fails_B_with_witness():
    c, exp = gallery.cone(angle=1.5 * PI, sectors=6)
    v = check_cat(c)
    (b,) = v.of_kind("B")
    assert b.location == exp["apex"]
    assert 2 * PI - b.magnitude == pytest.approx(1.5 * PI, abs=1e-12)
    corners = [tuple(fj) for arc in b.witness for fj in arc]
    assert math.fsum(float(c.angles[f, j]) for f, j in corners) == pytest.approx(1.5 * PI, abs=1e-12)


def test_doubled_triangle_fails_B_at_three_vertices():
    c = doubled_triangle()
    assert c.is_closed and c.euler_characteristic() == 2
    b = check_condition_B(c).violations
    assert sorted(x.location for x in b) == [0, 1, 2]
    for x in b:
        assert x.magnitude == pytest.approx(2 * PI - 2 * PI / 3, abs=1e-12)


def test_wide_cone_passes():
    c, _ = gallery.cone(angle=2.5 * PI, sectors=10)
    assert check_cat(c).passed


def test_suspension_rim_fails_A():
    c, exp = gallery.suspension(copies=3, n=8)
    a = check_condition_A(c)
    assert not a.passed and exp["cat_pass"] is False


def test_size_bound_on_sphere():
    with pytest.raises(InvalidTriangle):
        Complex.from_labeled(1.0, [((0, 1, 2), (2.2, 2.2, 2.2))])
    c = Complex.from_labeled(1.0, [((0, 1, 2), (1.0, 1.0, 1.0))])
    assert check_size_bounds(c).passed


def test_tolerance_moves_near_flat_to_warnings():
    # a cone of angle 2*pi - 1e-12 is a warning, not a violation
    c, _ = gallery.cone(angle=2 * PI - 1e-12, sectors=6)
    v = check_cat(c)
    assert v.passed and v.warnings


def test_book_admissibility():
    c, exp = gallery.book(pages=3)
    for name, ok in exp["admissible"].items():
        assert bool(check_admissible(c, Domain.of(exp["domains"][name]))) is ok, name


@pytest.mark.parametrize("name", ["cone", "book", "suspension", "triple_disk", "branch", "cantor_strip", "torus"])
def test_expected_cat_flags(name):
    c, exp = gallery.generate(name)
    assert check_cat(c).passed is exp["cat_pass"]

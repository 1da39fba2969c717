import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catk import gallery
from catk.errors import CycleInT, NotSingular, OverlappingRegions, RadiusTooLarge
from catk.measure import curvature_measure
from catk.metric import flat_distances
from catk.surgery import comparison_object, extract_cone, splice, surgery, surgery_schedule
from builders import grid

PI = math.pi


@pytest.fixture(scope="module")
def branch():
    return gallery.branch()


def test_region_is_a_radius_eps_cone(branch):
    c, exp = branch
    r = extract_cone(c, exp["apex"], None, 0.2)
    assert r.radial_ok and r.radial_ratio == pytest.approx(1.0, abs=1e-12)
    d = flat_distances(c, exp["apex"])
    for v in r.tree_vertices:
        assert d[v] == pytest.approx(0.2, abs=1e-12)
    # fences run from the apex to the ends of the tree
    for leaf, chain in r.fences.items():
        assert chain[0] == exp["apex"] and chain[-1] == leaf


def test_comparison_triangles_use_cone_distances(branch):
    c, exp = branch
    r = extract_cone(c, exp["apex"], None, 0.2)
    comp = comparison_object(c, r)
    assert set(comp.apex_angles) == set(r.tree_edges)
    for e, phi in comp.apex_angles.items():
        l = float(c.edge_length[e])
        # isosceles with legs eps: chord = 2 eps sin(phi / 2)
        assert 2 * 0.2 * math.sin(phi / 2) == pytest.approx(l, abs=1e-12)
    assert not comp.needles


def test_splice_preserves_boundary_and_counts(branch):
    c, exp = branch
    r = extract_cone(c, exp["apex"], None, 0.2)
    comp = comparison_object(c, r)
    res = splice(c, [r], [comp])
    assert res.boundary_error == 0.0
    assert res.new_complex.n_faces == c.n_faces - len(r.faces) + len(comp.triangles)
    assert res.verdict_after.passed
    assert res.apex_angle_after == pytest.approx(comp.apex_angle, abs=1e-12)


def test_smallest_radius_is_identity(branch):
    # the innermost ring is already made of comparison triangles
    c, exp = branch
    res = surgery(c, exp["apex"], 0.05, distortion=True)
    assert res.new_complex.n_faces == c.n_faces
    assert res.apex_angle_after == pytest.approx(res.apex_angle_before, abs=1e-12)
    assert res.distortion.max_abs_distortion <= 1e-12


def test_apex_angle_grows_with_radius(branch):
    c, exp = branch
    after = [surgery(c, exp["apex"], e).apex_angle_after for e in (0.05, 0.1, 0.2, 0.4)]
    assert all(a < b for a, b in zip(after, after[1:]))


def test_errors(branch):
    c, exp = branch
    with pytest.raises(RadiusTooLarge):
        extract_cone(c, exp["apex"], None, 5.0)
    with pytest.raises(RadiusTooLarge):
        extract_cone(c, exp["apex"], None, 0.01)
    r = extract_cone(c, exp["apex"], None, 0.1)
    with pytest.raises(OverlappingRegions):
        splice(c, [r, r])
    with pytest.raises(ValueError):
        surgery_schedule(c, [0.1, 0.2], [exp["apex"]], distortion=False)

    cone, cexp = gallery.cone(angle=2.5 * PI, sectors=10)
    with pytest.raises(CycleInT):
        extract_cone(cone, cexp["apex"], None, 1.0)

    g, pos = grid(2, [True] * 4)
    by_pos = {p: v for v, p in pos.items()}
    with pytest.raises(NotSingular):
        extract_cone(g, by_pos[(1, 0)], None, 1.0)


def test_book_spine_surgery_keeps_cat():
    c, exp = gallery.book(pages=3, nx=4, ny=2)
    res = surgery(c, exp["spine"][2], 0.5)
    assert res.verdict_after.passed and res.boundary_error == 0.0


def test_closed_surface_total_measure_is_invariant():
    c, exp = gallery.branch(double=True)
    assert c.is_closed
    before = curvature_measure(c).total()
    assert before == pytest.approx(2 * PI * c.euler_characteristic(), abs=1e-9)
    res = surgery(c, exp["apex"], 0.2, segment=exp["segment"])
    n = res.new_complex
    assert n.is_closed and n.euler_characteristic() == c.euler_characteristic()
    assert curvature_measure(n).total() == pytest.approx(before, abs=1e-9)


def test_schedule_table(branch):
    c, exp = branch
    sch = surgery_schedule(c, [0.2, 0.1], [exp["apex"]], domain=exp["domains"]["tracked"], distortion=False)
    lines = sch.to_csv().strip().splitlines()
    assert lines[0] == "eps,faces,distortion,omega_D,tau_boundary,cat_pass"
    assert len(lines) == 3
    # Gauss-Bonnet ties the two tracked quantities together at every step
    for row in sch.rows:
        assert row["omega_D"] + row["tau_boundary"] == pytest.approx(sch.omega_D + sch.tau_boundary, abs=1e-9)


@settings(max_examples=4, deadline=None)
@given(st.integers(100, 10_000))
def test_random_branch_surgery_keeps_cat(seed):
    c, exp = gallery.random_branch(seed)
    res = surgery(c, exp["apex"], 0.2)
    assert res.verdict_after.passed
    assert res.boundary_error <= 1e-12

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from catk import modelspace as ms
from catk.errors import DegenerateTriangle, SizeBound
from oracles import embedded_triangle, hyperboloid_point, planar_area, sphere_point, spherical_area


def _random_embedded(rng, sign):
    if sign > 0:
        # keep the triangle inside an open hemisphere
        pts = [sphere_point(rng.uniform(0.05, 1.2), rng.uniform(0, 2 * math.pi)) for _ in range(3)]
    elif sign < 0:
        pts = [hyperboloid_point(rng.uniform(0, 2.0), rng.uniform(0, 2 * math.pi)) for _ in range(3)]
    else:
        pts = [rng.uniform(-1, 1, 2) for _ in range(3)]
    return pts


@pytest.mark.parametrize("sign", [-1, 0, 1])
def test_angles_match_embedded_triangles(sign):
    rng = np.random.default_rng(7)
    done = 0
    while done < 300:
        pts = _random_embedded(rng, sign)
        sides, angles = embedded_triangle(sign, pts)
        if min(angles) < 1e-3 or min(sides) < 1e-3:
            continue
        got = ms.triangle_angles(sign, sides)
        assert got == pytest.approx(angles, abs=1e-9)
        done += 1


def test_area_against_solid_angle_and_shoelace():
    rng = np.random.default_rng(3)
    for _ in range(200):
        pts = _random_embedded(rng, 1)
        sides, _ = embedded_triangle(1, pts)
        if min(sides) < 1e-3:
            continue
        assert ms.triangle_area(1, sides) == pytest.approx(spherical_area(pts), abs=1e-9)
    for _ in range(200):
        pts = _random_embedded(rng, 0)
        sides, _ = embedded_triangle(0, pts)
        assert ms.triangle_area(0, sides) == pytest.approx(planar_area(pts), abs=1e-12)


def test_hyperbolic_area_is_angle_defect():
    rng = np.random.default_rng(5)
    for _ in range(100):
        pts = _random_embedded(rng, -1)
        sides, angles = embedded_triangle(-1, pts)
        if min(sides) < 1e-3:
            continue
        assert ms.triangle_area(-1, sides) == pytest.approx(math.pi - sum(angles), abs=1e-9)


def test_curvature_rescaling():
    # kappa = 4 is the unit sphere shrunk by 2
    sides = (0.3, 0.4, 0.5)
    assert ms.triangle_angles(4.0, sides) == pytest.approx(ms.triangle_angles(1.0, tuple(2 * s for s in sides)), abs=1e-12)
    assert ms.triangle_area(4.0, sides) == pytest.approx(ms.triangle_area(1.0, tuple(2 * s for s in sides)) / 4, abs=1e-12)


def test_equilateral_values():
    assert ms.triangle_angles(0, (1, 1, 1)) == pytest.approx((math.pi / 3,) * 3, abs=1e-14)
    # octant of the unit sphere
    assert ms.triangle_angles(1, (math.pi / 2,) * 3) == pytest.approx((math.pi / 2,) * 3, abs=1e-12)
    assert ms.triangle_area(1, (math.pi / 2,) * 3) == pytest.approx(math.pi / 2, abs=1e-12)


def test_rejections():
    with pytest.raises(DegenerateTriangle):
        ms.check_sides(0, 1, 1, 3)
    with pytest.raises(DegenerateTriangle):
        ms.check_sides(0, 0, 1, 1)
    with pytest.raises(SizeBound):
        ms.check_sides(1, 2.2, 2.2, 2.2)
    with pytest.raises(DegenerateTriangle):
        ms.side_from_sas(0, 1, 1, 4.0)


def test_needles():
    assert ms.is_needle(0, (2.0, 1.0, 1.0))
    assert not ms.is_needle(0, (1.0, 1.0, 1.0))
    assert ms.angle_from_sides(0, (2.0, 1.0, 1.0)) == pytest.approx(math.pi, abs=1e-7)
    assert ms.comparison_angle(0, 1.0, 2.0, 1.0) == pytest.approx(0.0, abs=1e-7)


sides_st = st.floats(0.05, 3.0)
angle_st = st.floats(1e-3, math.pi - 1e-3)


@settings(max_examples=300, deadline=None)
@given(sides_st, sides_st, angle_st, st.sampled_from([-1.0, 0.0, 1.0]))
def test_sas_sss_round_trip(b, c, alpha, kappa):
    assume(kappa <= 0 or b + c < 0.9 * math.pi)
    a = ms.side_from_sas(kappa, b, c, alpha)
    assume(a > 1e-6)
    assert ms.angle_from_sides(kappa, (a, b, c), 0) == pytest.approx(alpha, abs=1e-8)


@settings(max_examples=200, deadline=None)
@given(sides_st, sides_st, sides_st)
def test_angle_sum_orders_by_curvature(a, b, c):
    assume(max(a, b, c) < 0.95 * (a + b + c - max(a, b, c)))
    assume(a + b + c < 1.9 * math.pi)
    s_neg = sum(ms.triangle_angles(-1, (a, b, c)))
    s_flat = sum(ms.triangle_angles(0, (a, b, c)))
    s_pos = sum(ms.triangle_angles(1, (a, b, c)))
    assert s_flat == pytest.approx(math.pi, abs=1e-9)
    assert s_neg <= s_flat + 1e-12 <= s_pos + 2e-12


@settings(max_examples=100, deadline=None)
@given(sides_st, sides_st, angle_st)
def test_kappa_continuity(b, c, alpha):
    a0 = ms.side_from_sas(0, b, c, alpha)
    for k in (-1e-8, 1e-8):
        assert ms.side_from_sas(k, b, c, alpha) == pytest.approx(a0, abs=1e-6)
        if a0 > 1e-3:
            assert ms.angle_from_sides(k, (a0, b, c)) == pytest.approx(alpha, abs=1e-6)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catk import gallery
from catk.complex import Complex
from catk.errors import BoundaryMismatch, DisconnectedPoints
from catk.metric import (
    PointRef,
    boundary_distortion,
    comparison_angle_at,
    distance,
    flat_distance,
    flat_distances,
)
from builders import book_point, grid, two_page_book
from oracles import unfolded_book_distance

PI = math.pi


def test_points_in_one_face_are_exact():
    c = Complex.from_labeled(0, [((0, 1, 2), (3.0, 4.0, 5.0))])
    p = PointRef.flat_barycentric(c, 0, [0.2, 0.3, 0.5])
    q = PointRef.flat_barycentric(c, 0, [0.6, 0.1, 0.3])
    # side s joins corners s and s+1: a 3-4-5 right triangle with the right angle at corner 1
    P = np.array([[0, 0], [3, 0], [3, 4]], dtype=float)
    expected = float(np.linalg.norm(np.array([0.2, 0.3, 0.5]) @ P - np.array([0.6, 0.1, 0.3]) @ P))
    for k in (0, 1, 4):
        assert distance(c, p, q, k) == pytest.approx(expected, abs=1e-12)


def test_square_diagonal():
    c, pos = grid(1, [True])
    assert distance(c, 0, 2, 0) == pytest.approx(math.sqrt(2), abs=1e-12)


def test_book_geodesic_converges_to_unfolding():
    c = two_page_book()
    a = 0.3
    p, q = book_point(c, "A", a), book_point(c, "B", a + 1)
    exact = unfolded_book_distance((a, 1.0), (a + 1, 1.0))
    assert exact == pytest.approx(math.sqrt(5))
    vals = [distance(c, p, q, k) for k in (4, 8, 16, 32)]
    assert all(v >= exact - 1e-12 for v in vals)
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    assert abs(vals[-1] - exact) / exact < 5e-3


@settings(max_examples=40, deadline=None)
@given(st.lists(st.booleans(), min_size=9, max_size=9), st.integers(0, 15), st.integers(0, 15))
def test_flat_grid_distances_are_euclidean(flips, i, j):
    c, pos = grid(3, flips)
    got = flat_distance(c, i, j)
    assert got == pytest.approx(math.dist(pos[i], pos[j]), abs=1e-12)


@pytest.mark.parametrize("angle,n", [(3 * PI, 12), (2 * PI, 8), (1.5 * PI, 6)])
def test_cone_distances_bend_at_wide_apex(angle, n):
    c, exp = gallery.cone(angle=angle, sectors=n, radius=1.0)
    apex = exp["apex"]
    rim = [v for v in range(c.n_vertices) if v != apex]
    d0 = flat_distances(c, rim[0])
    step = angle / n
    for v in rim:
        if v == rim[0]:
            continue
        # angular separation along the cone, shorter way round if it closes up
        k = abs(_rim_index(c, apex, rim[0], v))
        phi = min(k * step, angle - k * step)
        expected = 2.0 if phi >= PI else 2 * math.sin(phi / 2)
        assert d0[v] == pytest.approx(expected, abs=1e-12), (v, phi)


def _rim_index(c, apex, a, b):
    # walk the rim through faces at the apex
    order = [a]
    adj = {}
    for f, j in c.vertex_corners[apex]:
        u, w = int(c.vertex_of_corner[f, (j + 1) % 3]), int(c.vertex_of_corner[f, (j + 2) % 3])
        adj.setdefault(u, []).append(w)
        adj.setdefault(w, []).append(u)
    prev = None
    while order[-1] != b:
        nxt = [w for w in adj[order[-1]] if w != prev and w not in order]
        if not nxt:
            # wrap the other way
            return None
        prev = order[-1]
        order.append(nxt[0])
    return len(order) - 1


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_refined_distance_bounds_exact(seed):
    c, _ = gallery.random_flat(seed=seed, points=15, flaps=2)
    rng = np.random.default_rng(seed)
    a, b = (int(x) for x in rng.choice(c.n_vertices, 2, replace=False))
    exact = flat_distances(c, a).get(b)
    if exact is None:
        with pytest.raises(DisconnectedPoints):
            distance(c, a, b, 2)
        return
    prev = math.inf
    for k in (1, 2, 4, 8):
        d = distance(c, a, b, k)
        assert d >= exact - 1e-12
        assert d <= prev + 1e-12
        prev = d


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_distance_is_a_pseudometric(seed):
    c, _ = gallery.book(pages=3, nx=2)
    rng = np.random.default_rng(seed)
    pts = [PointRef.vertex(int(v)) for v in rng.choice(c.n_vertices, 3)]
    d = lambda p, q: distance(c, p, q, 4)
    assert d(pts[0], pts[1]) == d(pts[1], pts[0])
    assert d(pts[0], pts[2]) <= d(pts[0], pts[1]) + d(pts[1], pts[2]) + 1e-12


def test_comparison_angle_of_square_corner():
    c, pos = grid(2, [True] * 4)
    by_pos = {p: v for v, p in pos.items()}
    x, y, z = by_pos[(0, 0)], by_pos[(2, 0)], by_pos[(0, 2)]
    assert comparison_angle_at(c, x, y, z, exact=True) == pytest.approx(PI / 2, abs=1e-12)
    assert comparison_angle_at(c, by_pos[(1, 1)], by_pos[(0, 0)], by_pos[(2, 2)], exact=True) == pytest.approx(PI, abs=1e-6)


def test_boundary_distortion_identity_and_scaling():
    c, exp = gallery.book(pages=3)
    ident = {v: v for v in range(c.n_vertices)}
    assert boundary_distortion(c, c, ident).max_abs_distortion == 0.0
    # spine vertices share no boundary edge, so the doubled copy passes the isometry check
    spine = exp["spine"]
    big = Complex(c.kappa, 2 * c.sides, c.gluings)
    rep = boundary_distortion(c, big, {v: v for v in spine})
    diam = max(flat_distances(c, v)[w] for v in spine for w in spine if w != v)
    assert rep.max_abs_distortion == pytest.approx(diam, abs=1e-12)


def test_boundary_distortion_rejects_non_isometric_boundary():
    c, _ = gallery.cone(angle=1.5 * PI, sectors=6)
    big = Complex(c.kappa, 2 * c.sides, c.gluings)
    with pytest.raises(BoundaryMismatch):
        boundary_distortion(c, big, {1: 1, 2: 2})


def test_exact_distances_need_flat():
    c = Complex.from_labeled(-1.0, [((0, 1, 2), (0.5, 0.5, 0.5))])
    with pytest.raises(ValueError):
        flat_distances(c, 0)

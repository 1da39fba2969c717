"""Small hand-built complexes used across the tests."""

import math

import numpy as np

from catk.complex import Complex


def fan_triangles(kappa, apex, rim, angles, radius=1.0):
    """Isosceles triangles around ``apex`` through the rim labels, one per angle."""
    from catk import modelspace as ms

    out = []
    for (u, w), a in zip(zip(rim[:-1], rim[1:]), angles):
        base = ms.side_from_sas(kappa, radius, radius, a)
        out.append(((apex, u, w), (radius, base, radius)))
    return out


def break_point(fan_angles, kappa=0.0, max_piece=1.2):
    """Pages meeting along a two-edge spine s0 - o - s1; page i turns by fan_angles[i] at o."""
    tris = []
    for p, theta in enumerate(fan_angles):
        k = max(2, math.ceil(theta / max_piece))
        rim = ["s0"] + [("q", p, i) for i in range(1, k)] + ["s1"]
        tris += fan_triangles(kappa, "o", rim, [theta / k] * k)
    c = Complex.from_labeled(kappa, tris)
    return c, int(c.vertex_of_corner[0, 0])


def random_break_point(rng):
    m = int(rng.integers(3, 6))
    return break_point([float(x) for x in rng.uniform(0.3, 2 * math.pi - 0.3, m)])


def polygon_disk(kappa, n, radius=1.0):
    """Regular n-gon fan around a centre, in M^2_kappa."""
    rim = list(range(n)) + [0]
    return Complex.from_labeled(kappa, fan_triangles(kappa, "c", rim, [2 * math.pi / n] * n, radius))


def two_page_book(width=2.0, height=1.0):
    """Two flat rectangles [0, width] x [0, height] hinged on one spine edge y = 0.

    Face 1 is page A's upper triangle (s0, a1, a0), face 3 is page B's.
    """
    d = math.hypot(width, height)
    tris = []
    for p in ("A", "B"):
        tris.append((("s0", "s1", (p, 1)), (width, height, d)))
        tris.append((("s0", (p, 1), (p, 0)), (d, width, height)))
    return Complex.from_labeled(0.0, tris)


def book_point(c, page, x, width=2.0):
    """Point (x, height) on the top edge of a page of :func:`two_page_book`."""
    from catk.metric import PointRef

    f = 1 if page == "A" else 3
    w1 = x / width
    return PointRef.flat_barycentric(c, f, [0.0, w1, 1.0 - w1])


def grid(n, flips, h=1.0):
    """Flat n x n grid of squares of side h, diagonal direction per square from ``flips``."""
    tris = []
    d = h * math.sqrt(2)
    for i in range(n):
        for j in range(n):
            a, b, cc, dd = (i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)
            if flips[i * n + j]:
                tris += [((a, b, cc), (h, h, d)), ((a, cc, dd), (d, h, h))]
            else:
                tris += [((a, b, dd), (h, d, h)), ((b, cc, dd), (h, h, d))]
    c = Complex.from_labeled(0.0, tris)
    pos = {}
    for f, (labels, _) in enumerate(tris):
        for j, lab in enumerate(labels):
            pos[int(c.vertex_of_corner[f, j])] = (lab[0] * h, lab[1] * h)
    return c, pos

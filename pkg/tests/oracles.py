"""Independent reference computations for the tests.

Triangles are realized as actual point triples on the unit sphere, in the
plane, or on the hyperboloid; lengths and angles are read off with vector
algebra and never go through the trigonometric formulas under test.
"""

import math

import numpy as np


def _minkowski(p, q):
    return -p[0] * q[0] + p[1] * q[1] + p[2] * q[2]


def sphere_point(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


def hyperboloid_point(r, t):
    return np.array([math.cosh(r), math.sinh(r) * math.cos(t), math.sinh(r) * math.sin(t)])


def embedded_triangle(sign: int, pts):
    """Sides (a, b, c) opposite vertices (A, B, C) and the angles at A, B, C."""
    A, B, C = (np.asarray(p, dtype=float) for p in pts)
    if sign == 0:
        d = lambda p, q: float(np.linalg.norm(p - q))
        tangent = lambda p, q: q - p
        inner = lambda u, v: float(u @ v)
    elif sign > 0:
        d = lambda p, q: float(np.arctan2(np.linalg.norm(np.cross(p, q)), p @ q))
        tangent = lambda p, q: q - (p @ q) * p
        inner = lambda u, v: float(u @ v)
    else:
        d = lambda p, q: float(np.arccosh(max(-_minkowski(p, q), 1.0)))
        tangent = lambda p, q: q + _minkowski(p, q) * p
        inner = _minkowski

    def angle(p, q, r):
        u, v = tangent(p, q), tangent(p, r)
        cosv = inner(u, v) / math.sqrt(inner(u, u) * inner(v, v))
        return math.acos(min(1.0, max(-1.0, cosv)))

    sides = (d(B, C), d(C, A), d(A, B))
    angles = (angle(A, B, C), angle(B, C, A), angle(C, A, B))
    return sides, angles


def spherical_area(pts):
    """Solid angle of a spherical triangle from its vertex vectors."""
    a, b, c = (np.asarray(p, dtype=float) for p in pts)
    num = abs(float(a @ np.cross(b, c)))
    den = 1.0 + float(a @ b) + float(b @ c) + float(c @ a)
    return 2.0 * math.atan2(num, den)


def planar_area(pts):
    (x0, y0), (x1, y1), (x2, y2) = pts
    return 0.5 * abs((x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0))


def unfolded_book_distance(p, q, spine=0.0):
    """Distance between points on two different half-planes sharing the line y = spine.

    Points are (x, y) with y measured towards their own page.  Unfolding
    flips one page across the spine line.
    """
    (x1, y1), (x2, y2) = p, q
    return math.hypot(x1 - x2, abs(y1 - spine) + abs(y2 - spine))


def link_cycle_lengths(arcs):
    """All simple cycle lengths of a small multigraph given as (u, v, length) arcs."""
    import itertools

    out = []
    n = len(arcs)
    for r in range(1, n + 1):
        for combo in itertools.combinations(range(n), r):
            deg = {}
            for i in combo:
                u, v, _ = arcs[i]
                deg[u] = deg.get(u, 0) + 1
                deg[v] = deg.get(v, 0) + 1
            if any(x != 2 for x in deg.values()):
                continue
            # connected?
            nodes = list(deg)
            seen, stack = {nodes[0]}, [nodes[0]]
            while stack:
                x = stack.pop()
                for i in combo:
                    u, v, _ = arcs[i]
                    for a, b in ((u, v), (v, u)):
                        if a == x and b not in seen:
                            seen.add(b)
                            stack.append(b)
            if len(seen) == len(nodes):
                out.append(sum(arcs[i][2] for i in combo))
    return out

"""Deterministic generators for test complexes.

Every generator returns ``(complex, expected)`` where ``expected`` is a
JSON-ready dict of properties the rest of the pipeline should reproduce
(CAT verdict, Euler characteristic, known atoms, named domains, and for some
fixtures the data needed by surgery or the wing-chain audit).
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

from .complex import Complex
from .errors import InvalidParams

PI = math.pi


class _Sheets:
    """Collects planar triangles with global vertex labels."""

    def __init__(self):
        self.tris: list[tuple[tuple, list[float]]] = []
        self.groups: dict[str, list[int]] = {}
        self.labels: list[tuple] = []

    def add(self, group: str, labels, pts) -> int:
        p = [np.asarray(q, dtype=float) for q in pts]
        sides = [float(np.hypot(*(p[(s + 1) % 3] - p[s]))) for s in range(3)]
        f = len(self.tris)
        self.tris.append((tuple(labels), sides))
        self.groups.setdefault(group, []).append(f)
        self.labels.append(tuple(labels))
        return f

    def build(self, kappa: float = 0.0) -> Complex:
        return Complex.from_labeled(kappa, self.tris)

    def vertex_ids(self, c: Complex) -> dict:
        out = {}
        for f, labels in enumerate(self.labels):
            for j, lab in enumerate(labels):
                out[lab] = int(c.vertex_of_corner[f, j])
        return out


def _need(cond: bool, msg: str):
    if not cond:
        raise InvalidParams(msg)


# --------------------------------------------------------------------------
# cone
# --------------------------------------------------------------------------


def cone(angle: float = 1.5 * PI, sectors: int = 6, radius: float = 1.0):
    """Flat cone: ``sectors`` isosceles triangles around an apex, total angle ``angle``."""
    _need(sectors >= 3, "cone needs at least 3 sectors")
    _need(0 < angle < sectors * PI, "each sector angle must lie in (0, pi)")
    _need(radius > 0, "radius must be positive")
    phi = angle / sectors
    base = 2 * radius * math.sin(phi / 2)
    tris = [(("x", i, (i + 1) % sectors), [radius, base, radius]) for i in range(sectors)]
    c = Complex.from_labeled(0.0, tris)
    apex = int(c.vertex_of_corner[0, 0])
    expected = {
        "cat_pass": angle >= 2 * PI - 1e-9,
        "chi": 1,
        "atoms": {str(apex): 2 * PI - angle},
        "apex": apex,
        "domains": {"apex_disk": list(range(sectors))},
    }
    return c, expected


# --------------------------------------------------------------------------
# book
# --------------------------------------------------------------------------


def book(pages: int = 3, width: float = 2.0, height: float = 1.0, nx: int = 2, ny: int = 1):
    """Flat pages [0, width] x [0, height] glued along the spine y = 0.

    Each page is an nx-by-ny grid of rectangles split along the rising
    diagonal; the spine is subdivided at the grid nodes.
    """
    _need(pages >= 1, "book needs at least one page")
    _need(nx >= 1 and ny >= 1, "grid sizes must be positive")
    _need(width > 0 and height > 0, "page size must be positive")
    sh = _Sheets()
    xs = np.linspace(0, width, nx + 1)
    ys = np.linspace(0, height, ny + 1)

    def lab(p, i, j):
        return ("s", i) if j == 0 else ("p", p, i, j)

    for p in range(pages):
        for i in range(nx):
            for j in range(ny):
                a, b, cc, d = (i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)
                P = lambda ij: (xs[ij[0]], ys[ij[1]])
                sh.add(f"page{p}", [lab(p, *a), lab(p, *b), lab(p, *cc)], [P(a), P(b), P(cc)])
                sh.add(f"page{p}", [lab(p, *a), lab(p, *cc), lab(p, *d)], [P(a), P(cc), P(d)])
    c = sh.build()
    ids = sh.vertex_ids(c)
    domains = {f"page{p}": sh.groups[f"page{p}"] for p in range(pages)}
    # the left halves of all pages: boundary crosses the spine at x = width/2
    half = nx // 2
    if nx % 2 == 0 and pages >= 2:
        window = []
        for p in range(pages):
            for f in sh.groups[f"page{p}"]:
                if max(lb[1] if lb[0] == "s" else lb[2] for lb in sh.labels[f]) <= half:
                    window.append(f)
        domains["window"] = sorted(window)
        # one triangle touching the spine only at its middle node
        touch = [f for f in sh.groups["page0"] if ("s", half) in sh.labels[f] and ("s", half + 1) not in sh.labels[f] and ("s", half - 1) not in sh.labels[f]]
        if touch:
            domains["touch"] = touch[:1]
    expected = {
        "cat_pass": True,
        "chi": c.euler_characteristic(),
        "spine": [ids[("s", i)] for i in range(nx + 1)],
        "domains": domains,
        "admissible": {name: (pages < 3 or not name.startswith("page")) for name in domains},
    }
    if pages >= 3:
        expected["spine_atoms"] = {str(ids[("s", i)]): 0.0 for i in range(1, nx)}
    return c, expected


# --------------------------------------------------------------------------
# suspensions of polygons
# --------------------------------------------------------------------------


def suspension(copies: int = 2, n: int = 8, radius: float = 1.0):
    """``copies`` regular n-gons (centre fans) glued along their common boundary."""
    _need(copies >= 2, "suspension needs at least two copies")
    _need(n >= 3, "polygon needs at least 3 sides")
    sh = _Sheets()
    pts = [(radius * math.cos(2 * PI * i / n), radius * math.sin(2 * PI * i / n)) for i in range(n)]
    for k in range(copies):
        for i in range(n):
            sh.add(f"disk{k}", [("c", k), ("b", i), ("b", (i + 1) % n)], [(0, 0), pts[i], pts[(i + 1) % n]])
    c = sh.build()
    ids = sh.vertex_ids(c)
    theta = PI - 2 * PI / n
    rim = [ids[("b", i)] for i in range(n)]
    rim_atom = PI * (2 - (2 - copies)) - copies * theta
    expected = {
        "cat_pass": False,
        "closed": True,
        "interior_angle": theta,
        "rim": rim,
        "atoms": {str(v): rim_atom for v in rim},
        "domains": {f"disk{k}": sh.groups[f"disk{k}"] for k in range(copies)},
    }
    expected["chi"] = c.euler_characteristic()
    if copies >= 3:
        expected["a_violations"] = n
        expected["a_magnitude"] = 2 * (PI - theta)
    return c, expected


def triple_disk(n: int = 24, radius: float = 1.0):
    """Three regular n-gons glued along their boundaries (fails condition A)."""
    return suspension(3, n, radius)


# --------------------------------------------------------------------------
# flat torus
# --------------------------------------------------------------------------


def torus(n: int = 4, hole: bool = False):
    """Flat square torus from an n x n grid; ``hole`` removes the hexagon around one node."""
    _need(n >= 3, "torus grid needs n >= 3")
    sh = _Sheets()
    for i in range(n):
        for j in range(n):
            a, b, cc, d = (i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)
            L = lambda ij: ("t", ij[0] % n, ij[1] % n)
            if hole and (1, 1) in (a, b, cc, d):
                # the six triangles around node (1, 1) are skipped
                if (1, 1) in (a, cc):
                    continue
                if (1, 1) == b:
                    sh.add("torus", [L(a), L(cc), L(d)], [a, cc, d])
                    continue
                if (1, 1) == d:
                    sh.add("torus", [L(a), L(b), L(cc)], [a, b, cc])
                    continue
            sh.add("torus", [L(a), L(b), L(cc)], [a, b, cc])
            sh.add("torus", [L(a), L(cc), L(d)], [a, cc, d])
    c = sh.build()
    expected = {
        "cat_pass": True,
        "chi": c.euler_characteristic(),
        "closed": not hole,
        "domains": {"all": list(range(c.n_faces))},
    }
    return c, expected


# --------------------------------------------------------------------------
# branch: three or more flat pages along a convex singular chain
# --------------------------------------------------------------------------


def branch(
    wings: int = 3,
    rays: int = 24,
    rings: int = 9,
    r0: float = 0.05,
    ratio: float = math.sqrt(2.0),
    straight_rings: int = 1,
    jitter: float = 0.0,
    seed: int | None = None,
    double: bool = False,
):
    """Flat pages on a polar grid glued along a singular chain starting at the apex x.

    Rings sit at radii ``r0 * ratio**i``; rays cover [-pi/2, pi/2].  The
    chain runs radially along the middle ray up to ring ``straight_rings``
    and then steps one ray per ring (a discrete logarithmic spiral), turning
    left at every ring.  One page lies above the chain and ``wings - 1``
    congruent pages below, so every break point passes condition A.  With
    ``double`` the complex is doubled along its boundary (a closed complex).
    ``jitter`` perturbs interior ray angles (seeded).
    """
    _need(wings >= 3, "branch needs at least three pages")
    _need(rings >= 3 and r0 > 0 and ratio > 1, "bad ring parameters")
    j0 = rays // 2
    _need(0 <= straight_rings < rings, "straight_rings out of range")
    top = j0 + (rings - 1 - straight_rings)
    _need(top < rays, "too few rays for the spiral")
    radii = [r0 * ratio**i for i in range(rings)]
    step = PI / rays
    phis = np.array([-PI / 2 + j * step for j in range(rays + 1)])
    if jitter:
        rng = np.random.default_rng(seed)
        phis[1:-1] += rng.uniform(-jitter, jitter, rays - 1) * step
    jc = [j0 if i <= straight_rings else j0 + (i - straight_rings) for i in range(rings)]

    def pt(i, j):
        return (radii[i] * math.cos(phis[j]), radii[i] * math.sin(phis[j]))

    copies = [0, 1] if double else [0]
    sh = _Sheets()
    for cp in copies:
        pages = [("A", cp)] + [(f"B{k}", cp) for k in range(1, wings)]

        def lab(page, i, j):
            if i < 0:
                return ("x",)
            if j == jc[i]:
                return ("C", i) if double and i == rings - 1 else ("C", cp, i)
            if double and (j in (0, rays) or i == rings - 1):
                return ("bd", page[0], i, j)
            return (page[0], cp, i, j)

        def P(i, j):
            return (0.0, 0.0) if i < 0 else pt(i, j)

        for page in pages:
            above = page[0] == "A"
            grp = f"{page[0]}_{cp}"
            # centre fan
            for j in range(rays):
                if (j >= j0) == above:
                    sh.add(grp, [lab(page, -1, 0), lab(page, 0, j), lab(page, 0, j + 1)], [P(-1, 0), P(0, j), P(0, j + 1)])
            for i in range(rings - 1):
                for j in range(rays):
                    a, b, cc, d = (i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)
                    ta = [a, b, cc]
                    tb = [a, cc, d]
                    if double and i == rings - 2 and j == 0:
                        # both ends of the usual diagonal would be shared by the two copies
                        ta, tb = [a, b, d], [b, cc, d]
                    cut = jc[i + 1] == jc[i] + 1 and j == jc[i]
                    if cut:
                        keep = [tb] if above else [ta]
                    elif (j >= jc[i]) == above:
                        keep = [ta, tb]
                    else:
                        keep = []
                    for t in keep:
                        sh.add(grp, [lab(page, *q) for q in t], [P(*q) for q in t])
    c = sh.build()
    ids = sh.vertex_ids(c)
    apex = ids[("x",)]
    chain = [apex] + [ids[("C", i) if double and i == rings - 1 else ("C", 0, i)] for i in range(rings)]

    # tracked domain: faces within the second-to-last ring, all copy-0 pages
    inner = rings - 2
    copy0 = set()
    for g, fs in sh.groups.items():
        if g.endswith("_0"):
            copy0.update(fs)

    def ring_of(lb):
        if lb == ("x",):
            return -1
        return lb[-2] if lb[0] in ("bd",) or len(lb) == 4 else lb[-1]

    dom = [f for f in sorted(copy0) if max(ring_of(lb) for lb in sh.labels[f]) <= inner]
    expected = {
        "cat_pass": None if double else True,
        "chi": c.euler_characteristic(),
        "closed": double,
        "apex": apex,
        "chain": chain,
        "radii": radii,
        "domains": {"tracked": sorted(dom), "all": list(range(c.n_faces))},
    }
    if double:
        # link segment for surgery: the germs of copy-0 directions at the apex
        seg = set()
        for f in range(c.n_faces):
            if f not in copy0:
                continue
            for j in range(3):
                if c.vertex_of_corner[f, j] == apex:
                    seg.update(c.corner_germs(f, j))
        expected["segment"] = sorted(int(g) for g in seg)
    return c, expected


def random_branch(seed: int = 0, max_tries: int = 200):
    """A seeded CAT-passing branch complex with perturbed rays and page count."""
    from .verify import check_cat

    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        params = dict(
            wings=int(rng.integers(3, 5)),
            rays=int(rng.choice([20, 24, 28])),
            straight_rings=int(rng.integers(1, 3)),
            jitter=float(rng.uniform(0.0, 0.3)),
            seed=int(rng.integers(0, 2**31)),
        )
        c, exp = branch(**params)
        if check_cat(c).passed:
            exp["branch_params"] = params
            return c, exp
    raise InvalidParams(f"no CAT branch complex found for seed {seed}")


# --------------------------------------------------------------------------
# strip with Cantor flaps
# --------------------------------------------------------------------------


def _cantor(depth: int) -> list[tuple[float, float]]:
    iv = [(0.0, 1.0)]
    for _ in range(depth):
        nxt = []
        for a, b in iv:
            t = (b - a) / 3
            nxt += [(a, a + t), (b - t, b)]
        iv = nxt
    return iv


def cantor_strip(depth: int = 3, height: float = 0.5, interior: bool = False):
    """Flat strip [0,1] x [0,height] with square flaps glued along the depth-d Cantor intervals.

    Flaps hang off the bottom edge y = 0, or with ``interior`` off the middle
    line y = height/2, where they create singular edges.
    """
    _need(0 <= depth <= 6, "depth must be in [0, 6]")
    _need(height > 0, "height must be positive")
    iv = _cantor(depth)
    xs = sorted({0.0, 1.0} | {a for a, _ in iv} | {b for _, b in iv})
    ys = [0.0, height / 2, height]
    glue_row = 1 if interior else 0
    sh = _Sheets()

    def S(i, j):
        return ("S", i, j)

    for i in range(len(xs) - 1):
        for j in range(2):
            a, b, cc, d = (i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)
            P = lambda q: (xs[q[0]], ys[q[1]])
            sh.add("strip", [S(*a), S(*b), S(*cc)], [P(a), P(b), P(cc)])
            sh.add("strip", [S(*a), S(*cc), S(*d)], [P(a), P(cc), P(d)])
    ends = []
    for k, (a, b) in enumerate(iv):
        ia, ib = xs.index(a), xs.index(b)
        w = b - a
        A, B = S(ia, glue_row), S(ib, glue_row)
        C, D = ("F", k, 1), ("F", k, 0)
        sh.add(f"flap{k}", [A, B, C], [(0, 0), (w, 0), (w, w)])
        sh.add(f"flap{k}", [A, C, D], [(0, 0), (w, w), (0, w)])
        # ends at the strip corners are ordinary corners, not flap ends
        ends += [q for q, i in ((A, ia), (B, ib)) if 0 < i < len(xs) - 1]
    c = sh.build()
    ids = sh.vertex_ids(c)
    expected = {
        "cat_pass": True,
        "chi": c.euler_characteristic(),
        "flap_ends": sorted(ids[e] for e in ends),
        "flap_end_atom": -PI / 2,
        "domains": {"strip": sh.groups["strip"]},
    }
    return c, expected


# --------------------------------------------------------------------------
# wing chains
# --------------------------------------------------------------------------


def wing_chain(m: int = 4, pockets: int = 1, n: int = 8, width: float = 1.0, pocket_width: float = 0.3, heights=None):
    """Flat wings R_1..R_m glued along a bent chain P_j = (j, h_j).

    Wings 1 and 3 lie above the chain, 2 and 4 below.  A pocket makes wing
    k >= 3 share a band of width ``pocket_width`` next to the chain with an
    earlier wing on the same side, tapering to the chain at both ends.
    """
    _need(2 <= m <= 4, "m must be 2, 3 or 4")
    _need(0 <= pockets <= 2, "pockets must be 0, 1 or 2")
    _need(pockets == 0 or m >= 3, "pockets need m >= 3")
    _need(n >= 6, "chain needs at least 6 segments")
    _need(0 < pocket_width < width, "pocket width must be inside the wing")
    if heights is None:
        heights = [0.25 * math.sin(1.3 * j) + 0.05 * j for j in range(n + 1)]
    _need(len(heights) == n + 1, "need n+1 heights")
    P = [(float(j), float(h)) for j, h in enumerate(heights)]
    side = {1: 1, 2: -1, 3: 1, 4: -1}
    # pocket plan: (wing, partner, a, b)
    plan = []
    if pockets >= 1:
        plan.append((3, 1, 1, n // 2))
    if pockets == 2:
        if m == 4:
            plan.append((4, 2, n // 2 - 1, n - 1))
        else:
            plan = [(3, 1, 1, n // 2 - 1), (3, 1, n // 2 + 1, n - 1)]
    for k, _, a, b in plan:
        _need(b - a >= 2, "pocket needs at least two chain segments")
    sh = _Sheets()
    Cl = lambda j: ("C", j)

    def off(j, s, t):
        return (P[j][0], P[j][1] + s * t)

    faces_of = {k: [] for k in range(1, m + 1)}
    for k in range(1, m + 1):
        s = side[k]
        my = [p for p in plan if p[0] == k]
        covered = set()
        for _, partner, a, b in my:
            covered |= set(range(a, b))
            band = lambda j: Cl(j) if j in (a, b) else ("band", k, a, j)
            outer = lambda j: ("W", partner, j)  # partner's outer edge labels
            mine = lambda j: ("W", k, j)
            # band faces, shared by k and partner
            for j in range(a, b):
                if j == a:
                    f = sh.add(f"band{k}_{a}", [Cl(j), Cl(j + 1), band(j + 1)], [P[j], P[j + 1], off(j + 1, s, pocket_width)])
                    bf = [f]
                elif j == b - 1:
                    f = sh.add(f"band{k}_{a}", [Cl(j), Cl(j + 1), band(j)], [P[j], P[j + 1], off(j, s, pocket_width)])
                    bf = [f]
                else:
                    f1 = sh.add(f"band{k}_{a}", [Cl(j), Cl(j + 1), band(j + 1)], [P[j], P[j + 1], off(j + 1, s, pocket_width)])
                    f2 = sh.add(f"band{k}_{a}", [Cl(j), band(j + 1), band(j)], [P[j], off(j + 1, s, pocket_width), off(j, s, pocket_width)])
                    bf = [f1, f2]
                faces_of[k] += bf
                faces_of[partner] += bf
            # upper parts of both wings above the band boundary
            for who, lab in ((partner, outer), (k, mine)):
                for j in range(a, b):
                    q0 = band(j)
                    q1 = band(j + 1)
                    p0 = off(j, s, 0 if j == a else pocket_width)
                    p1 = off(j + 1, s, 0 if j + 1 == b else pocket_width)
                    u0, u1 = off(j, s, width), off(j + 1, s, width)
                    faces_of[who].append(sh.add(f"wing{who}", [q0, q1, lab(j + 1)], [p0, p1, u1]))
                    faces_of[who].append(sh.add(f"wing{who}", [q0, lab(j + 1), lab(j)], [p0, u1, u0]))
        # plain strip along the uncovered chain segments
        if k in {p[1] for p in plan}:
            covered_partner = set()
            for kk, partner, a, b in plan:
                if partner == k:
                    covered_partner |= set(range(a, b))
        else:
            covered_partner = set()
        for j in range(n):
            if j in covered or j in covered_partner:
                continue
            u0, u1 = off(j, s, width), off(j + 1, s, width)
            W = lambda jj: ("W", k, jj)
            faces_of[k].append(sh.add(f"wing{k}", [Cl(j), Cl(j + 1), W(j + 1)], [P[j], P[j + 1], u1]))
            faces_of[k].append(sh.add(f"wing{k}", [Cl(j), W(j + 1), W(j)], [P[j], u1, u0]))
    c = sh.build()
    ids = sh.vertex_ids(c)
    expected = {
        "chain": [ids[Cl(j)] for j in range(n + 1)],
        "wings": [sorted(faces_of[k]) for k in range(1, m + 1)],
        "pockets": [list(p) for p in plan],
        "residual": 0.0,
        "chi": c.euler_characteristic(),
    }
    return c, expected


# --------------------------------------------------------------------------
# random flat complexes
# --------------------------------------------------------------------------


def random_flat(seed: int = 0, points: int = 40, flaps: int = 8, max_faces: int = 200):
    """Delaunay triangulation of random points in the unit square plus random flap triangles."""
    _need(points >= 4, "need at least 4 points")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        pts = np.vstack([[[0, 0], [1, 0], [1, 1], [0, 1]], rng.uniform(0.05, 0.95, (points - 4, 2))])
        tri = Delaunay(pts)
        simp = []
        for t in tri.simplices:
            p = pts[t]
            area = 0.5 * abs((p[1, 0] - p[0, 0]) * (p[2, 1] - p[0, 1]) - (p[2, 0] - p[0, 0]) * (p[1, 1] - p[0, 1]))
            if area > 1e-4:
                simp.append(t)
        if len(simp) + flaps <= max_faces:
            break
        points = max(4, points - 5)
    sh = _Sheets()
    edges = set()
    for t in simp:
        sh.add("base", [("v", int(i)) for i in t], pts[t])
        for s in range(3):
            edges.add(tuple(sorted((int(t[s]), int(t[(s + 1) % 3])))))
    edges = sorted(edges)
    used = set()
    for k in range(flaps):
        i = int(rng.integers(len(edges)))
        if i in used:
            continue
        used.add(i)
        u, v = edges[i]
        a, b = pts[u], pts[v]
        L = float(np.hypot(*(b - a)))
        t = rng.uniform(0.2, 0.8)
        h = rng.uniform(0.2, 1.0) * L
        sh.add("flaps", [("v", u), ("v", v), ("flap", k)], [(0, 0), (L, 0), (t * L, h)])
    c = sh.build()
    return c, {"chi": c.euler_characteristic(), "cat_pass": None, "domains": {"all": list(range(c.n_faces))}}


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------

GENERATORS = {
    "cone": cone,
    "book": book,
    "suspension": suspension,
    "triple_disk": triple_disk,
    "branch": branch,
    "random_branch": random_branch,
    "cantor_strip": cantor_strip,
    "wing_chain": wing_chain,
    "random_flat": random_flat,
    "torus": torus,
}


def generate(name: str, **params):
    if name not in GENERATORS:
        raise InvalidParams(f"unknown gallery item {name!r}; choose from {sorted(GENERATORS)}")
    try:
        c, expected = GENERATORS[name](**params)
    except TypeError as exc:
        raise InvalidParams(str(exc)) from exc
    expected = dict(expected)
    expected["name"] = name
    expected["params"] = {k: v for k, v in params.items()}
    return c, expected


def write(name: str, out, **params):
    """Write the complex to ``out`` and the expected properties to ``<out>.expected.json``."""
    c, expected = generate(name, **params)
    out = Path(out)
    c.to_json(out)
    Path(str(out) + ".expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return c, expected

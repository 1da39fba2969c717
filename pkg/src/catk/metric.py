"""Intrinsic distances on triangle complexes.

Two engines:

* :class:`RefinedGraph` places ``k - 1`` Steiner points on every edge and
  joins all boundary nodes of each face by in-face chords (exact, via SAS in
  the model plane).  Shortest paths give upper bounds that converge as ``k``
  doubles; node sets are nested under doubling.
* :func:`flat_distances` is exact on flat complexes: straight segments are
  unfolded face by face from a source vertex (continuing through every face
  of a branching edge), and a Dijkstra over vertices chains them.  Geodesics
  of flat polyhedral complexes only bend at vertices, so this is exact.
"""

from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from . import modelspace as ms
from .complex import Complex
from .errors import BoundaryMismatch, DisconnectedPoints, GeometryError
from .modelspace import EPS_GEOM

# --------------------------------------------------------------------------
# points
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PointRef:
    """A point of a complex.

    ``kind`` is ``"vertex"`` (``index`` = vertex class), ``"edge"`` (``a`` =
    offset from the first corner of the edge's first slot) or ``"face"``
    (``a``, ``b`` = distances to corners 0 and 1 of the face).
    """

    kind: str
    index: int
    a: float = 0.0
    b: float = 0.0

    @classmethod
    def vertex(cls, v: int) -> "PointRef":
        return cls("vertex", int(v))

    @classmethod
    def on_edge(cls, e: int, offset: float) -> "PointRef":
        return cls("edge", int(e), float(offset))

    @classmethod
    def in_face(cls, f: int, d0: float, d1: float) -> "PointRef":
        return cls("face", int(f), float(d0), float(d1))

    @classmethod
    def flat_barycentric(cls, c: Complex, f: int, w) -> "PointRef":
        """Face point from barycentric weights (flat complexes only)."""
        if c.kappa.value != 0:
            raise ValueError("barycentric points need a flat complex")
        p = _flat_layout(c, f)
        w = np.asarray(w, dtype=float)
        w = w / w.sum()
        q = w @ p
        return cls.in_face(f, float(np.hypot(*(q - p[0]))), float(np.hypot(*(q - p[1]))))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "index": self.index, "a": self.a, "b": self.b}

    @classmethod
    def from_dict(cls, d: dict) -> "PointRef":
        return cls(d["kind"], int(d["index"]), float(d.get("a", 0.0)), float(d.get("b", 0.0)))


def _flat_layout(c: Complex, f: int) -> np.ndarray:
    """Planar coordinates of the corners of face f: corner 0 at the origin, corner 1 on +x."""
    L = c.sides[f]
    a0 = float(c.angles[f, 0])
    return np.array([[0.0, 0.0], [L[0], 0.0], [L[2] * math.cos(a0), L[2] * math.sin(a0)]])


# --------------------------------------------------------------------------
# polar coordinates inside a face
# --------------------------------------------------------------------------


def _sas_vec(kappa, b, c, alpha):
    """Vectorized third side from two sides and the included angle."""
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    s2 = np.sin(np.asarray(alpha, dtype=float) / 2) ** 2
    k = kappa.sign
    if k == 0:
        return np.sqrt((b - c) ** 2 + 4.0 * b * c * s2)
    sc = kappa.scale
    bs, cs = b * sc, c * sc
    if k > 0:
        h = np.sin((bs - cs) / 2) ** 2 + np.sin(bs) * np.sin(cs) * s2
        return 2.0 * np.arcsin(np.sqrt(np.clip(h, 0.0, 1.0))) / sc
    h = np.sinh((bs - cs) / 2) ** 2 + np.sinh(bs) * np.sinh(cs) * s2
    return 2.0 * np.arcsinh(np.sqrt(np.maximum(h, 0.0))) / sc


def _angle_or_zero(kappa, opp, b, c):
    if opp <= 0 or b <= 0 or c <= 0:
        return 0.0
    hi, lo = b + c, abs(b - c)
    return ms.angle_from_sides(kappa, (min(max(opp, lo), hi), b, c), 0, tol=1e-6)


def _polar_on_side(c: Complex, f: int, s: int, t: float) -> tuple[float, float]:
    """Polar coordinates (r, alpha) about corner 0 of the point at distance t from corner s on side s."""
    L = c.sides[f]
    A = c.angles[f]
    if s == 0:
        return float(t), 0.0
    if s == 2:
        return float(L[2] - t), float(A[0])
    if t <= 0:
        return float(L[0]), 0.0
    if t >= L[1]:
        return float(L[2]), float(A[0])
    r = float(_sas_vec(c.kappa, L[0], t, A[1]))
    alpha = _angle_or_zero(c.kappa, t, L[0], r)
    return r, min(alpha, float(A[0]))


def _polar_of_face_point(c: Complex, p: PointRef) -> tuple[float, float]:
    f = p.index
    L0 = float(c.sides[f, 0])
    if p.a < 0 or p.b < 0:
        raise ValueError(f"negative corner distances in {p}")
    if p.a == 0:
        return 0.0, 0.0
    alpha = _angle_or_zero(c.kappa, p.b, p.a, L0)
    beta = _angle_or_zero(c.kappa, p.a, p.b, L0)
    slack = 1e-9
    if alpha > c.angles[f, 0] + slack or beta > c.angles[f, 1] + slack:
        raise ValueError(f"point {p} lies outside face {f}")
    return float(p.a), alpha


def _slot_offset(c: Complex, e: int, f: int, s: int, t: float) -> float:
    """Distance from corner s along slot (f, s) of the point at edge offset t."""
    f0, s0 = c.edge_slots[e][0]
    same = c.germ_of_end[f, s, 0] == c.germ_of_end[f0, s0, 0]
    return t if same else float(c.sides[f, s]) - t


# --------------------------------------------------------------------------
# refined graph
# --------------------------------------------------------------------------


class RefinedGraph:
    """Steiner-point graph at refinement ``k`` (``k - 1`` points per edge at i/k)."""

    def __init__(self, c: Complex, k: int = 1):
        if k < 1:
            k = 1
        self.c = c
        self.k = int(k)
        nv, ne = c.n_vertices, c.n_edges
        self.n_nodes = nv + ne * (self.k - 1)
        # per face: node ids and polar coordinates of every boundary node
        self.face_nodes: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        rows, cols, wts = [], [], []
        for f in range(c.n_faces):
            ids, rs, als = [], [], []
            for j in range(3):
                ids.append(int(c.vertex_of_corner[f, j]))
                r, a = _polar_on_side(c, f, j, 0.0)
                rs.append(r)
                als.append(a)
            for s in range(3):
                e = int(c.edge_of_slot[f, s])
                length = float(c.edge_length[e])
                for i in range(1, self.k):
                    t = _slot_offset(c, e, f, s, length * i / self.k)
                    ids.append(self.steiner(e, i))
                    r, a = _polar_on_side(c, f, s, t)
                    rs.append(r)
                    als.append(a)
            ids_a = np.array(ids)
            rs_a = np.array(rs)
            als_a = np.array(als)
            self.face_nodes.append((ids_a, rs_a, als_a))
            iu, ju = np.triu_indices(len(ids_a), 1)
            w = _sas_vec(c.kappa, rs_a[iu], rs_a[ju], np.abs(als_a[iu] - als_a[ju]))
            rows.append(ids_a[iu])
            cols.append(ids_a[ju])
            wts.append(w)
        r = np.concatenate(rows)
        q = np.concatenate(cols)
        w = np.concatenate(wts)
        lo, hi = np.minimum(r, q), np.maximum(r, q)
        keep = lo != hi
        lo, hi, w = lo[keep], hi[keep], w[keep]
        key = lo.astype(np.int64) * self.n_nodes + hi
        order = np.lexsort((w, key))
        key, lo, hi, w = key[order], lo[order], hi[order], w[order]
        first = np.ones(len(key), dtype=bool)
        first[1:] = key[1:] != key[:-1]
        # zero weights would vanish from the sparse matrix; coincident nodes
        # cannot occur for valid triangles, so a floor at tiny is harmless
        w = np.maximum(w[first], 1e-300)
        self.graph = coo_matrix((w, (lo[first], hi[first])), shape=(self.n_nodes, self.n_nodes)).tocsr()
        self._rows: dict[int, np.ndarray] = {}

    def steiner(self, e: int, i: int) -> int:
        return self.c.n_vertices + e * (self.k - 1) + (i - 1)

    def rows(self, nodes) -> np.ndarray:
        nodes = [int(n) for n in nodes]
        missing = [n for n in nodes if n not in self._rows]
        if missing:
            d = dijkstra(self.graph, directed=False, indices=missing)
            for n, row in zip(missing, np.atleast_2d(d)):
                self._rows[n] = row
        return np.array([self._rows[n] for n in nodes])

    def attachments(self, p: PointRef) -> tuple[list[tuple[int, float]], dict[int, tuple[float, float]]]:
        """Graph nodes reachable from ``p`` inside its faces, and p's polar coordinates per face."""
        c = self.c
        if p.kind == "vertex":
            if not 0 <= p.index < c.n_vertices:
                raise IndexError(f"no vertex {p.index}")
            polar = {}
            for f, j in c.vertex_corners[p.index]:
                polar[f] = _polar_on_side(c, f, j, 0.0)
            return [(p.index, 0.0)], polar
        if p.kind == "edge":
            e = p.index
            length = float(c.edge_length[e])
            if not 0 <= p.a <= length:
                raise ValueError(f"edge offset {p.a} outside [0, {length}]")
            polar = {f: _polar_on_side(c, f, s, _slot_offset(c, e, f, s, p.a)) for f, s in c.edge_slots[e]}
        elif p.kind == "face":
            polar = {p.index: _polar_of_face_point(c, p)}
        else:
            raise ValueError(f"unknown point kind {p.kind!r}")
        out = []
        for f, (r, a) in polar.items():
            ids, rs, als = self.face_nodes[f]
            w = _sas_vec(c.kappa, np.full(len(rs), r), rs, np.abs(als - a))
            out.extend(zip(ids.tolist(), w.tolist()))
        return out, polar

    def distance(self, a: PointRef, b: PointRef) -> float:
        att_a, pol_a = self.attachments(a)
        att_b, pol_b = self.attachments(b)
        best = math.inf
        for f in set(pol_a) & set(pol_b):
            (r1, a1), (r2, a2) = pol_a[f], pol_b[f]
            best = min(best, float(_sas_vec(self.c.kappa, r1, r2, abs(a1 - a2))))
        na = sorted({n for n, _ in att_a})
        wa = defaultdict(lambda: math.inf)
        for n, w in att_a:
            wa[n] = min(wa[n], w)
        wb = defaultdict(lambda: math.inf)
        for n, w in att_b:
            wb[n] = min(wb[n], w)
        nb = sorted(wb)
        D = self.rows(na)[:, nb]
        total = D + np.array([wa[n] for n in na])[:, None] + np.array([wb[n] for n in nb])[None, :]
        best = min(best, float(total.min()))
        if not math.isfinite(best):
            raise DisconnectedPoints(f"{a} and {b} lie in different components")
        return best


def refined_graph(c: Complex, k: int) -> RefinedGraph:
    cache = c.__dict__.setdefault("_refined_cache", {})
    if k not in cache:
        cache[k] = RefinedGraph(c, k)
    return cache[k]


def _as_point(p) -> PointRef:
    if isinstance(p, PointRef):
        return p
    if isinstance(p, (int, np.integer)):
        return PointRef.vertex(int(p))
    if isinstance(p, dict):
        return PointRef.from_dict(p)
    raise TypeError(f"cannot interpret {p!r} as a point")


def distance(c: Complex, a, b, k: int = 8) -> float:
    """Shortest-path length between two points in the refined graph (an upper bound)."""
    return refined_graph(c, k).distance(_as_point(a), _as_point(b))


def comparison_angle_at(c: Complex, x, y, z, k: int = 8, exact: bool = False) -> float:
    """Model-space comparison angle at x of the triple (x, y, z)."""
    if exact:
        dxy, dxz, dyz = flat_distance(c, x, y), flat_distance(c, x, z), flat_distance(c, y, z)
    else:
        dxy, dxz, dyz = distance(c, x, y, k), distance(c, x, z, k), distance(c, y, z, k)
    if dxy <= 0 or dxz <= 0:
        raise GeometryError("comparison angle at a coincident point")
    dyz = min(max(dyz, abs(dxy - dxz)), dxy + dxz)
    return ms.comparison_angle(c.kappa, dxy, dxz, dyz, tol=1e-6)


# --------------------------------------------------------------------------
# exact distances on flat complexes
# --------------------------------------------------------------------------


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


def _seg_dist_origin(px, py, qx, qy) -> float:
    dx, dy = qx - px, qy - py
    dd = dx * dx + dy * dy
    t = 0.0 if dd == 0 else min(1.0, max(0.0, -(px * dx + py * dy) / dd))
    return math.hypot(px + t * dx, py + t * dy)


def _visible(c: Complex, s: int, bound: float) -> dict[int, float]:
    """Straight-segment distances from vertex s to every vertex it sees within ``bound``.

    Windows are unfolded across edges; a window crossing an edge of
    multiplicity m continues into all m - 1 other faces.  Points are plain
    (x, y) float pairs in the unfolding plane with s at the origin.
    """
    out: dict[int, float] = {}
    eps = 1e-12
    sides, angles = c.sides.tolist(), c.angles.tolist()
    voc, eos, goe, slots = c.vertex_of_corner, c.edge_of_slot, c.germ_of_end, c.edge_slots

    def see(v, dist):
        if dist <= bound and dist < out.get(v, math.inf):
            out[v] = dist

    stack = []
    for f, j in c.vertex_corners[s]:
        L = sides[f]
        A = angles[f][j]
        l2 = L[(j + 2) % 3]
        p1 = (L[j], 0.0)
        p2 = (l2 * math.cos(A), l2 * math.sin(A))
        see(int(voc[f, (j + 1) % 3]), L[j])
        see(int(voc[f, (j + 2) % 3]), l2)
        # window through slot (f, j+1), corner j+1 (p1) to corner j+2 (p2)
        stack.append((f, (j + 1) % 3, p1, p2, p1, p2))
    while stack:
        f, sl, pa, pb, lo, hi = stack.pop()
        # pa is corner sl of f, pb is corner sl+1
        if _seg_dist_origin(*pa, *pb) > bound:
            continue
        e = int(eos[f, sl])
        ga = goe[f, sl, 0]
        for g, t in slots[e]:
            if g == f and t == sl:
                continue
            q0, q1 = (pa, pb) if goe[g, t, 0] == ga else (pb, pa)
            L = sides[g]
            At = angles[g][t]
            ux, uy = (q1[0] - q0[0]) / L[t], (q1[1] - q0[1]) / L[t]
            # the far corner lies on the side of the edge away from the source
            side = -1.0 if _cross(q1[0] - q0[0], q1[1] - q0[1], -q0[0], -q0[1]) > 0 else 1.0
            ca, sa = math.cos(At), side * math.sin(At)
            l2 = L[(t + 2) % 3]
            q2 = (q0[0] + l2 * (ca * ux - sa * uy), q0[1] + l2 * (sa * ux + ca * uy))
            r2 = math.hypot(*q2)
            rlo, rhi = math.hypot(*lo), math.hypot(*hi)
            if _cross(*lo, *q2) >= -eps * r2 * rlo and _cross(*q2, *hi) >= -eps * r2 * rhi:
                see(int(voc[g, (t + 2) % 3]), r2)
            # slot (g, t+2) runs corner t+2 -> t, slot (g, t+1) runs t+1 -> t+2
            for slot, a_pt, b_pt in (((t + 2) % 3, q2, q0), ((t + 1) % 3, q1, q2)):
                if _cross(*a_pt, *b_pt) >= 0:
                    first, second = a_pt, b_pt
                else:
                    first, second = b_pt, a_pt
                nlo = first if _cross(*lo, *first) > 0 else lo
                nhi = second if _cross(*second, *hi) > 0 else hi
                if _cross(*nlo, *nhi) <= eps * math.hypot(*nlo) * math.hypot(*nhi):
                    continue
                stack.append((g, slot, a_pt, b_pt, nlo, nhi))
    out.pop(s, None)
    return out


def _relay_vertices(c: Complex) -> frozenset:
    """Vertices a geodesic can bend at: all but interior cone points of angle at most 2 pi."""
    cached = c.__dict__.get("_relay_cache")
    if cached is None:
        out = set()
        for v in range(c.n_vertices):
            lk = c.vertex_link(v)
            circle = all(d == 2 for d in lk.valence().values()) and len(lk.components()) == 1
            if not circle or lk.total_length > 2 * math.pi + 1e-9:
                out.add(v)
        cached = c.__dict__["_relay_cache"] = frozenset(out)
    return cached


def _visible_cached(c: Complex, s: int, bound: float) -> dict[int, float]:
    cache = c.__dict__.setdefault("_visible_cache", {})
    hit = cache.get(s)
    if hit is None or hit[0] < bound:
        hit = cache[s] = (bound, _visible(c, s, bound))
    if hit[0] == bound:
        return hit[1]
    return {v: d for v, d in hit[1].items() if d <= bound}


def flat_distances(c: Complex, source: int, bound: float = math.inf, targets=None) -> dict[int, float]:
    """Exact geodesic distances from vertex ``source`` to vertices within ``bound`` (flat complexes)."""
    if c.kappa.value != 0:
        raise ValueError("exact distances are implemented for flat complexes only")
    targets = None if targets is None else set(targets)
    relay = _relay_vertices(c)
    dist = {source: 0.0}
    done = set()
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if targets is not None and targets <= done:
            break
        if u != source and u not in relay:
            continue
        for w, l in _visible_cached(c, u, bound).items():
            if d + l > bound:
                continue
            nd = d + l
            if nd < dist.get(w, math.inf):
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def flat_distance(c: Complex, a, b, bound: float = math.inf) -> float:
    """Exact distance between two vertices of a flat complex."""
    a, b = _as_point(a), _as_point(b)
    if a.kind != "vertex" or b.kind != "vertex":
        raise ValueError("exact distances are between vertices")
    d = flat_distances(c, a.index, bound, targets=[b.index])
    if b.index not in d:
        raise DisconnectedPoints(f"vertex {b.index} not reachable from {a.index}")
    return d[b.index]


# --------------------------------------------------------------------------
# boundary distortion
# --------------------------------------------------------------------------


@dataclass
class DistortionReport:
    max_abs_distortion: float
    argmax: tuple[int, int] | None
    normalized: float
    n_pairs: int

    def to_dict(self) -> dict:
        return {
            "max_abs_distortion": self.max_abs_distortion,
            "argmax": list(self.argmax) if self.argmax else None,
            "normalized": self.normalized,
            "n_pairs": self.n_pairs,
        }


def _validate_vertex_map(c1: Complex, c2: Complex, vmap: dict[int, int], tol: float):
    inv = {}
    for u, v in vmap.items():
        if not (0 <= u < c1.n_vertices and 0 <= v < c2.n_vertices):
            raise BoundaryMismatch(f"vertex pair {(u, v)} out of range")
        if v in inv:
            raise BoundaryMismatch(f"boundary map is not injective at {v}")
        inv[v] = u
    e2 = {}
    for e in range(c2.n_edges):
        a, b = c2.edge_vertices(e)
        e2.setdefault(frozenset((a, b)), []).append(float(c2.edge_length[e]))
    for e in range(c1.n_edges):
        a, b = c1.edge_vertices(e)
        if a in vmap and b in vmap and c1.multiplicity[e] == 1:
            lens = e2.get(frozenset((vmap[a], vmap[b])), [])
            if not any(abs(x - c1.edge_length[e]) <= tol for x in lens):
                raise BoundaryMismatch(f"boundary edge {e} has no isometric partner")


def boundary_distortion(
    c1: Complex,
    c2: Complex,
    boundary_map,
    samples: int = 200,
    k: int = 8,
    exact: bool | None = None,
    seed: int = 0,
    tol: float = EPS_GEOM,
    bound: float = math.inf,
) -> DistortionReport:
    """Largest |d1(p, q) - d2(phi p, phi q)| over sampled pairs of mapped vertices.

    ``boundary_map`` maps vertex ids of ``c1`` to vertex ids of ``c2``.
    Distances are exact on flat complexes (default) and refined-graph upper
    bounds otherwise.  ``bound`` caps the exact search radius; pairs further
    apart than it are reported at infinite distance.
    """
    vmap = {int(u): int(v) for u, v in dict(boundary_map).items()}
    _validate_vertex_map(c1, c2, vmap, tol)
    keys = sorted(vmap)
    pairs = [(p, q) for i, p in enumerate(keys) for q in keys[i + 1 :]]
    if len(pairs) > samples:
        rng = np.random.default_rng(seed)
        idx = rng.choice(len(pairs), size=samples, replace=False)
        pairs = [pairs[i] for i in sorted(idx)]
    if exact is None:
        exact = c1.kappa.value == 0 and c2.kappa.value == 0
    if exact:
        src = sorted({p for p, _ in pairs})
        d1 = {p: flat_distances(c1, p, bound, targets=[q for pp, q in pairs if pp == p]) for p in src}
        d2 = {p: flat_distances(c2, vmap[p], bound, targets=[vmap[q] for pp, q in pairs if pp == p]) for p in src}
        get1 = lambda p, q: d1[p].get(q, math.inf)
        get2 = lambda p, q: d2[p].get(vmap[q], math.inf)
    else:
        get1 = lambda p, q: distance(c1, p, q, k)
        get2 = lambda p, q: distance(c2, vmap[p], vmap[q], k)
    worst, arg, norm = 0.0, None, 0.0
    diam = 0.0
    vals = []
    for p, q in pairs:
        a, b = get1(p, q), get2(p, q)
        diam = max(diam, a)
        vals.append((abs(a - b), a, (p, q)))
    for dv, a, pq in vals:
        if dv > worst or arg is None:
            worst, arg = dv, pq
        norm = max(norm, dv / max(a, diam * 1e-6, 1e-300))
    return DistortionReport(worst, arg, norm, len(pairs))

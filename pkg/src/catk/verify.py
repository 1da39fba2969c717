"""Local CAT(kappa) verification of glued triangle complexes.

A glued complex is locally CAT(kappa) exactly when (A) any two face fans
meeting along a singular chain turn by a non-positive total at every break
point, and (B) every vertex link is a CAT(1) metric graph, i.e. has no
embedded cycle shorter than 2*pi.  Edges are geodesic segments, so (A) only
has atoms at break points, where it is the same systole test as (B) run on
the reduced two-node link.
"""

from __future__ import annotations

import heapq
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

from .complex import Complex, LinkGraph
from .domain import Domain, structure
from .modelspace import EPS_GEOM

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Violation:
    kind: str  # "A", "B" or "SizeBound"
    location: int
    witness: tuple
    magnitude: float

    def to_dict(self) -> dict:
        return {"kind": self.kind, "location": self.location, "witness": list(self.witness), "magnitude": self.magnitude}


@dataclass
class Verdict:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def merged(self, other: "Verdict") -> "Verdict":
        key = lambda v: (v.location, v.kind)
        return Verdict(
            sorted(self.violations + other.violations, key=key),
            sorted(self.warnings + other.warnings, key=key),
        )

    def of_kind(self, kind: str) -> list[Violation]:
        return [v for v in self.violations if v.kind == kind]

    def to_dict(self) -> dict:
        return {
            "pass": self.passed,
            "violations": [v.to_dict() for v in self.violations],
            "warnings": [v.to_dict() for v in self.warnings],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# --------------------------------------------------------------------------
# systole of a metric graph
# --------------------------------------------------------------------------


def _shortest_path(adj, src, dst, banned):
    dist = {src: 0.0}
    prev = {}
    heap = [(0.0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if u == dst:
            break
        if d > dist.get(u, math.inf):
            continue
        for w, length, idx in adj[u]:
            if idx == banned:
                continue
            nd = d + length
            if nd < dist.get(w, math.inf):
                dist[w] = nd
                prev[w] = (u, idx)
                heapq.heappush(heap, (nd, w))
    if dst not in dist:
        return math.inf, []
    path, x = [], dst
    while x != src:
        x, idx = prev[x]
        path.append(idx)
    return dist[dst], path[::-1]


def shortest_cycle(g: LinkGraph) -> tuple[float, list[int]]:
    """Length of the shortest cycle of ``g`` and the arc indices along it.

    For each arc, the shortest path between its ends avoiding that arc
    closes a cycle; the minimum over arcs is the systole.  Forests give
    ``(inf, [])``.
    """
    adj = defaultdict(list)
    for i, a in enumerate(g.arcs):
        adj[a.u].append((a.v, a.length, i))
        if a.v != a.u:
            adj[a.v].append((a.u, a.length, i))
    best, witness = math.inf, []
    for i, a in enumerate(g.arcs):
        if a.length >= best:
            continue
        if a.u == a.v:
            best, witness = a.length, [i]
            continue
        d, path = _shortest_path(adj, a.u, a.v, i)
        if d + a.length < best:
            best, witness = d + a.length, [i] + path
    return best, witness


def systole(g: LinkGraph) -> float:
    return shortest_cycle(g)[0]


# --------------------------------------------------------------------------
# conditions
# --------------------------------------------------------------------------


def _witness(g: LinkGraph, arc_ids) -> tuple:
    """Cycle as a tuple of arcs, each arc a list of face corners [f, j]."""
    return tuple([[int(f), int(j)] for f, j in g.arcs[i].corners] for i in arc_ids)


def _check(c: Complex, kind: str, tol: float) -> Verdict:
    out = Verdict()
    for v in range(c.n_vertices):
        is_break = c.is_break_point(v)
        if (kind == "A") != is_break:
            continue
        g = c.vertex_link(v).reduced() if is_break else c.vertex_link(v)
        length, cyc = shortest_cycle(g)
        deficit = TWO_PI - length
        if deficit <= 0:
            continue
        viol = Violation(kind, v, _witness(g, cyc), deficit)
        (out.violations if deficit > tol else out.warnings).append(viol)
    return out


def check_condition_B(c: Complex, tol: float = EPS_GEOM) -> Verdict:
    """Links at true vertices (not break points) must have systole >= 2*pi.

    Each violation's witness is a cycle of length ``2*pi - magnitude``,
    given arc by arc as lists of face corners ``[f, j]``.
    """
    return _check(c, "B", tol)


def check_condition_A(c: Complex, tol: float = EPS_GEOM) -> Verdict:
    """Pairs of fans at break points of singular chains must sum to >= 2*pi.

    The witness is the failing pair of fans (corner lists) and the
    magnitude is ``2*pi - (theta_i + theta_j)``.
    """
    return _check(c, "A", tol)


def check_size_bounds(c: Complex) -> Verdict:
    out = Verdict()
    if c.kappa.value <= 0:
        return out
    bound = 2 * c.kappa.diameter
    for f in range(c.n_faces):
        per = float(c.sides[f].sum())
        if per >= bound:
            out.violations.append(Violation("SizeBound", f, (f,), per - bound))
    return out


def check_cat(c: Complex, tol: float = EPS_GEOM) -> Verdict:
    return check_condition_A(c, tol).merged(check_condition_B(c, tol)).merged(check_size_bounds(c))


# --------------------------------------------------------------------------
# admissibility
# --------------------------------------------------------------------------


@dataclass
class Admissibility:
    admissible: bool
    reasons: list[str]

    def __bool__(self):
        return self.admissible


def _germ_distances(g: LinkGraph, sources) -> dict[int, float]:
    adj = defaultdict(list)
    for a in g.arcs:
        adj[a.u].append((a.v, a.length))
        adj[a.v].append((a.u, a.length))
    dist = {s: 0.0 for s in sources}
    heap = [(0.0, s) for s in sources]
    heapq.heapify(heap)
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for w, length in adj[u]:
            if d + length < dist.get(w, math.inf):
                dist[w] = d + length
                heapq.heappush(heap, (d + length, w))
    return dist


def check_admissible(c: Complex, d, tol: float = EPS_GEOM) -> Admissibility:
    """Admissibility of a face-subset domain.

    (i) no boundary edge of the domain is a singular edge, (ii) at boundary
    vertices on the singular locus, the boundary germs are at positive link
    distance from the singular germs, (iii) the domain's sector there has
    positive length.
    """
    st = structure(c, d)
    reasons = []
    bset = set(st.boundary_edges)
    for e in st.boundary_edges:
        if c.multiplicity[e] >= 3:
            reasons.append(f"boundary edge {e} runs inside the singular locus")
    for v in st.boundary_vertices:
        if not st.on_locus[v]:
            continue
        full = c.vertex_link(v)
        locus = [g for g in full.nodes if c.germ_is_locus(g)]
        bgerms = [g for g in full.nodes if int(c.germ_edge[g]) in bset]
        if locus and bgerms:
            dist = _germ_distances(full, locus)
            near = min(dist.get(g, math.inf) for g in bgerms)
            if near <= tol:
                reasons.append(f"boundary is tangent to the singular locus at vertex {v}")
        if st.sublinks[v].total_length <= tol:
            reasons.append(f"zero sector at vertex {v}")
    return Admissibility(not reasons, reasons)


def is_admissible(c: Complex, d: Domain) -> bool:
    return check_admissible(c, d).admissible


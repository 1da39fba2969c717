"""Cone-region surgery.

Around a singular vertex x, the region K of radius eps is the set of faces
within distance eps of x in a chosen part of the link.  Its outer boundary
is a geodesic polyline T at radius about eps; the rest of its boundary
consists of radial chains (fences) from x to the leaves of T.  K is replaced
by the comparison object: one model triangle per edge [y, y'] of T with
sides |x, y|, |x, y'|, |y, y'|, glued along the shared sides [x, y].  Where
a side runs along a fence, it is subdivided at the fence vertices so the
new faces glue slot by slot onto the old boundary.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from . import modelspace as ms
from .complex import Complex, Gluing
from .domain import Domain, structure
from .errors import (
    BoundaryMismatch,
    CycleInT,
    NotSingular,
    OverlappingRegions,
    RadiusTooLarge,
)
from .measure import boundary_turn, curvature_measure, link_atom, measure_of
from .metric import DistortionReport, boundary_distortion, flat_distances, refined_graph
from .verify import Verdict, check_cat

TOL_RADIAL = 0.05
_REL = 1e-9


def _close(a: float, b: float, scale: float) -> bool:
    return abs(a - b) <= _REL * max(1.0, scale)


# --------------------------------------------------------------------------
# distances from the apex
# --------------------------------------------------------------------------


def apex_distances(c: Complex, x: int, bound: float, k: int = 16) -> dict[int, float]:
    """Distances from x to nearby vertices: exact on flat complexes, refined-graph otherwise."""
    if c.kappa.value == 0:
        return flat_distances(c, x, bound)
    g = refined_graph(c, k)
    row = g.rows([x])[0][: c.n_vertices]
    return {v: float(d) for v, d in enumerate(row) if d <= bound}


def is_surgery_vertex(c: Complex, x: int) -> bool:
    """Topologically singular, or a cone point with a non-zero atom."""
    if x in set(c.singular_locus().vertices):
        return True
    return abs(link_atom(c.vertex_link(x))) > 1e-9


# --------------------------------------------------------------------------
# cone regions
# --------------------------------------------------------------------------


@dataclass
class ConeRegion:
    apex: int
    eps: float
    segment: frozenset | None
    faces: frozenset
    dist: dict[int, float] = field(repr=False)
    tree_edges: list[int]
    tree_vertices: list[int]
    fences: dict[int, list[int]]
    boundary_edges: list[int]
    radial_ratio: float
    tol_radial: float = TOL_RADIAL

    @property
    def radial_ok(self) -> bool:
        return self.radial_ratio <= 1 + self.tol_radial

    @property
    def boundary_vertices(self) -> list[int]:
        vs = set(self.tree_vertices)
        for chain in self.fences.values():
            vs.update(chain)
        return sorted(vs)


def _fence_chains(c: Complex, x: int, start_germs, dist, rim: float) -> set[int]:
    """Edges of the radial chains leaving x through ``start_germs``, up to radius ``rim``."""
    edges = set()
    for g in start_germs:
        e = int(c.germ_edge[g])
        a, b = c.edge_vertices(e)
        if a == b:
            raise BoundaryMismatch(f"fence edge {e} is a loop")
        v = b if a == x else a
        prev = e
        edges.add(e)
        while dist.get(v, math.inf) < rim:
            cand = []
            for gg in c.vertex_germs[v]:
                ee = int(c.germ_edge[gg])
                if ee == prev:
                    continue
                p, q = c.edge_vertices(ee)
                w = q if p == v else p
                if w in dist and _close(dist[w], dist[v] + float(c.edge_length[ee]), dist[w]):
                    cand.append((ee, w))
            cand = sorted(set(cand))
            if len(cand) != 1:
                raise BoundaryMismatch(f"cannot continue the radial fence at vertex {v} ({len(cand)} candidates)")
            prev, v = cand[0]
            edges.add(prev)
    return edges


def extract_cone(c: Complex, x: int, segment=None, eps: float = 0.1, tol_radial: float = TOL_RADIAL, k: int = 16) -> ConeRegion:
    """Cone region of radius ``eps`` at ``x`` over the link segment ``segment`` (germ ids; None = whole link)."""
    if not 0 <= x < c.n_vertices:
        raise IndexError(f"no vertex {x}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    reach = eps * (1 + tol_radial) * (1 + _REL)
    dist = apex_distances(c, x, reach, k)
    inside = eps * (1 + _REL)
    rim = eps * (1 - tol_radial)
    seg = None if segment is None else frozenset(int(g) for g in segment)
    corners = c.vertex_corners[x]
    chosen = [(f, j) for f, j in corners if seg is None or set(c.corner_germs(f, j)) <= seg]
    if not chosen:
        raise ValueError("the link segment selects no face corners")
    excluded = {f for f, j in corners} - {f for f, _ in chosen}
    fence_edges: set[int] = set()
    if seg is not None:
        border = set()
        for f, j in corners:
            u, w = c.corner_germs(f, j)
            if (f, j) not in chosen:
                border.update(g for g in (u, w) if g in seg)
        fence_edges = _fence_chains(c, x, sorted(border), dist, rim)

    def ok(f):
        return f not in excluded and all(dist.get(int(v), math.inf) <= inside for v in c.face_vertices(f))

    faces = set()
    stack = [f for f, _ in chosen if ok(f)]
    if not stack:
        raise RadiusTooLarge(f"eps={eps} is smaller than the star of vertex {x}")
    while stack:
        f = stack.pop()
        if f in faces:
            continue
        faces.add(f)
        for s in range(3):
            e = int(c.edge_of_slot[f, s])
            if e in fence_edges:
                continue
            for g, _ in c.edge_slots[e]:
                if g not in faces and ok(g):
                    stack.append(g)
    faces = frozenset(faces)
    st = structure(c, faces)
    if st.interior_vertices and x not in st.boundary_vertices and x not in st.interior_vertices:
        raise RadiusTooLarge("region does not contain the apex")
    tree = [e for e in st.boundary_edges if x not in c.edge_vertices(e) and e not in fence_edges and all(dist.get(v, -1) >= rim for v in c.edge_vertices(e))]
    if not tree:
        raise RadiusTooLarge(f"no boundary at radius {eps} around vertex {x}")
    # T must be a forest of one component
    tv = sorted({v for e in tree for v in c.edge_vertices(e)})
    parent = {v: v for v in tv}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in tree:
        a, b = (find(v) for v in c.edge_vertices(e))
        if a == b:
            raise CycleInT(f"the radius-{eps} boundary around vertex {x} contains a cycle")
        parent[a] = b
    if len({find(v) for v in tv}) != 1:
        raise BoundaryMismatch("the outer boundary of the region is disconnected")
    if not is_surgery_vertex(c, x):
        raise NotSingular(f"vertex {x} is neither singular nor a cone point")
    # remaining boundary edges must form chains from x to the leaves of T
    rest = set(st.boundary_edges) - set(tree)
    adj = defaultdict(list)
    for e in rest:
        a, b = c.edge_vertices(e)
        adj[a].append((e, b))
        adj[b].append((e, a))
    fences: dict[int, list[int]] = {}
    used = set()
    tset = set(tv)
    for e0, v0 in adj.get(x, []):
        chain, prev, v = [x], e0, v0
        used.add(e0)
        while v not in tset:
            chain.append(v)
            nxt = [(e, w) for e, w in adj[v] if e != prev]
            if len(nxt) != 1:
                raise RadiusTooLarge(f"region boundary branches at vertex {v}; eps too large")
            prev, v = nxt[0]
            used.add(prev)
        chain.append(v)
        if v in fences:
            raise BoundaryMismatch(f"two fences end at vertex {v}")
        fences[v] = chain
    if used != rest:
        raise RadiusTooLarge(f"region around vertex {x} reaches other boundary; eps too large")
    ds = [dist[v] for v in tv]
    return ConeRegion(
        apex=x,
        eps=eps,
        segment=seg,
        faces=faces,
        dist={v: dist[v] for v in dist},
        tree_edges=sorted(tree),
        tree_vertices=tv,
        fences=fences,
        boundary_edges=sorted(st.boundary_edges),
        radial_ratio=max(ds) / min(ds),
        tol_radial=tol_radial,
    )


# --------------------------------------------------------------------------
# comparison object
# --------------------------------------------------------------------------


@dataclass
class Comparison:
    triangles: list[tuple[tuple[int, int, int], list[float]]]
    apex_angles: dict[int, float]
    needles: list[int]

    @property
    def apex_angle(self) -> float:
        return math.fsum(self.apex_angles.values())


def _side_points(c: Complex, region: ConeRegion, y: int) -> list[tuple[int, float]]:
    """Points (vertex, distance from x) along the comparison side [x, y]."""
    d = region.dist[y]
    chain = region.fences.get(y)
    if chain is None:
        return [(region.apex, 0.0), (y, d)]
    lens = []
    for a, b in zip(chain[:-1], chain[1:]):
        cand = [e for e in region.boundary_edges if set(c.edge_vertices(e)) == {a, b}]
        if len(cand) != 1:
            raise BoundaryMismatch(f"fence step {a}-{b} is ambiguous")
        lens.append(float(c.edge_length[cand[0]]))
    total = math.fsum(lens)
    if not _close(total, d, d):
        free = all(
            c.multiplicity[e] == 1
            for e in region.boundary_edges
            if set(c.edge_vertices(e)) <= set(chain) and e not in region.tree_edges
        )
        if free:
            return [(region.apex, 0.0), (y, d)]
        raise BoundaryMismatch(f"fence to vertex {y} is not straight: {total} vs {d}")
    pts, acc = [(region.apex, 0.0)], 0.0
    for v, l in zip(chain[1:], lens):
        acc += l
        pts.append((v, acc))
    return pts


def comparison_object(c: Complex, region: ConeRegion) -> Comparison:
    """One comparison triangle per tree edge, laddered along fence sides."""
    kappa = c.kappa
    tris = []
    apex_angles = {}
    needles = []
    for e in region.tree_edges:
        y, y2 = c.edge_vertices(e)
        A = _side_points(c, region, y)
        B = _side_points(c, region, y2)
        dy, dy2, l = A[-1][1], B[-1][1], float(c.edge_length[e])
        lo, hi = abs(dy - dy2), dy + dy2
        lc = min(max(l, lo), hi)
        phi = ms.comparison_angle(kappa, dy, dy2, lc, tol=1e-6) if lo < hi else 0.0
        apex_angles[e] = phi
        if ms.is_needle(kappa, (max(lc, 1e-300), dy, dy2), tol=ms.EPS_GEOM) or phi <= ms.EPS_GEOM:
            needles.append(e)

        def chord(p, q):
            if p[1] == 0:
                return q[1]
            if q[1] == 0:
                return p[1]
            return ms.side_from_sas(kappa, p[1], q[1], phi)

        # ladder between the two sides, advancing the nearer point first
        i = j = 1
        tris.append(((region.apex, A[1][0], B[1][0]), [A[1][1], chord(A[1], B[1]), B[1][1]]))
        while i < len(A) - 1 or j < len(B) - 1:
            a, b = A[i], B[j]
            if j == len(B) - 1 or (i < len(A) - 1 and A[i + 1][1] <= B[j + 1][1]):
                n = A[i + 1]
                tris.append(((a[0], n[0], b[0]), [n[1] - a[1], chord(n, b), chord(a, b)]))
                i += 1
            else:
                n = B[j + 1]
                tris.append(((a[0], n[0], b[0]), [chord(a, n), n[1] - b[1], chord(a, b)]))
                j += 1
        # the outer side of the last triangle is the tree edge itself
        labels, sides = tris[-1]
        for s in range(3):
            if {labels[s], labels[(s + 1) % 3]} == {y, y2}:
                sides[s] = l
    return Comparison(tris, apex_angles, needles)


# --------------------------------------------------------------------------
# splicing
# --------------------------------------------------------------------------


@dataclass
class SurgeryResult:
    new_complex: Complex
    regions: list[ConeRegion]
    region_before: frozenset
    region_after: frozenset
    apex_angle_before: float
    apex_angle_after: float
    verdict_after: Verdict
    vertex_map: dict[int, int]
    face_map: dict[int, int]
    boundary_error: float
    needles: list[int]
    distortion: DistortionReport | None = None


def splice(c: Complex, regions, comparisons=None) -> SurgeryResult:
    """Replace each region by its comparison object and rebuild the complex."""
    if isinstance(regions, ConeRegion):
        regions = [regions]
    regions = list(regions)
    seen = set()
    for r in regions:
        if seen & r.faces:
            raise OverlappingRegions("surgery regions share faces")
        seen |= r.faces
    if comparisons is None:
        comparisons = [comparison_object(c, r) for r in regions]
    elif isinstance(comparisons, Comparison):
        comparisons = [comparisons]
    removed = set(seen)
    outer = [f for f in range(c.n_faces) if f not in removed]
    face_map = {f: i for i, f in enumerate(outer)}
    sides = [list(map(float, c.sides[f])) for f in outer]
    gluings = []
    # outer-outer gluings, rebuilt per edge class so star gluings survive
    for e in range(c.n_edges):
        slots = [(f, s) for f, s in c.edge_slots[e] if f in face_map]
        if len(slots) < 2:
            continue
        f0, s0 = slots[0]
        for f, s in slots[1:]:
            flip = c.germ_of_end[f, s, 0] == c.germ_of_end[f0, s0, 0]
            gluings.append(Gluing((face_map[f0], s0), (face_map[f], s), bool(flip)))
    # boundary edges of the regions keyed by endpoint pairs
    bkey: dict[frozenset, list[int]] = defaultdict(list)
    for r in regions:
        for e in r.boundary_edges:
            bkey[frozenset(c.edge_vertices(e))].append(e)
    new_faces = []
    new_labels = []
    needles = []
    for r, comp in zip(regions, comparisons):
        needles += comp.needles
        for labels, ss in comp.triangles:
            new_faces.append(len(sides))
            new_labels.append(labels)
            sides.append(list(ss))
    # glue the new slots: to old boundary slots when they retrace a region
    # boundary edge, and to each other when they share a label pair
    groups: dict[frozenset, list[tuple[int, int, int]]] = defaultdict(list)
    for fid, labels in zip(new_faces, new_labels):
        for s in range(3):
            groups[frozenset((labels[s], labels[(s + 1) % 3]))].append((fid, s, labels[s]))
    for key, slots in groups.items():
        old = bkey.get(key, [])
        if len(old) > 1:
            raise BoundaryMismatch(f"several boundary edges join vertices {sorted(key)}")
        anchors = []
        if old:
            e = old[0]
            anchors = [(face_map[f], s, int(c.vertex_of_corner[f, s])) for f, s in c.edge_slots[e] if f in face_map]
        allslots = anchors + slots
        if len(allslots) < 2:
            continue
        f0, s0, start0 = allslots[0]
        for f, s, start in allslots[1:]:
            gluings.append(Gluing((f0, s0), (f, s), start == start0))
    new = Complex(c.kappa, sides, gluings)
    vmap = {}
    for f in outer:
        for j in range(3):
            vmap[int(c.vertex_of_corner[f, j])] = int(new.vertex_of_corner[face_map[f], j])
    for fid, labels in zip(new_faces, new_labels):
        for j in range(3):
            vmap[int(labels[j])] = int(new.vertex_of_corner[fid, j])
    # boundary isometry: every region boundary edge keeps its length
    err = 0.0
    for r in regions:
        for e in r.boundary_edges:
            a, b = c.edge_vertices(e)
            na, nb = vmap[a], vmap[b]
            lens = [float(new.edge_length[k]) for k in range(new.n_edges) if {na, nb} == set(new.edge_vertices(k))]
            if not lens:
                raise BoundaryMismatch(f"boundary edge {e} was lost in splicing")
            err = max(err, min(abs(l - float(c.edge_length[e])) for l in lens))
    before = math.fsum(float(c.angles[f, j]) for r in regions for f, j in c.vertex_corners[r.apex] if f in r.faces)
    apexes = {vmap[r.apex] for r in regions}
    newset = set(new_faces)
    after = math.fsum(float(new.angles[f, j]) for v in apexes for f, j in new.vertex_corners[v] if f in newset)
    return SurgeryResult(
        new_complex=new,
        regions=regions,
        region_before=frozenset(removed),
        region_after=frozenset(new_faces),
        apex_angle_before=before,
        apex_angle_after=after,
        verdict_after=check_cat(new),
        vertex_map=vmap,
        face_map=face_map,
        boundary_error=err,
        needles=needles,
    )


def surgery(c: Complex, x: int, eps: float, segment=None, distortion: bool = False, samples: int = 400) -> SurgeryResult:
    region = extract_cone(c, x, segment, eps)
    res = splice(c, [region])
    if distortion:
        res.distortion = region_distortion(c, res, samples)
    return res


def region_distortion(c: Complex, res: SurgeryResult, samples: int = 400, k: int = 16) -> DistortionReport:
    """Distortion between the old and new complex over pairs of region boundary vertices."""
    pts = set()
    bound = 0.0
    for r in res.regions:
        pts.update(r.boundary_vertices)
        pts.add(r.apex)
        bound = max(bound, 2 * r.eps * (1 + r.tol_radial))
    bmap = {v: res.vertex_map[v] for v in sorted(pts)}
    exact = c.kappa.value == 0
    return boundary_distortion(c, res.new_complex, bmap, samples=samples, k=k, exact=exact, bound=bound * (1 + 1e-6))


# --------------------------------------------------------------------------
# schedules
# --------------------------------------------------------------------------

CSV_COLUMNS = ["eps", "faces", "distortion", "omega_D", "tau_boundary", "cat_pass"]


@dataclass
class Schedule:
    results: list[SurgeryResult]
    rows: list[dict]
    omega_D: float | None
    tau_boundary: float | None
    warnings: list[str]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({k: (f"{row[k]:.12g}" if isinstance(row[k], float) else row[k]) for k in CSV_COLUMNS})
        return buf.getvalue()


def surgery_schedule(
    c: Complex,
    eps_list,
    targets,
    segments=None,
    domain=None,
    distortion: bool = True,
    samples: int = 400,
) -> Schedule:
    """Run eps-surgeries on the original complex for each eps of a decreasing list.

    ``segments`` optionally maps target vertices to link segments.  With a
    tracked ``domain`` (face set of ``c``) each row records the measure of
    its image and the turn of the image boundary.
    """
    eps_list = [float(e) for e in eps_list]
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be strictly decreasing")
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise OverlappingRegions("repeated surgery target")
    segments = segments or {}
    omega0 = tau0 = None
    if domain is not None:
        dfaces = domain.faces if isinstance(domain, Domain) else frozenset(domain)
        m0 = curvature_measure(c)
        omega0 = measure_of(c, m0, dfaces)
        tau0 = boundary_turn(c, dfaces).total
    results, rows, warnings = [], [], []
    for eps in eps_list:
        regions = [extract_cone(c, x, segments.get(x), eps) for x in targets]
        for r in regions:
            if not r.radial_ok:
                warnings.append(f"eps={eps}: region at vertex {r.apex} has radial ratio {r.radial_ratio:.6g}")
        res = splice(c, regions)
        if distortion:
            res.distortion = region_distortion(c, res, samples)
        row = {
            "eps": eps,
            "faces": res.new_complex.n_faces,
            "distortion": res.distortion.max_abs_distortion if res.distortion else float("nan"),
            "omega_D": float("nan"),
            "tau_boundary": float("nan"),
            "cat_pass": res.verdict_after.passed,
        }
        if domain is not None:
            dn = _image_domain(res, dfaces)
            m = curvature_measure(res.new_complex)
            row["omega_D"] = measure_of(res.new_complex, m, dn)
            row["tau_boundary"] = boundary_turn(res.new_complex, dn).total
        results.append(res)
        rows.append(row)
    return Schedule(results, rows, omega0, tau0, warnings)


def _own_faces(r: ConeRegion, res: SurgeryResult) -> list[int]:
    """New faces of the comparison object built for region ``r``."""
    apex = res.vertex_map[r.apex]
    c = res.new_complex
    own = set()
    frontier = [f for f, _ in c.vertex_corners[apex] if f in res.region_after]
    while frontier:
        f = frontier.pop()
        if f in own:
            continue
        own.add(f)
        for s in range(3):
            for g, _ in c.edge_slots[int(c.edge_of_slot[f, s])]:
                if g in res.region_after and g not in own:
                    frontier.append(g)
    return sorted(own)


def _image_domain(res: SurgeryResult, faces) -> frozenset:
    faces = set(faces)
    out = {res.face_map[f] for f in faces if f in res.face_map}
    for r in res.regions:
        if r.faces <= faces:
            out.update(_own_faces(r, res))
        elif r.faces & faces:
            raise ValueError("tracked domain cuts through a surgery region")
    return frozenset(out)

"""Polyhedral 2-complexes glued from model-space triangles.

Conventions
-----------
Side ``s`` of a triangle joins corner ``s`` to corner ``(s + 1) % 3``; the
angle at corner ``j`` therefore faces side ``(j + 1) % 3``.  A gluing of
slots ``(f, s)`` and ``(g, t)`` identifies corner ``s`` of ``f`` with corner
``t + 1`` of ``g`` (reversed orientation, the default) or with corner ``t``
(``flip=True``).  Several gluings may share a slot, which is how edges of
multiplicity three or more are expressed.

A *germ* is one end of an edge class at one of its vertices; germs are the
nodes of link graphs and face corners are their arcs.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from . import modelspace as ms
from .errors import (
    BoundaryEdge,
    ComplexFormatError,
    GeometryError,
    InvalidTriangle,
    LengthMismatch,
    SlotReuse,
)
from .modelspace import EPS_GEOM, Kappa, as_kappa


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        p = self.parent
        while p[i] != i:
            p[i] = p[p[i]]
            i = p[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            if ri < rj:
                self.parent[rj] = ri
            else:
                self.parent[ri] = rj

    def labels(self) -> list[int]:
        """Class index per element, numbered by smallest member."""
        roots = [self.find(i) for i in range(len(self.parent))]
        order: dict[int, int] = {}
        out = []
        for r in roots:
            if r not in order:
                order[r] = len(order)
            out.append(order[r])
        return out


@dataclass(frozen=True)
class Gluing:
    a: tuple[int, int]
    b: tuple[int, int]
    flip: bool = False


def corner_angle_side(corner: int) -> int:
    return (corner + 1) % 3


# --------------------------------------------------------------------------
# link graphs
# --------------------------------------------------------------------------


@dataclass
class LinkArc:
    u: int
    v: int
    length: float
    corners: tuple[tuple[int, int], ...]


@dataclass
class LinkGraph:
    """Metric graph of directions at a point.

    ``nodes`` are germ ids; each arc carries the face corners it was built
    from (several after valence-2 nodes are suppressed).
    """

    nodes: list[int]
    arcs: list[LinkArc]
    locus_nodes: frozenset = field(default_factory=frozenset)

    @property
    def total_length(self) -> float:
        return math.fsum(a.length for a in self.arcs)

    @property
    def euler_char(self) -> int:
        return len(self.nodes) - len(self.arcs)

    def valence(self) -> dict[int, int]:
        val = {n: 0 for n in self.nodes}
        for a in self.arcs:
            val[a.u] += 1
            val[a.v] += 1
        return val

    @property
    def endpoints(self) -> list[int]:
        return sorted(n for n, k in self.valence().items() if k == 1)

    @property
    def branching(self) -> dict[int, int]:
        """Nodes of valence >= 3 with their valence."""
        return {n: k for n, k in self.valence().items() if k >= 3}

    def components(self) -> list[set[int]]:
        adj = defaultdict(set)
        for a in self.arcs:
            adj[a.u].add(a.v)
            adj[a.v].add(a.u)
        seen: set[int] = set()
        comps = []
        for n in self.nodes:
            if n in seen:
                continue
            stack, comp = [n], set()
            while stack:
                x = stack.pop()
                if x in comp:
                    continue
                comp.add(x)
                stack.extend(adj[x] - comp)
            seen |= comp
            comps.append(comp)
        return comps

    def is_circle(self) -> bool:
        return (
            bool(self.arcs)
            and len(self.components()) == 1
            and all(k == 2 for k in self.valence().values())
        )

    def is_arc(self) -> bool:
        if not self.arcs or len(self.components()) != 1:
            return False
        val = self.valence()
        return self.euler_char == 1 and sorted(val.values()).count(1) == 2 and max(val.values()) <= 2

    def reduced(self, keep=()) -> "LinkGraph":
        """Suppress valence-2 nodes outside ``keep``, merging their two arcs."""
        keep = set(keep) | set(self.locus_nodes)
        nodes = list(self.nodes)
        arcs = [LinkArc(a.u, a.v, a.length, a.corners) for a in self.arcs]
        changed = True
        while changed:
            changed = False
            inc = defaultdict(list)
            for i, a in enumerate(arcs):
                inc[a.u].append(i)
                inc[a.v].append(i)
            for n in nodes:
                if n in keep or len(inc[n]) != 2:
                    continue
                i, j = inc[n]
                if i == j:  # a loop at n
                    continue
                a, b = arcs[i], arcs[j]
                u = a.v if a.u == n else a.u
                w = b.v if b.u == n else b.u
                merged = LinkArc(u, w, a.length + b.length, a.corners + b.corners)
                arcs = [x for k, x in enumerate(arcs) if k not in (i, j)] + [merged]
                nodes.remove(n)
                changed = True
                break
        return LinkGraph(nodes, arcs, self.locus_nodes)

    def subgraph(self, corners) -> "LinkGraph":
        """Arcs whose corners all lie in ``corners``, with their end nodes."""
        corners = set(corners)
        arcs = [a for a in self.arcs if set(a.corners) <= corners]
        nodes = sorted({a.u for a in arcs} | {a.v for a in arcs})
        return LinkGraph(nodes, arcs, self.locus_nodes & frozenset(nodes))

    def to_dict(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "arcs": [[a.u, a.v, a.length] for a in self.arcs],
            "total_length": self.total_length,
            "euler_char": self.euler_char,
            "endpoints": self.endpoints,
        }


@dataclass
class SingularLocus:
    edges: list[int]
    boundary_edges: list[int]
    vertices: list[int]
    break_points: list[int]
    branch_points: list[int]
    graph: dict[int, list[int]]

    @property
    def empty(self) -> bool:
        return not self.edges and not self.vertices


# --------------------------------------------------------------------------
# the complex
# --------------------------------------------------------------------------


class Complex:
    """Immutable triangle complex with derived incidence.

    Build with :func:`build` or :meth:`from_labeled`; instances are never
    mutated afterwards, surgery produces new complexes.
    """

    def __init__(self, kappa, sides, gluings, ids=None, tol: float = EPS_GEOM):
        self.kappa: Kappa = as_kappa(kappa)
        self.sides = np.asarray(sides, dtype=float).reshape(-1, 3)
        self.sides.setflags(write=False)
        self.gluings: tuple[Gluing, ...] = tuple(gluings)
        self.ids = list(range(len(self.sides))) if ids is None else list(ids)
        self.tol = tol
        self._validate_faces()
        self._derive()

    # ---- construction -----------------------------------------------------

    def _validate_faces(self):
        if len(self.sides) == 0:
            raise InvalidTriangle("complex has no triangles")
        angles = np.empty_like(self.sides)
        areas = np.empty(len(self.sides))
        for f, s in enumerate(self.sides):
            try:
                angles[f] = [ms.angle_from_sides(self.kappa, s, corner_angle_side(j), self.tol) for j in range(3)]
                areas[f] = ms.triangle_area(self.kappa, s, self.tol)
            except GeometryError as exc:
                raise InvalidTriangle(f"triangle {self.ids[f]}: {exc}") from exc
        angles.setflags(write=False)
        areas.setflags(write=False)
        self.angles = angles
        self.areas = areas

    def _derive(self):
        nf = len(self.sides)
        seen_pairs = set()
        corners = _UnionFind(3 * nf)
        slots = _UnionFind(3 * nf)
        ends = _UnionFind(6 * nf)
        for g in self.gluings:
            (f, s), (h, t) = g.a, g.b
            for ff, ss in (g.a, g.b):
                if not (0 <= ff < nf and 0 <= ss < 3):
                    raise SlotReuse(f"gluing references missing slot {(ff, ss)}")
            key = frozenset([(f, s), (h, t)])
            if len(key) == 1:
                raise SlotReuse(f"slot {(f, s)} glued to itself")
            if key in seen_pairs:
                raise SlotReuse(f"slots {(f, s)} and {(h, t)} glued twice")
            seen_pairs.add(key)
            la, lb = self.sides[f, s], self.sides[h, t]
            if abs(la - lb) > self.tol * max(1.0, la, lb):
                raise LengthMismatch(f"glued sides differ: {(f, s)}={la} vs {(h, t)}={lb}")
            slots.union(3 * f + s, 3 * h + t)
            if g.flip:
                pairs = ((0, 0), (1, 1))
            else:
                pairs = ((0, 1), (1, 0))
            for ea, eb in pairs:
                ends.union(6 * f + 2 * s + ea, 6 * h + 2 * t + eb)
                corners.union(3 * f + (s + ea) % 3, 3 * h + (t + eb) % 3)
        self.edge_of_slot = np.array(slots.labels(), dtype=int).reshape(nf, 3)
        self.n_edges = int(self.edge_of_slot.max()) + 1
        self.edge_slots: list[list[tuple[int, int]]] = [[] for _ in range(self.n_edges)]
        for f in range(nf):
            for s in range(3):
                self.edge_slots[self.edge_of_slot[f, s]].append((f, s))
        self.multiplicity = np.array([len(x) for x in self.edge_slots], dtype=int)

        germ = np.array(ends.labels(), dtype=int).reshape(nf, 3, 2)
        for f in range(nf):
            for s in range(3):
                if germ[f, s, 0] == germ[f, s, 1]:
                    raise SlotReuse(f"gluing folds side {(self.ids[f], s)} onto itself")
        self.germ_of_end = germ
        self.n_germs = int(germ.max()) + 1

        self.vertex_of_corner = np.array(corners.labels(), dtype=int).reshape(nf, 3)
        self.n_vertices = int(self.vertex_of_corner.max()) + 1

        self.germ_vertex = np.empty(self.n_germs, dtype=int)
        self.germ_edge = np.empty(self.n_germs, dtype=int)
        for f in range(nf):
            for s in range(3):
                for e in range(2):
                    gid = germ[f, s, e]
                    self.germ_vertex[gid] = self.vertex_of_corner[f, (s + e) % 3]
                    self.germ_edge[gid] = self.edge_of_slot[f, s]

        self.vertex_corners: list[list[tuple[int, int]]] = [[] for _ in range(self.n_vertices)]
        for f in range(nf):
            for j in range(3):
                self.vertex_corners[self.vertex_of_corner[f, j]].append((f, j))
        self.vertex_germs: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for gid in range(self.n_germs):
            self.vertex_germs[self.germ_vertex[gid]].append(gid)
        self.edge_length = np.array([self.sides[s[0]] for s in self.edge_slots])

    @classmethod
    def from_labeled(cls, kappa, triangles, tol: float = EPS_GEOM) -> "Complex":
        """Build from triangles whose corners carry hashable vertex labels.

        ``triangles`` is a sequence of ``(labels, sides)`` where ``labels`` is
        a 3-tuple and ``sides[s]`` is the length between ``labels[s]`` and
        ``labels[s+1]``.  Every pair of slots with the same unordered label
        pair is glued (star-wise onto the first such slot).
        """
        sides = []
        first: dict[frozenset, tuple[int, int, object]] = {}
        gluings = []
        for f, (labels, ss) in enumerate(triangles):
            if len(set(labels)) != 3:
                raise InvalidTriangle(f"triangle {f} repeats a vertex label: {labels}")
            sides.append(list(ss))
            for s in range(3):
                u, v = labels[s], labels[(s + 1) % 3]
                key = frozenset((u, v))
                if key in first:
                    g, t, start = first[key]
                    gluings.append(Gluing((g, t), (f, s), flip=(start == u)))
                else:
                    first[key] = (f, s, u)
        return cls(kappa, sides, gluings, tol=tol)

    # ---- basic queries ----------------------------------------------------

    @property
    def n_faces(self) -> int:
        return len(self.sides)

    def corner_germs(self, f: int, j: int) -> tuple[int, int]:
        """The two germs joined by the arc of corner ``(f, j)``."""
        return int(self.germ_of_end[f, j, 0]), int(self.germ_of_end[f, (j - 1) % 3, 1])

    def face_vertices(self, f: int) -> tuple[int, int, int]:
        return tuple(int(v) for v in self.vertex_of_corner[f])

    def edge_vertices(self, e: int) -> tuple[int, int]:
        f, s = self.edge_slots[e][0]
        return int(self.vertex_of_corner[f, s]), int(self.vertex_of_corner[f, (s + 1) % 3])

    def germ_is_locus(self, gid: int) -> bool:
        return self.multiplicity[self.germ_edge[gid]] >= 3

    @cached_property
    def boundary_edges(self) -> list[int]:
        return [e for e in range(self.n_edges) if self.multiplicity[e] == 1]

    @property
    def is_closed(self) -> bool:
        return not self.boundary_edges

    def total_area(self, faces=None) -> float:
        idx = range(self.n_faces) if faces is None else faces
        return math.fsum(float(self.areas[f]) for f in idx)

    # ---- links ------------------------------------------------------------

    def link(self, v: int, faces=None) -> LinkGraph:
        """Link graph at vertex ``v``; restricted to corners of ``faces`` if given."""
        if not 0 <= v < self.n_vertices:
            raise IndexError(f"no vertex {v}")
        arcs = []
        for f, j in self.vertex_corners[v]:
            if faces is not None and f not in faces:
                continue
            u, w = self.corner_germs(f, j)
            arcs.append(LinkArc(u, w, float(self.angles[f, j]), ((f, j),)))
        if faces is None:
            nodes = sorted(self.vertex_germs[v])
        else:
            nodes = sorted({a.u for a in arcs} | {a.v for a in arcs})
        locus = frozenset(g for g in nodes if self.germ_is_locus(g))
        return LinkGraph(nodes, arcs, locus)

    @cached_property
    def _links(self) -> list[LinkGraph]:
        return [self.link(v) for v in range(self.n_vertices)]

    def vertex_link(self, v: int) -> LinkGraph:
        """Cached full link at ``v``."""
        return self._links[v]

    def link_at_edge_point(self, e: int, breakpoint: int | None = None) -> LinkGraph:
        """Link at a point of edge class ``e``.

        With ``breakpoint=None`` the point is interior to the edge: two germ
        nodes (-1 and -2) joined by one arc of length pi per incident face.
        With ``breakpoint`` set to one of the edge's end vertices the reduced
        vertex link there is returned: one arc per face fan between the two
        singular germs.
        """
        m = int(self.multiplicity[e])
        if m < 2:
            raise BoundaryEdge(f"edge {e} lies on the boundary")
        if breakpoint is None:
            arcs = [LinkArc(-1, -2, math.pi, (slot,)) for slot in self.edge_slots[e]]
            return LinkGraph([-1, -2], arcs, frozenset([-1, -2]))
        if breakpoint not in self.edge_vertices(e):
            raise IndexError(f"vertex {breakpoint} is not an end of edge {e}")
        return self.vertex_link(breakpoint).reduced()

    # ---- topology ---------------------------------------------------------

    def closure_cells(self, faces) -> tuple[set[int], set[int]]:
        faces = set(faces)
        verts = {int(self.vertex_of_corner[f, j]) for f in faces for j in range(3)}
        edges = {int(self.edge_of_slot[f, s]) for f in faces for s in range(3)}
        return verts, edges

    def euler_characteristic(self, faces=None) -> int:
        faces = range(self.n_faces) if faces is None else faces
        faces = set(faces)
        if not faces:
            raise ValueError("empty face set")
        verts, edges = self.closure_cells(faces)
        return len(verts) - len(edges) + len(faces)

    def singular_locus(self) -> SingularLocus:
        return self._locus

    @cached_property
    def _locus(self) -> SingularLocus:
        sing_edges = [e for e in range(self.n_edges) if self.multiplicity[e] >= 3]
        bnd = list(self.boundary_edges)
        sing_verts = []
        for v in range(self.n_vertices):
            lk = self.vertex_link(v)
            if not (lk.is_circle() or lk.is_arc()):
                sing_verts.append(v)
        graph: dict[int, list[int]] = defaultdict(list)
        for e in sing_edges:
            a, b = self.edge_vertices(e)
            graph[a].append(e)
            if b != a:
                graph[b].append(e)
        breaks = [v for v in sing_verts if self.is_break_point(v)]
        branches = [v for v in sing_verts if len(graph.get(v, ())) >= 3]
        return SingularLocus(sing_edges, bnd, sing_verts, breaks, branches, dict(graph))

    def is_break_point(self, v: int) -> bool:
        """Vertex interior to a singular chain: its reduced link is a 2-node multi-arc graph."""
        lk = self.vertex_link(v)
        if len(lk.locus_nodes) != 2:
            return False
        red = lk.reduced()
        if len(red.nodes) != 2 or set(red.nodes) != set(lk.locus_nodes):
            return False
        return len(red.arcs) >= 3 and all(a.u != a.v for a in red.arcs)

    def fan_angles(self, v: int) -> list[LinkArc]:
        """Face fans at a break point, as arcs of the reduced link."""
        return self.vertex_link(v).reduced().arcs

    # ---- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa.value,
            "triangles": [{"id": self.ids[f], "sides": [float(x) for x in self.sides[f]]} for f in range(self.n_faces)],
            "gluings": [
                {"a": [self.ids[g.a[0]], g.a[1]], "b": [self.ids[g.b[0]], g.b[1]], "flip": g.flip}
                for g in self.gluings
            ],
        }

    def to_json(self, path=None, indent: int | None = 1) -> str:
        text = json.dumps(self.to_dict(), indent=indent)
        if path is not None:
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text

    def __repr__(self):
        return (
            f"Complex(kappa={self.kappa.value}, faces={self.n_faces}, "
            f"edges={self.n_edges}, vertices={self.n_vertices})"
        )


def build(kappa, triangles, gluings, tol: float = EPS_GEOM) -> Complex:
    """Validate raw lists and return a :class:`Complex`.

    ``triangles`` holds side triples (or dicts with ``id`` and ``sides``);
    ``gluings`` holds :class:`Gluing` objects, dicts in the file format, or
    ``((f, s), (g, t))`` / ``((f, s), (g, t), flip)`` tuples referring to
    triangle ids.
    """
    ids, sides = [], []
    for i, t in enumerate(triangles):
        if isinstance(t, dict):
            ids.append(int(t["id"]))
            sides.append([float(x) for x in t["sides"]])
        else:
            ids.append(i)
            sides.append([float(x) for x in t])
    if any(len(s) != 3 for s in sides):
        raise InvalidTriangle("every triangle needs exactly three sides")
    if len(set(ids)) != len(ids):
        raise ComplexFormatError("duplicate triangle ids")
    index = {fid: k for k, fid in enumerate(ids)}

    def slot(x):
        fid, s = int(x[0]), int(x[1])
        if fid not in index:
            raise SlotReuse(f"gluing references unknown triangle {fid}")
        return index[fid], s

    glu = []
    for g in gluings:
        if isinstance(g, Gluing):
            glu.append(Gluing(slot(g.a), slot(g.b), g.flip))
        elif isinstance(g, dict):
            extra = set(g) - {"a", "b", "flip"}
            if extra:
                raise ComplexFormatError(f"unknown gluing keys {sorted(extra)}")
            glu.append(Gluing(slot(g["a"]), slot(g["b"]), bool(g.get("flip", False))))
        else:
            glu.append(Gluing(slot(g[0]), slot(g[1]), bool(g[2]) if len(g) > 2 else False))
    return Complex(kappa, sides, glu, ids=ids, tol=tol)


_TOP_KEYS = {"kappa", "triangles", "gluings"}


def from_dict(data: dict) -> Complex:
    if not isinstance(data, dict):
        raise ComplexFormatError("complex file must hold a JSON object")
    extra = set(data) - _TOP_KEYS
    if extra:
        raise ComplexFormatError(f"unknown top-level keys: {sorted(extra)}")
    missing = _TOP_KEYS - set(data) - {"gluings"}
    if missing:
        raise ComplexFormatError(f"missing keys: {sorted(missing)}")
    return build(data["kappa"], data["triangles"], data.get("gluings", []))


def load(path) -> Complex:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ComplexFormatError(f"{path}: invalid JSON ({exc})") from exc
    return from_dict(data)

"""Domains: open face subsets of a complex and their boundary structure."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

from .complex import Complex, LinkGraph
from .errors import ComplexFormatError


@dataclass(frozen=True)
class Domain:
    """Open domain: the interior of the closed union of ``faces``.

    The faces, interior edges and interior vertices belong to the domain;
    boundary cells do not.  Edges lying on the boundary of the whole complex
    count as boundary of the domain.
    """

    faces: frozenset
    label: str = ""

    @classmethod
    def of(cls, faces, label: str = "") -> "Domain":
        return cls(frozenset(int(f) for f in faces), label)

    def to_dict(self) -> dict:
        return {"faces": sorted(self.faces), "label": self.label}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict())
        if path is not None:
            Path(path).write_text(text + "\n", encoding="utf-8")
        return text


def load_domain(path) -> Domain:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    extra = set(data) - {"faces", "label"}
    if extra:
        raise ComplexFormatError(f"unknown domain keys: {sorted(extra)}")
    return Domain.of(data["faces"], data.get("label", ""))


@dataclass
class DomainStructure:
    faces: frozenset
    boundary_edges: list[int]
    interior_edges: list[int]
    boundary_vertices: list[int]
    interior_vertices: list[int]
    on_locus: dict[int, bool]
    sublinks: dict[int, LinkGraph] = field(repr=False)
    chi: int = 0

    def boundary_graph(self, c: Complex) -> dict[int, list[tuple[int, int]]]:
        """Adjacency of boundary vertices along boundary edges: v -> [(edge, w)]."""
        adj = defaultdict(list)
        for e in self.boundary_edges:
            a, b = c.edge_vertices(e)
            adj[a].append((e, b))
            adj[b].append((e, a))
        return adj


def singular_vertices(c: Complex) -> set[int]:
    return set(c.singular_locus().vertices)


def structure(c: Complex, d) -> DomainStructure:
    faces = d.faces if isinstance(d, Domain) else frozenset(d)
    bad = [f for f in faces if not 0 <= f < c.n_faces]
    if bad or not faces:
        raise ValueError(f"invalid domain faces: {sorted(bad) or 'empty'}")
    verts, edges = c.closure_cells(faces)
    bnd_edges, int_edges = [], []
    for e in sorted(edges):
        m = int(c.multiplicity[e])
        k = sum(1 for f, _ in c.edge_slots[e] if f in faces)
        if m == 1 or k < m:
            bnd_edges.append(e)
        else:
            int_edges.append(e)
    bset = set(bnd_edges)
    sing = singular_vertices(c)
    bverts, iverts = [], []
    sublinks = {}
    for v in sorted(verts):
        all_in = all(f in faces for f, _ in c.vertex_corners[v])
        touches = any(int(c.germ_edge[g]) in bset for g in c.vertex_germs[v])
        if all_in and not touches:
            iverts.append(v)
        else:
            bverts.append(v)
            sublinks[v] = c.link(v, faces)
    return DomainStructure(
        faces=frozenset(faces),
        boundary_edges=bnd_edges,
        interior_edges=int_edges,
        boundary_vertices=bverts,
        interior_vertices=iverts,
        on_locus={v: v in sing for v in bverts},
        sublinks=sublinks,
        chi=c.euler_characteristic(faces),
    )

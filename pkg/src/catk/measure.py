"""Curvature measure, boundary turns and Gauss-Bonnet bookkeeping.

The curvature measure of a triangle complex has three parts:

* an atom ``pi*(2 - chi(L)) - len(L)`` at every vertex, ``L`` its link;
* at break points of singular chains, the same atom written as the sum of
  per-fan turns ``pi - theta_i`` (both forms are kept and must agree);
* density ``kappa`` times area on face interiors.

Edge interiors carry nothing because edges are geodesic segments.  Domains
are open: their measure excludes boundary atoms, and the boundary turn
carries all the boundary information, so that for every domain

    omega(D) = 2*pi*chi(D) - turn(boundary of D)

holds exactly up to rounding.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from .complex import Complex, LinkGraph
from .domain import Domain, structure
from .errors import MalformedWings, NotAdmissible, ZeroSector
from .verify import check_admissible, check_cat

PI = math.pi


def link_atom(g: LinkGraph) -> float:
    """pi * (2 - chi) - length, the curvature concentrated at a point with link ``g``."""
    return PI * (2 - g.euler_char) - g.total_length


# --------------------------------------------------------------------------
# the curvature measure
# --------------------------------------------------------------------------


@dataclass
class CurvatureMeasure:
    vertex_atoms: dict[int, float]
    breakpoint_atoms: dict[int, float]
    breakpoint_link_atoms: dict[int, float]
    kappa: float
    face_areas: list[float] = field(repr=False)

    def atom(self, v: int) -> float:
        if v in self.breakpoint_atoms:
            return self.breakpoint_atoms[v]
        return self.vertex_atoms[v]

    def atoms(self) -> dict[int, float]:
        out = dict(self.vertex_atoms)
        out.update(self.breakpoint_atoms)
        return out

    def face_mass(self, faces=None) -> float:
        idx = range(len(self.face_areas)) if faces is None else faces
        return self.kappa * math.fsum(self.face_areas[f] for f in idx)

    def total(self) -> float:
        return math.fsum(list(self.atoms().values()) + [self.face_mass()])

    @property
    def positive_part(self) -> float:
        vals = [a for a in self.atoms().values() if a > 0]
        return math.fsum(vals + [max(self.face_mass(), 0.0)])

    @property
    def negative_part(self) -> float:
        vals = [-a for a in self.atoms().values() if a < 0]
        return math.fsum(vals + [max(-self.face_mass(), 0.0)])

    @property
    def total_variation(self) -> float:
        return self.positive_part + self.negative_part


def fan_turns(c: Complex, v: int) -> list[float]:
    """Per-fan turns ``pi - theta_i`` at a break point."""
    return [PI - a.length for a in c.fan_angles(v)]


def curvature_measure(c: Complex) -> CurvatureMeasure:
    vatoms, batoms, blink = {}, {}, {}
    for v in range(c.n_vertices):
        atom = link_atom(c.vertex_link(v))
        if c.is_break_point(v):
            batoms[v] = math.fsum(fan_turns(c, v))
            blink[v] = atom
        else:
            vatoms[v] = atom
    return CurvatureMeasure(vatoms, batoms, blink, c.kappa.value, [float(a) for a in c.areas])


def measure_of(c: Complex, m: CurvatureMeasure, d, closure: str = "open") -> float:
    """Measure of a domain; ``closure="closed"`` adds the boundary atoms."""
    if closure not in ("open", "closed"):
        raise ValueError(f"closure must be 'open' or 'closed', not {closure!r}")
    st = structure(c, d)
    verts = list(st.interior_vertices)
    if closure == "closed":
        verts += st.boundary_vertices
    return math.fsum([m.atom(v) for v in verts] + [m.face_mass(st.faces)])


# --------------------------------------------------------------------------
# turns
# --------------------------------------------------------------------------


@dataclass
class Turn:
    arcs: list[float]
    cycles: list[float]
    outer_angles: dict[int, float]

    @property
    def total(self) -> float:
        return math.fsum(self.arcs + self.cycles + list(self.outer_angles.values()))

    def to_dict(self) -> dict:
        return {
            "arcs": self.arcs,
            "cycles": self.cycles,
            "outer_angles": sum(self.outer_angles.values()),
            "total": self.total,
        }


def _domain_faces(d):
    return d.faces if isinstance(d, Domain) else frozenset(d)


def sector_angle(c: Complex, d, q: int) -> float:
    """Total angle at ``q`` of the corners belonging to the domain."""
    faces = _domain_faces(d)
    return math.fsum(float(c.angles[f, j]) for f, j in c.vertex_corners[q] if f in faces)


def outer_angle(c: Complex, d, q: int) -> float:
    """pi*(2 - chi) - length of the domain's sub-link at q; pi - theta at a manifold corner."""
    return link_atom(c.link(q, _domain_faces(d)))


def turn_of_polyline(c: Complex, d, arc) -> float:
    """Turn from the domain side of a boundary polyline given as a vertex sequence.

    Sums ``pi - theta`` over interior break points; the end vertices are
    accounted for by outer angles at the domain level.
    """
    total = []
    for q in list(arc)[1:-1]:
        theta = sector_angle(c, d, q)
        if theta <= 0:
            raise ZeroSector(f"domain has a zero sector at vertex {q}")
        total.append(PI - theta)
    return math.fsum(total)


def boundary_turn(c: Complex, d) -> Turn:
    """Turn of the whole domain boundary.

    Boundary vertices on the singular locus contribute outer angles; the
    rest of the boundary splits into arcs (ending on the locus) and closed
    cycles, each accumulating the turns of its vertices.
    """
    st = structure(c, d)
    faces = st.faces
    outer = {v: outer_angle(c, faces, v) for v in st.boundary_vertices if st.on_locus[v]}
    regular = [v for v in st.boundary_vertices if not st.on_locus[v]]
    adj = st.boundary_graph(c)
    seen: set[int] = set()
    arcs, cycles = [], []
    for v0 in regular:
        if v0 in seen:
            continue
        comp, stack, touches_locus = [], [v0], False
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            comp.append(v)
            for _, w in adj.get(v, ()):
                if st.on_locus.get(w, False):
                    touches_locus = True
                elif w not in seen:
                    stack.append(w)
        value = math.fsum(link_atom(st.sublinks[v]) for v in comp)
        if touches_locus or not adj.get(v0):
            arcs.append(value)
        else:
            cycles.append(value)
    return Turn(arcs, cycles, outer)


# --------------------------------------------------------------------------
# Gauss-Bonnet audit
# --------------------------------------------------------------------------


@dataclass
class GaussBonnetReport:
    chi: int
    turn: Turn
    omega_open: float
    n_faces: int

    @property
    def residual(self) -> float:
        return self.omega_open - (2 * PI * self.chi - self.turn.total)

    @property
    def tolerance(self) -> float:
        return 1e-9 * (1 + self.n_faces)

    def to_dict(self) -> dict:
        return {
            "chi": self.chi,
            "turn": self.turn.to_dict(),
            "omega_open": self.omega_open,
            "residual": self.residual,
        }


def gauss_bonnet_report(c: Complex, d, m: CurvatureMeasure | None = None, require_admissible: bool = True) -> GaussBonnetReport:
    if require_admissible:
        adm = check_admissible(c, d)
        if not adm:
            raise NotAdmissible("; ".join(adm.reasons))
    m = m or curvature_measure(c)
    st = structure(c, d)
    return GaussBonnetReport(st.chi, boundary_turn(c, d), measure_of(c, m, d, "open"), len(st.faces))


def gauss_bonnet_residual(c: Complex, d, m: CurvatureMeasure | None = None) -> float:
    """omega(D) - (2*pi*chi(D) - turn(dD)) for an admissible domain."""
    return gauss_bonnet_report(c, d, m).residual


# --------------------------------------------------------------------------
# positive part bound
# --------------------------------------------------------------------------


@dataclass
class PositivePartCheck:
    ok: bool
    face_positive: float
    area_bound: float
    singular_atoms: dict[int, float]
    worst: tuple[int, float] | None
    cat_pass: bool


def positive_part_bound_check(c: Complex, m: CurvatureMeasure, faces=None, tol: float = 1e-9) -> PositivePartCheck:
    """Positive curvature on face interiors is at most |kappa| * area.

    On complexes passing the CAT check the atoms on the singular locus must
    also be non-positive; the worst positive atom is reported either way.
    """
    faces = range(c.n_faces) if faces is None else faces
    faces = set(faces)
    st = structure(c, faces)
    area = c.total_area(faces)
    face_pos = max(m.face_mass(faces), 0.0)
    bound = abs(c.kappa.value) * area
    sing = set(c.singular_locus().vertices)
    atoms = {v: m.atom(v) for v in st.interior_vertices + st.boundary_vertices if v in sing}
    worst = max(atoms.items(), key=lambda kv: kv[1], default=None)
    cat = check_cat(c).passed
    ok = face_pos <= bound + tol
    if cat:
        ok = ok and all(a <= tol for a in atoms.values())
    return PositivePartCheck(ok, face_pos, bound, atoms, worst, cat)


# --------------------------------------------------------------------------
# explicit formula on singular chains with wings
# --------------------------------------------------------------------------


def chain_edges(c: Complex, chain) -> list[int]:
    """Edge classes joining consecutive chain vertices (must be unique and interior)."""
    edges = []
    for a, b in zip(chain[:-1], chain[1:]):
        cand = [e for e in range(c.n_edges) if set(c.edge_vertices(e)) == {a, b} and c.multiplicity[e] >= 2]
        if len(cand) != 1:
            raise MalformedWings(f"chain step {a}->{b} matches {len(cand)} interior edges")
        edges.append(cand[0])
    return edges


def _components(c: Complex, faces: set[int]) -> list[set[int]]:
    by_edge = defaultdict(list)
    for f in faces:
        for s in range(3):
            by_edge[int(c.edge_of_slot[f, s])].append(f)
    comps, seen = [], set()
    for f0 in sorted(faces):
        if f0 in seen:
            continue
        comp, stack = set(), [f0]
        while stack:
            f = stack.pop()
            if f in comp:
                continue
            comp.add(f)
            for s in range(3):
                stack.extend(g for g in by_edge[int(c.edge_of_slot[f, s])] if g not in comp)
        seen |= comp
        comps.append(comp)
    return comps


@dataclass
class ExplicitFormulaAudit:
    lhs: float
    rhs: float
    wing_turns: list[float]
    pocket_turns: list[float]
    pocket_angles: list[float]
    flags: list[str]

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "residual": self.residual, "flags": self.flags}


def _corner_sum(c: Complex, faces, q: int) -> float:
    return math.fsum(float(c.angles[f, j]) for f, j in c.vertex_corners[q] if f in faces)


def explicit_formula_audit(c: Complex, chain, wings) -> ExplicitFormulaAudit:
    """Compare the measure of an open singular chain with its wing decomposition.

    ``chain`` is the vertex sequence p = v_0, ..., v_n = q; ``wings`` is the
    ordered list of face sets R_1..R_m, each a surface having the chain on
    its boundary.  Faces shared by R_k and an earlier wing form pockets.
    The right-hand side is the sum of the wing turns minus, for k >= 3, the
    pocket turns along the chain net of the pocket corner angles at the
    pocket ends.  Pocket ends at p or q are left out and flagged.
    """
    chain = [int(v) for v in chain]
    wings = [set(int(f) for f in w) for w in wings]
    if len(chain) < 2 or len(wings) < 2:
        raise MalformedWings("need a chain of at least one edge and two wings")
    edges = chain_edges(c, chain)
    incident = set()
    for k, w in enumerate(wings):
        for e in edges:
            n = sum(1 for f, _ in c.edge_slots[e] if f in w)
            if n != 1:
                raise MalformedWings(f"wing {k + 1} meets chain edge {e} in {n} faces")
    for e in edges:
        incident |= {f for f, _ in c.edge_slots[e]}
    union = set().union(*wings)
    if not incident <= union:
        raise MalformedWings(f"faces {sorted(incident - union)} along the chain belong to no wing")
    if wings[0] & wings[1]:
        raise MalformedWings("the first two wings must meet only along the chain")

    inner = chain[1:-1]
    lhs = math.fsum(link_atom(c.vertex_link(q)) for q in inner)
    wing_turns = [math.fsum(PI - _corner_sum(c, w, q) for q in inner) for w in wings]

    flags = []
    pocket_turns, pocket_angles = [], []
    edge_index = {e: i for i, e in enumerate(edges)}
    for k in range(2, len(wings)):
        earlier = set().union(*wings[:k])
        shared = wings[k] & earlier
        tau_k, theta_k = [], []
        for comp in _components(c, shared):
            idx = sorted(edge_index[e] for e in edges if any(f in comp for f, _ in c.edge_slots[e]))
            if not idx:
                flags.append(f"wing {k + 1}: pocket {sorted(comp)[:3]} does not touch the chain")
                continue
            if idx != list(range(idx[0], idx[-1] + 1)):
                raise MalformedWings(f"wing {k + 1}: pocket meets the chain in a disconnected set")
            i0, i1 = idx[0], idx[-1] + 1
            tau_k.append(math.fsum(PI - _corner_sum(c, comp, chain[i]) for i in range(i0 + 1, i1)))
            if i0 == 0:
                flags.append(f"wing {k + 1}: pocket starts at p")
            else:
                theta_k.append(_corner_sum(c, comp, chain[i0]))
            if i1 == len(chain) - 1:
                flags.append(f"wing {k + 1}: pocket ends at q")
            else:
                theta_k.append(_corner_sum(c, comp, chain[i1]))
        pocket_turns.append(math.fsum(tau_k))
        pocket_angles.append(math.fsum(theta_k))
    rhs = math.fsum(wing_turns) - math.fsum(t - a for t, a in zip(pocket_turns, pocket_angles))
    return ExplicitFormulaAudit(lhs, rhs, wing_turns, pocket_turns, pocket_angles, flags)


@dataclass
class PairwiseDiagnostic:
    M: float
    ratios: dict[int, float]
    exceeding: list[int]

    @property
    def max_ratio(self) -> float:
        return max(self.ratios.values(), default=0.0)


def pairwise_bound_diagnostic(c: Complex, chain, wings, M: float = 2.0) -> PairwiseDiagnostic:
    """Empirical ratio |atom(q)| / sum_{i<j} |atom of R_i u R_j at q| along a chain.

    Reported, never asserted: the uniform constant is not quantified.
    """
    wings = [set(w) for w in wings]
    ratios = {}
    for q in chain[1:-1]:
        atom = abs(link_atom(c.vertex_link(q)))
        pair = math.fsum(
            abs(link_atom(c.link(q, wings[i] | wings[j])))
            for i in range(len(wings))
            for j in range(i + 1, len(wings))
        )
        ratios[q] = atom / pair if pair > 0 else (0.0 if atom == 0 else math.inf)
    return PairwiseDiagnostic(M, ratios, [q for q, r in ratios.items() if r > M])

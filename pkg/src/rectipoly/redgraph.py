"""Red subgraph of a rectangle-faced polyhedron and the Euler-bound audit.

The red subgraph keeps only edges with a nonrectilinear dihedral angle and
merges chains through red-degree-2 vertices into single arcs. Its rotation
system comes from the vertex stars of the mesh, so face tracing recovers
the embedding the graph inherits from the surface.

Face tracing rule: after arriving at a node along a dart, continue with
the successor (in the node's rotation) of the reversed dart.
"""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .mesh import Edge, Mesh, edge_key, topology
from .ortho import RECTILINEAR_TOL, DihedralClassification, classify_edges, rectangle_check

COLLINEARITY_TOL = 1e-7

# a dart is (arc index, direction); direction 0 runs from arc.start to arc.end
Dart = tuple[int, int]


class CollinearityViolation(RuntimeError):
    pass


class NotRectangleFaced(ValueError):
    pass


@dataclass(frozen=True)
class Arc:
    start: int
    end: int
    vertices: tuple[int, ...]  # mesh vertices along the chain, start..end
    mesh_edges: tuple[Edge, ...]

    @property
    def is_loop(self) -> bool:
        return self.start == self.end


@dataclass(frozen=True)
class RedGraph:
    nodes: tuple[int, ...]
    positions: np.ndarray
    arcs: tuple[Arc, ...]
    rotation: dict[int, tuple[Dart, ...]]
    component_id: int = 0

    def degree(self, node: int) -> int:
        return len(self.rotation[node])

    def degree_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(self.degree(v) for v in self.nodes).items()))

    @property
    def n_mesh_edges(self) -> int:
        return sum(len(a.mesh_edges) for a in self.arcs)


def _dart_origin(arcs, dart: Dart) -> int:
    arc = arcs[dart[0]]
    return arc.start if dart[1] == 0 else arc.end


def _dart_first_edge(arcs, dart: Dart) -> Edge:
    arc = arcs[dart[0]]
    return arc.mesh_edges[0] if dart[1] == 0 else arc.mesh_edges[-1]


def _chain_turn(mesh: Mesh, prev: int, mid: int, nxt: int) -> float:
    a = mesh.vertices[prev] - mesh.vertices[mid]
    b = mesh.vertices[nxt] - mesh.vertices[mid]
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))


def build_red_graph(
    mesh: Mesh,
    cls: DihedralClassification | None = None,
    tol: float = RECTILINEAR_TOL,
    collinearity_tol: float = COLLINEARITY_TOL,
) -> list[RedGraph]:
    """Red subgraph components, with degree-2 chains merged into arcs.

    Raises :class:`CollinearityViolation` when a merged chain bends by more
    than ``collinearity_tol`` at a red-degree-2 vertex.
    """
    if cls is None:
        cls = classify_edges(mesh, tol)
    red = {c.edge for c in cls.red}
    if not red:
        return []
    incident: dict[int, list[Edge]] = {}
    for e in red:
        for v in e:
            incident.setdefault(v, []).append(e)
    deg2 = {v for v, es in incident.items() if len(es) == 2}
    for v in deg2:
        a, b = incident[v]
        u = a[0] if a[1] == v else a[1]
        w = b[0] if b[1] == v else b[1]
        bend = math.pi - _chain_turn(mesh, u, v, w)
        if bend > collinearity_tol:
            raise CollinearityViolation(
                f"red chain bends by {bend:.3e} rad at vertex {v} (edges {a}, {b})"
            )
    nodes = sorted(v for v in incident if v not in deg2)
    if not nodes:
        raise CollinearityViolation("a red cycle consists of degree-2 vertices only")

    arcs: list[Arc] = []
    seen: set[Edge] = set()
    for x in nodes:
        for e in sorted(incident[x], key=lambda e: _star_pos(mesh, x, e)):
            if e in seen:
                continue
            verts = [x]
            edges = []
            cur, edge = x, e
            while True:
                seen.add(edge)
                edges.append(edge)
                nxt = edge[0] if edge[1] == cur else edge[1]
                verts.append(nxt)
                if nxt not in deg2:
                    break
                a, b = incident[nxt]
                edge = b if a == edge else a
                cur = nxt
            arcs.append(Arc(x, verts[-1], tuple(verts), tuple(edges)))

    darts_at: dict[int, list[Dart]] = {v: [] for v in nodes}
    for i, arc in enumerate(arcs):
        darts_at[arc.start].append((i, 0))
        darts_at[arc.end].append((i, 1))
    rotation = {
        v: tuple(sorted(ds, key=lambda d: _star_pos(mesh, v, _dart_first_edge(arcs, d))))
        for v, ds in darts_at.items()
    }

    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for arc in arcs:
        parent[find(arc.start)] = find(arc.end)
    groups: dict[int, list[int]] = {}
    for v in nodes:
        groups.setdefault(find(v), []).append(v)

    graphs = []
    for cid, members in enumerate(sorted(groups.values(), key=min)):
        member_set = set(members)
        keep = [i for i, a in enumerate(arcs) if a.start in member_set]
        remap = {old: new for new, old in enumerate(keep)}
        sub_arcs = tuple(arcs[i] for i in keep)
        sub_rot = {v: tuple((remap[a], d) for a, d in rotation[v]) for v in members}
        graphs.append(
            RedGraph(
                nodes=tuple(members),
                positions=mesh.vertices[members],
                arcs=sub_arcs,
                rotation=sub_rot,
                component_id=cid,
            )
        )
    return graphs


def _star_pos(mesh: Mesh, v: int, e: Edge) -> int:
    for i, (edge, _) in enumerate(mesh.stars[v]):
        if edge == edge_key(*e):
            return i
    raise KeyError(f"edge {e} not at vertex {v}")


@dataclass(frozen=True)
class FacialWalk:
    darts: tuple[Dart, ...]

    def __len__(self) -> int:
        return len(self.darts)


def facial_walks(rg: RedGraph) -> list[FacialWalk]:
    """Trace every face of the embedded graph; each dart is used exactly once."""
    succ: dict[Dart, Dart] = {}
    for v, ds in rg.rotation.items():
        for i, d in enumerate(ds):
            succ[d] = ds[(i + 1) % len(ds)]
    unused = set(succ)
    walks = []
    for start in sorted(succ):
        if start not in unused:
            continue
        walk = []
        d = start
        while d in unused:
            unused.remove(d)
            walk.append(d)
            d = succ[(d[0], 1 - d[1])]
        walks.append(FacialWalk(tuple(walk)))
    return walks


@dataclass(frozen=True)
class BoundStats:
    V_r: int
    E_r: int
    F_r: int
    d: Fraction
    k: int
    chi: int

    @property
    def embedding_chi(self) -> int:
        return self.V_r - self.E_r + self.F_r


def bound_stats(rg: RedGraph, chi: int, walks: list[FacialWalk] | None = None) -> BoundStats:
    walks = facial_walks(rg) if walks is None else walks
    V, E = len(rg.nodes), len(rg.arcs)
    return BoundStats(V, E, len(walks), Fraction(2 * E, V), min(len(w) for w in walks), chi)


@dataclass(frozen=True)
class EulerBound:
    holds: bool
    slack: Fraction


def euler_bound(F: int, d, k: int, chi: int) -> EulerBound:
    """Evaluate ``F * (k - d*(k-2)/2) >= d * chi`` exactly."""
    d = Fraction(d)
    if F < 1 or k < 1 or d <= 0:
        raise ValueError("need F >= 1, k >= 1, d > 0")
    lhs = F * (k - d * (k - 2) / 2)
    rhs = d * chi
    return EulerBound(lhs >= rhs, lhs - rhs)


def min_faces(d, k: int, chi: int) -> int | None:
    """Smallest face count satisfying the bound, or None if no count does."""
    d = Fraction(d)
    factor = k - d * (k - 2) / 2
    rhs = d * chi
    if factor > 0:
        return max(1, math.ceil(rhs / factor))
    if factor == 0:
        return 1 if rhs <= 0 else None
    # factor < 0: holds only for F <= rhs / factor
    return 1 if factor >= rhs else None


class Verdict(enum.Enum):
    CONSISTENT = "Consistent"
    INCONSISTENT = "Inconsistent"
    NO_CONSTRAINT = "NoConstraint"


@dataclass
class ComponentAudit:
    stats: BoundStats
    degree_histogram: dict[int, int]
    walk_length_histogram: dict[int, int]
    bound: EulerBound
    no_degree_1_or_3: bool
    min_degree: int


@dataclass
class AuditReport:
    verdict: Verdict
    genus: int
    components: list[ComponentAudit] = field(default_factory=list)
    offending_edges: list[tuple[Edge, float]] = field(default_factory=list)

    @property
    def red_graph_empty(self) -> bool:
        return not self.components

    @property
    def degree_floor_ok(self) -> bool:
        return all(c.no_degree_1_or_3 and c.min_degree >= 4 for c in self.components)

    @property
    def min_walk_length(self) -> int | None:
        return min((c.stats.k for c in self.components), default=None)


def g01_audit(mesh: Mesh, tol: float = RECTILINEAR_TOL) -> AuditReport:
    """Check a rectangle-faced closed mesh against the genus-0/1 orthogonality result.

    Genus 0 or 1 with any red edge can only come from numerical
    misclassification and is reported as Inconsistent with the offending
    edges. Genus 2 and above carries no constraint.
    """
    rects = rectangle_check(mesh, tol)
    if not rects.all_rectangles:
        raise NotRectangleFaced(f"faces {rects.failures} are not rectangles")
    topo = topology(mesh)
    cls = classify_edges(mesh, tol)
    graphs = build_red_graph(mesh, cls, tol)
    components = []
    for rg in graphs:
        walks = facial_walks(rg)
        stats = bound_stats(rg, topo.chi, walks)
        hist = rg.degree_histogram()
        components.append(
            ComponentAudit(
                stats=stats,
                degree_histogram=hist,
                walk_length_histogram=dict(sorted(Counter(len(w) for w in walks).items())),
                bound=euler_bound(stats.F_r, stats.d, stats.k, topo.chi),
                no_degree_1_or_3=not ({1, 3} & set(hist)),
                min_degree=min(hist),
            )
        )
    if not graphs:
        verdict = Verdict.CONSISTENT
    elif topo.genus <= 1:
        verdict = Verdict.INCONSISTENT
    else:
        verdict = Verdict.NO_CONSTRAINT
    offending = []
    if verdict is Verdict.INCONSISTENT:
        offending = [(c.edge, c.deviation) for c in cls.red]
    return AuditReport(verdict, topo.genus, components, offending)

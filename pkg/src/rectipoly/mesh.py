"""Indexed polyhedral meshes with validation, topology and vertex stars.

A :class:`Mesh` is built once by :func:`build_mesh` and never mutated.
Faces are loops of vertex indices, counterclockwise seen from outside.
Edges are keyed by the sorted vertex pair ``(u, w)`` with ``u < w``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

PLANARITY_TOL = 1e-9


class MeshError(ValueError):
    """Base class for mesh validation failures."""


class NonManifoldEdge(MeshError):
    pass


class BadVertexLink(MeshError):
    pass


class NonPlanarFace(MeshError):
    pass


class DegenerateFace(MeshError):
    pass


class InconsistentOrientation(MeshError):
    pass


class BadFaceContact(MeshError):
    pass


class OpenMesh(MeshError):
    pass


class Mode(enum.Enum):
    CLOSED = "closed"
    OPEN = "open"


Edge = tuple[int, int]


def edge_key(u: int, w: int) -> Edge:
    return (u, w) if u < w else (w, u)


@dataclass(frozen=True)
class TopologyReport:
    V: int
    E: int
    F: int
    chi: int
    genus: int

    def as_dict(self) -> dict:
        return {"V": self.V, "E": self.E, "F": self.F, "chi": self.chi, "genus": self.genus}


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray
    faces: tuple[tuple[int, ...], ...]
    closed: bool
    edges: tuple[Edge, ...]
    edge_faces: dict[Edge, tuple[int, ...]]
    # directed (u, w) -> face that traverses u -> w
    halfedge_face: dict[Edge, int]
    stars: tuple[tuple[tuple[Edge, int], ...], ...]
    _edge_index: dict[Edge, int] = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def edge_index(self, edge: Edge) -> int:
        return self._edge_index[edge_key(*edge)]

    def face_points(self, f: int) -> np.ndarray:
        return self.vertices[list(self.faces[f])]

    def face_normal(self, f: int) -> np.ndarray:
        return _newell_normal(self.face_points(f))

    def vertex_degree(self, v: int) -> int:
        return len(self.stars[v])

    def scale(self) -> float:
        """Bounding-box diagonal, used to make tolerances relative."""
        span = self.vertices.max(axis=0) - self.vertices.min(axis=0)
        return float(np.linalg.norm(span)) or 1.0


def _newell_normal(pts: np.ndarray) -> np.ndarray:
    nxt = np.roll(pts, -1, axis=0)
    n = np.array(
        [
            np.sum((pts[:, 1] - nxt[:, 1]) * (pts[:, 2] + nxt[:, 2])),
            np.sum((pts[:, 2] - nxt[:, 2]) * (pts[:, 0] + nxt[:, 0])),
            np.sum((pts[:, 0] - nxt[:, 0]) * (pts[:, 1] + nxt[:, 1])),
        ]
    )
    norm = np.linalg.norm(n)
    if norm == 0.0:
        return n
    return n / norm


def face_frame(pts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal frame (origin, x, y, normal) with x along the first side."""
    n = _newell_normal(pts)
    x = pts[1] - pts[0]
    x = x - np.dot(x, n) * n
    x /= np.linalg.norm(x)
    y = np.cross(n, x)
    return pts[0], x, y, n


def to_plane(pts: np.ndarray) -> np.ndarray:
    origin, x, y, _ = face_frame(pts)
    rel = pts - origin
    return np.column_stack([rel @ x, rel @ y])


def _segments_intersect(p1, p2, q1, q2, eps) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return (
            min(a[0], b[0]) - eps <= c[0] <= max(a[0], b[0]) + eps
            and min(a[1], b[1]) - eps <= c[1] <= max(a[1], b[1]) + eps
        )

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True
    if abs(d1) <= eps and on_seg(q1, q2, p1):
        return True
    if abs(d2) <= eps and on_seg(q1, q2, p2):
        return True
    if abs(d3) <= eps and on_seg(p1, p2, q1):
        return True
    if abs(d4) <= eps and on_seg(p1, p2, q2):
        return True
    return False


def _check_face(f: int, loop: Sequence[int], pts: np.ndarray, planarity_tol: float) -> None:
    if len(loop) < 3 or len(set(loop)) != len(loop):
        raise DegenerateFace(f"face {f}: needs >= 3 distinct vertices, got {list(loop)}")
    diam = max(np.linalg.norm(a - b) for a, b in itertools.combinations(pts, 2))
    if diam == 0.0:
        raise DegenerateFace(f"face {f}: zero size")
    centered = pts - pts.mean(axis=0)
    normal = np.linalg.svd(centered)[2][-1]
    dev = float(np.max(np.abs(centered @ normal)))
    if dev > planarity_tol * diam:
        raise NonPlanarFace(f"face {f}: {dev:.3e} from best-fit plane (diameter {diam:.3e})")
    area = 0.5 * float(np.linalg.norm(np.cross(centered, np.roll(centered, -1, axis=0)).sum(axis=0)))
    if area <= 1e-12 * diam * diam:
        raise DegenerateFace(f"face {f}: zero area")
    flat = to_plane(pts)
    k = len(loop)
    eps = 1e-12 * diam * diam
    for i in range(k):
        for j in range(i + 1, k):
            if j == i + 1 or (i == 0 and j == k - 1):
                continue
            if _segments_intersect(flat[i], flat[(i + 1) % k], flat[j], flat[(j + 1) % k], eps):
                raise DegenerateFace(f"face {f}: self-intersecting boundary")


def build_mesh(
    vertices,
    faces: Sequence[Sequence[int]],
    mode: Mode | str = Mode.CLOSED,
    planarity_tol: float = PLANARITY_TOL,
) -> Mesh:
    """Validate a vertex/face description and return an immutable :class:`Mesh`.

    In closed mode every edge must have two oppositely oriented faces, every
    vertex link must be a single cycle and the enclosed volume must be
    positive (faces counterclockwise from outside). Open mode relaxes the
    edge and link rules to allow boundary edges and fan-shaped stars.
    """
    mode = Mode(mode)
    verts = np.array(vertices, dtype=float).reshape(-1, 3)
    if not np.all(np.isfinite(verts)):
        raise MeshError("vertex coordinates must be finite")
    loops = tuple(tuple(int(i) for i in face) for face in faces)
    if not loops:
        raise MeshError("mesh needs at least one face")
    nv = len(verts)
    for f, loop in enumerate(loops):
        for i in loop:
            if not 0 <= i < nv:
                raise MeshError(f"face {f}: vertex index {i} out of range")
        _check_face(f, loop, verts[list(loop)], planarity_tol)

    halfedge_face: dict[Edge, int] = {}
    edge_faces: dict[Edge, list[int]] = {}
    for f, loop in enumerate(loops):
        for u, w in zip(loop, loop[1:] + loop[:1]):
            if (u, w) in halfedge_face:
                raise InconsistentOrientation(
                    f"directed edge {u}->{w} used by faces {halfedge_face[(u, w)]} and {f}"
                )
            halfedge_face[(u, w)] = f
            edge_faces.setdefault(edge_key(u, w), []).append(f)

    for e, fs in edge_faces.items():
        if len(fs) > 2:
            raise NonManifoldEdge(f"edge {e} has {len(fs)} faces")
        if mode is Mode.CLOSED and len(fs) != 2:
            raise NonManifoldEdge(f"edge {e} has {len(fs)} face(s); closed mesh needs 2")

    _check_face_contacts(loops, nv)

    used = np.zeros(nv, dtype=bool)
    for loop in loops:
        used[list(loop)] = True
    if not used.all():
        raise BadVertexLink(f"vertex {int(np.argmin(used))} is not used by any face")

    stars = tuple(_vertex_star(v, loops, halfedge_face, mode) for v in range(nv))

    if mode is Mode.CLOSED:
        vol = _signed_volume(verts, loops)
        if vol <= 0.0:
            raise InconsistentOrientation(f"faces point inward (signed volume {vol:.6g})")

    edges = tuple(sorted(edge_faces))
    return Mesh(
        vertices=_frozen(verts),
        faces=loops,
        closed=mode is Mode.CLOSED,
        edges=edges,
        edge_faces={e: tuple(edge_faces[e]) for e in edges},
        halfedge_face=halfedge_face,
        stars=stars,
        _edge_index={e: i for i, e in enumerate(edges)},
    )


def _frozen(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    a.setflags(write=False)
    return a


def _check_face_contacts(loops, nv) -> None:
    # Two faces may share nothing, one vertex, or one full edge.
    vertex_faces: list[list[int]] = [[] for _ in range(nv)]
    for f, loop in enumerate(loops):
        for v in loop:
            vertex_faces[v].append(f)
    shared: dict[tuple[int, int], set[int]] = {}
    for v, fs in enumerate(vertex_faces):
        for a, b in itertools.combinations(sorted(fs), 2):
            shared.setdefault((a, b), set()).add(v)
    for (a, b), vs in shared.items():
        if len(vs) == 1:
            continue
        if len(vs) == 2:
            u, w = sorted(vs)
            if _is_side(loops[a], u, w) and _is_side(loops[b], u, w):
                continue
        raise BadFaceContact(f"faces {a} and {b} share vertices {sorted(vs)} but not a single edge")


def _is_side(loop, u, w) -> bool:
    k = len(loop)
    i = loop.index(u)
    return loop[(i + 1) % k] == w or loop[i - 1] == w


def _vertex_star(v, loops, halfedge_face, mode) -> tuple[tuple[Edge, int], ...]:
    # Successor map around v: edge v-u -> edge v-w through the face (.., u, v, w, ..).
    succ: dict[int, tuple[int, int]] = {}
    for (u, x), f in halfedge_face.items():
        if x != v:
            continue
        loop = loops[f]
        i = loop.index(v)
        w = loop[(i + 1) % len(loop)]
        succ[u] = (w, f)
    if not succ:
        return ()
    targets = {w for w, _ in succ.values()}
    starts = [u for u in succ if u not in targets]
    if mode is Mode.CLOSED or not starts:
        if starts:
            raise BadVertexLink(f"vertex {v}: link is not closed")
        start = min(succ)
    else:
        if len(starts) != 1:
            raise BadVertexLink(f"vertex {v}: link splits into {len(starts)} pieces")
        start = starts[0]
    star = []
    u = start
    seen = set()
    while u in succ and u not in seen:
        seen.add(u)
        w, f = succ[u]
        star.append((edge_key(v, u), f))
        u = w
    if len(seen) != len(succ):
        raise BadVertexLink(f"vertex {v}: link is not a single cycle")
    if u not in succ:
        # open fan: the last edge has no face after it
        star.append((edge_key(v, u), -1))
    return tuple(star)


def _signed_volume(verts, loops) -> float:
    vol = 0.0
    for loop in loops:
        p0 = verts[loop[0]]
        for a, b in zip(loop[1:-1], loop[2:]):
            vol += float(np.dot(p0, np.cross(verts[a], verts[b])))
    return vol / 6.0


def vertex_star(mesh: Mesh, v: int) -> tuple[tuple[Edge, int], ...]:
    """Cyclic list of ``(edge, face)`` around ``v``.

    ``face`` lies between this edge and the next one. For the boundary
    vertex of an open fan the last entry carries face ``-1``.
    """
    if not 0 <= v < mesh.n_vertices:
        raise IndexError(f"vertex {v} out of range")
    return mesh.stars[v]


def topology(mesh: Mesh) -> TopologyReport:
    if not mesh.closed:
        raise OpenMesh("topology requires a closed mesh")
    V, E, F = mesh.n_vertices, mesh.n_edges, mesh.n_faces
    chi = V - E + F
    return TopologyReport(V=V, E=E, F=F, chi=chi, genus=(2 - chi) // 2)

"""Dihedral angles, red/green edge colouring and rectangle-face checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .mesh import Edge, Mesh, MeshError, edge_key

RECTILINEAR_TOL = 1e-9
HALF_PI = math.pi / 2


class Color(enum.Enum):
    RED = "red"
    GREEN = "green"


@dataclass(frozen=True)
class EdgeClass:
    edge: Edge
    angle: float
    color: Color
    nearest_k: int
    deviation: float

    @property
    def folded(self) -> float:
        return folded_angle(self.angle)


@dataclass(frozen=True)
class DihedralClassification:
    edges: tuple[EdgeClass, ...]
    tol: float

    def __getitem__(self, edge: Edge) -> EdgeClass:
        return self._by_edge[edge_key(*edge)]

    @cached_property
    def _by_edge(self) -> dict[Edge, EdgeClass]:
        return {c.edge: c for c in self.edges}

    @property
    def red(self) -> tuple[EdgeClass, ...]:
        return tuple(c for c in self.edges if c.color is Color.RED)

    @property
    def green(self) -> tuple[EdgeClass, ...]:
        return tuple(c for c in self.edges if c.color is Color.GREEN)


def dihedral_angle(mesh: Mesh, edge: Edge) -> float:
    """Interior dihedral angle at ``edge``, in (0, 2*pi).

    Measured through the solid: below pi for convex edges, above pi for
    reflex ones. Works on open meshes for edges with two faces.
    """
    u, w = edge_key(*edge)
    f1 = mesh.halfedge_face.get((u, w))
    f2 = mesh.halfedge_face.get((w, u))
    if f1 is None or f2 is None:
        raise MeshError(f"edge {edge} is a boundary edge")
    t = mesh.vertices[w] - mesh.vertices[u]
    t = t / np.linalg.norm(t)
    n1 = mesh.face_normal(f1)
    n2 = mesh.face_normal(f2)
    # in-plane directions pointing from the edge into each face
    u1 = np.cross(n1, t)
    u2 = np.cross(n2, -t)
    theta = math.atan2(float(np.dot(-n1, u2)), float(np.dot(u1, u2)))
    return theta % (2 * math.pi)


def folded_angle(theta: float) -> float:
    """Acute angle between the two face planes, in [0, pi/2].

    Invariant under theta -> 2*pi - theta and theta -> pi - theta.
    """
    r = theta % math.pi
    return min(r, math.pi - r)


def rectilinear_deviation(theta: float) -> tuple[int, float]:
    k = round(theta / HALF_PI)
    return k, abs(theta - k * HALF_PI)


def is_rectilinear(theta: float, tol: float = RECTILINEAR_TOL) -> bool:
    return rectilinear_deviation(theta)[1] <= tol


def classify_edges(mesh: Mesh, tol: float = RECTILINEAR_TOL) -> DihedralClassification:
    out = []
    for e in mesh.edges:
        if len(mesh.edge_faces[e]) != 2:
            continue
        theta = dihedral_angle(mesh, e)
        k, dev = rectilinear_deviation(theta)
        out.append(EdgeClass(e, theta, Color.GREEN if dev <= tol else Color.RED, k, dev))
    return DihedralClassification(tuple(out), tol)


@dataclass(frozen=True)
class RectangleVerdict:
    face: int
    is_rectangle: bool
    side_lengths: tuple[float, float] | None = None
    reason: str = ""


@dataclass(frozen=True)
class RectangleInventory:
    verdicts: tuple[RectangleVerdict, ...]
    # (long side, short side) -> face count
    inventory: dict[tuple[float, float], int]

    @property
    def all_rectangles(self) -> bool:
        return all(v.is_rectangle for v in self.verdicts)

    @property
    def failures(self) -> list[int]:
        return [v.face for v in self.verdicts if not v.is_rectangle]


def vector_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Unsigned angle between two 3-vectors, accurate near 0 and pi."""
    return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))


def _face_rectangle(mesh: Mesh, f: int, tol: float) -> RectangleVerdict:
    pts = mesh.face_points(f)
    k = len(pts)
    # straight-angle vertices (T-junctions on a side) are not corners
    corners = []
    for i in range(k):
        if vector_angle(pts[i - 1] - pts[i], pts[(i + 1) % k] - pts[i]) < math.pi - tol:
            corners.append(i)
    if len(corners) != 4:
        return RectangleVerdict(f, False, reason=f"{len(corners)} corners")
    c = pts[corners]
    sides = [c[(i + 1) % 4] - c[i] for i in range(4)]
    lengths = [float(np.linalg.norm(s)) for s in sides]
    for i in range(4):
        if abs(vector_angle(-sides[i - 1], sides[i]) - HALF_PI) > tol:
            return RectangleVerdict(f, False, reason="corner is not a right angle")
    scale = max(lengths)
    if abs(lengths[0] - lengths[2]) > tol * scale or abs(lengths[1] - lengths[3]) > tol * scale:
        return RectangleVerdict(f, False, reason="opposite sides differ")
    a = (lengths[0] + lengths[2]) / 2
    b = (lengths[1] + lengths[3]) / 2
    return RectangleVerdict(f, True, (max(a, b), min(a, b)))


def rectangle_check(mesh: Mesh, tol: float = RECTILINEAR_TOL) -> RectangleInventory:
    """Test every face for being a rectangle and bucket the side pairs.

    Side pairs are reported as (long, short) and grouped when both lengths
    agree within ``tol`` relative to the longer side.
    """
    verdicts = tuple(_face_rectangle(mesh, f, tol) for f in range(mesh.n_faces))
    buckets: list[list] = []
    for v in verdicts:
        if not v.is_rectangle:
            continue
        a, b = v.side_lengths
        for bucket in buckets:
            a0, b0 = bucket[0]
            if abs(a - a0) <= tol * max(1.0, a0) and abs(b - b0) <= tol * max(1.0, b0):
                bucket[1] += 1
                break
        else:
            buckets.append([(a, b), 1])
    inventory = {key: n for key, n in sorted(buckets, key=lambda kv: (-kv[0][0], -kv[0][1]))}
    return RectangleInventory(verdicts, inventory)


@dataclass(frozen=True)
class Certificate:
    passed: bool
    red_edges: tuple[Edge, ...]

    @property
    def status(self) -> str:
        return "Pass" if self.passed else "Fail"


def orthogonality_certificate(mesh: Mesh, tol: float = RECTILINEAR_TOL) -> Certificate:
    if not mesh.closed:
        raise MeshError("orthogonality certificate requires a closed mesh")
    red = tuple(c.edge for c in classify_edges(mesh, tol).red)
    return Certificate(not red, red)


def dihedral_histogram(cls: DihedralClassification, bucket: float = 1e-6) -> list[dict]:
    """Group folded angles into buckets of width ``bucket`` radians."""
    groups: dict[int, list[EdgeClass]] = {}
    for c in cls.edges:
        groups.setdefault(round(c.folded / bucket), []).append(c)
    rows = []
    for key in sorted(groups):
        members = groups[key]
        value = sum(c.folded for c in members) / len(members)
        rows.append(
            {
                "folded_rad": value,
                "folded_deg": math.degrees(value),
                "count": len(members),
                "color": members[0].color.value,
            }
        )
    return rows

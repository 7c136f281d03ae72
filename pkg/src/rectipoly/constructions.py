"""Closed-form constructions: control solids, the octopus and vertex-star gadgets."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, MeshError, Mode, _newell_normal, build_mesh
from .ortho import RECTILINEAR_TOL, rectangle_check
from .sphere import SphericalLink, realize_pattern


class ConstructionSelfCheck(RuntimeError):
    pass


class UnrealizablePattern(RuntimeError):
    pass


def _orient(loop: list[int], pts: np.ndarray, outward: np.ndarray) -> tuple[int, ...]:
    """Order ``loop`` so its normal agrees with ``outward``."""
    n = _newell_normal(pts[loop])
    return tuple(loop if np.dot(n, outward) > 0 else loop[::-1])


def _around(loop: list[int], pts: np.ndarray, axis: np.ndarray) -> list[int]:
    # sort a convex loop by angle around its centroid, counterclockwise about axis
    c = pts[loop].mean(axis=0)
    ref = pts[loop[0]] - c
    ref2 = np.cross(axis, ref)
    return sorted(loop, key=lambda i: math.atan2(np.dot(pts[i] - c, ref2), np.dot(pts[i] - c, ref)))


def _finish(vertices, faces, name: str, tol: float = RECTILINEAR_TOL) -> Mesh:
    try:
        mesh = build_mesh(vertices, faces, Mode.CLOSED)
    except MeshError as exc:
        raise ConstructionSelfCheck(f"{name}: {exc}") from exc
    bad = rectangle_check(mesh, tol).failures
    if bad:
        raise ConstructionSelfCheck(f"{name}: faces {bad} are not rectangles")
    return mesh


def make_cube(a: float = 1.0) -> Mesh:
    if not a > 0:
        raise ValueError("cube side must be positive")
    verts = [(x, y, z) for x in (0.0, a) for y in (0.0, a) for z in (0.0, a)]
    faces = [
        (0, 1, 3, 2),  # x = 0
        (4, 6, 7, 5),  # x = a
        (0, 4, 5, 1),  # y = 0
        (2, 3, 7, 6),  # y = a
        (0, 2, 6, 4),  # z = 0
        (1, 5, 7, 3),  # z = a
    ]
    return _finish(verts, faces, "cube")


def make_box(sx: float, sy: float, sz: float) -> Mesh:
    """Axis-aligned cuboid with one corner at the origin."""
    verts = np.array(make_cube(1.0).vertices) * np.array([sx, sy, sz])
    return _finish(verts, make_cube(1.0).faces, "box")


def make_frame_torus(outer: float = 3.0, hole: float = 1.0, height: float = 1.0) -> Mesh:
    """Square slab with a centred square hole; genus one, every face a rectangle.

    Each annulus is cut pinwheel-fashion into four rectangles. A pinwheel
    piece carries the neighbouring piece's corner as a straight-angle
    vertex on one of its sides, so every edge has exactly two faces.
    """
    if not 0 < hole < outer or not height > 0:
        raise ValueError("need 0 < hole < outer and height > 0")
    m = (outer - hole) / 2
    n = m + hole
    plan = [
        (0, 0), (outer, 0), (outer, outer), (0, outer),  # outer corners
        (m, m), (n, m), (n, n), (m, n),  # hole corners
        (n, 0), (outer, n), (m, outer), (0, m),  # pinwheel cut ends
    ]
    k = len(plan)
    verts = [(x, y, height) for x, y in plan] + [(x, y, 0.0) for x, y in plan]
    pts = np.array(verts)
    pieces = [(0, n, 0, m), (n, outer, 0, n), (m, outer, n, outer), (0, m, m, outer)]
    faces = []
    up = np.array([0.0, 0.0, 1.0])
    for x0, x1, y0, y1 in pieces:
        on = [
            i
            for i, (x, y) in enumerate(plan)
            if x0 <= x <= x1 and y0 <= y <= y1 and (x in (x0, x1) or y in (y0, y1))
        ]
        loop = _around(on, pts, up)
        faces.append(_orient(loop, pts, up))
        bottom = [i + k for i in loop]
        faces.append(_orient(bottom, pts, -up))
    centre = np.array([outer / 2, outer / 2, height / 2])

    def walls(ring: list[int], inward: bool) -> None:
        for a, b in zip(ring, ring[1:] + ring[:1]):
            loop = [a, b, b + k, a + k]
            mid = pts[loop].mean(axis=0)
            out = mid - centre
            out[2] = 0.0
            faces.append(_orient(loop, pts, -out if inward else out))

    walls([0, 8, 1, 9, 2, 10, 3, 11], inward=False)
    walls([4, 5, 6, 7], inward=True)
    return _finish(verts, faces, "frame-torus")


@dataclass(frozen=True)
class OctopusParams:
    L: float = 3.0

    def __post_init__(self):
        if not self.L > math.sqrt(2):
            raise ValueError("prism length must exceed sqrt(2)")

    @property
    def h(self) -> float:
        """Distance from the origin to each square's plane."""
        return 0.5 + self.L / math.sqrt(2)


# cluster order: +x, -x, +y, -y, +z, -z
_CLUSTERS = [(axis, sign) for axis in range(3) for sign in (1, -1)]


def _octopus_clusters(params: OctopusParams):
    h = params.h
    verts = []
    corners = {}
    apex = {}
    for c, (axis, sign) in enumerate(_CLUSTERS):
        b, d = [i for i in range(3) if i != axis]
        for sb, sd in itertools.product((-1, 1), repeat=2):
            p = [0.0, 0.0, 0.0]
            p[axis] = sign * h
            p[b] = sb * 0.5
            p[d] = sd * 0.5
            corners[(c, sb, sd)] = len(verts)
            verts.append(tuple(p))
        p = [0.0, 0.0, 0.0]
        p[axis] = sign * (h - 0.5)
        apex[c] = len(verts)
        verts.append(tuple(p))
    return verts, corners, apex


def _corner_toward(corners, c: int, other_axis: int, other_sign: int, free: int) -> int:
    # corner of cluster c on its side facing +/- other_axis, with the free axis at sign `free`
    axis, _ = _CLUSTERS[c]
    b, d = [i for i in range(3) if i != axis]
    if other_axis == b:
        return corners[(c, other_sign, free)]
    return corners[(c, free, other_sign)]


def _octopus_faces(params: OctopusParams, squares: bool):
    verts, corners, apex = _octopus_clusters(params)
    pts = np.array(verts)
    faces = []
    if squares:
        for c, (axis, sign) in enumerate(_CLUSTERS):
            loop = [corners[(c, sb, sd)] for sb, sd in ((-1, -1), (1, -1), (1, 1), (-1, 1))]
            out = np.zeros(3)
            out[axis] = sign
            faces.append(_orient(loop, pts, out))
    for c1, c2 in itertools.combinations(range(6), 2):
        (a1, s1), (a2, s2) = _CLUSTERS[c1], _CLUSTERS[c2]
        if a1 == a2:
            continue
        free = 3 - a1 - a2
        A = [_corner_toward(corners, c1, a2, s2, f) for f in (-1, 1)]
        B = [_corner_toward(corners, c2, a1, s1, f) for f in (-1, 1)]
        prism = A + B + [apex[c1], apex[c2]]
        inside = pts[prism].mean(axis=0)
        for loop in ([A[0], A[1], B[1], B[0]], [A[0], apex[c1], apex[c2], B[0]], [A[1], apex[c1], apex[c2], B[1]]):
            faces.append(_orient(loop, pts, pts[loop].mean(axis=0) - inside))
    return verts, faces, corners


def make_octopus(params: OctopusParams | None = None) -> Mesh:
    """Genus-7 polyhedron of 42 rectangles with no rectilinear dihedral angle.

    Six unit squares sit on the octahedron's axes at distance ``h``; below
    each square an apex at depth 1/2 closes a square pyramid, and each
    octahedron edge becomes a right triangular prism of length ``L``
    joining two pyramids.
    """
    params = params or OctopusParams()
    verts, faces, _ = _octopus_faces(params, squares=True)
    return _finish(verts, faces, "octopus")


def make_octopus_cubes(params: OctopusParams | None = None) -> Mesh:
    """Octopus with every square replaced by the five outer faces of a unit cube."""
    params = params or OctopusParams()
    verts, faces, corners = _octopus_faces(params, squares=False)
    verts = list(verts)
    for c, (axis, sign) in enumerate(_CLUSTERS):
        out = np.zeros(3)
        out[axis] = sign
        base = [corners[(c, sb, sd)] for sb, sd in ((-1, -1), (1, -1), (1, 1), (-1, 1))]
        top = []
        for i in base:
            top.append(len(verts))
            verts.append(tuple(np.array(verts[i]) + out))
        arr = np.array(verts)
        cube_centre = arr[base + top].mean(axis=0)
        faces.append(_orient(top, arr, out))
        for j in range(4):
            loop = [base[j], base[(j + 1) % 4], top[(j + 1) % 4], top[j]]
            faces.append(_orient(loop, arr, arr[loop].mean(axis=0) - cube_centre))
    return _finish(verts, faces, "octopus-cubes")


@dataclass(frozen=True)
class StarGadgetSpec:
    pattern: str
    edge_length: float = 1.0

    def __post_init__(self):
        if len(self.pattern) < 3 or set(self.pattern.lower()) - {"r", "g"}:
            raise ValueError(f"pattern must be >= 3 letters over r/g, got {self.pattern!r}")
        if not self.edge_length > 0:
            raise ValueError("edge length must be positive")


def star_fan(link: SphericalLink, edge_length: float = 1.0) -> Mesh:
    """Open fan of squares around the origin, one per link side."""
    p = np.asarray(link.points)
    n = len(p)
    verts = [np.zeros(3)]
    verts += [edge_length * p[i] for i in range(n)]
    verts += [edge_length * (p[i] + p[(i + 1) % n]) for i in range(n)]
    faces = []
    for i in range(n):
        j = (i + 1) % n
        # counterclockwise from outside keeps the star order equal to the link order
        faces.append((0, 1 + j, 1 + n + i, 1 + i))
    return build_mesh(verts, faces, Mode.OPEN)


def make_star_gadget(spec: StarGadgetSpec, seed=None, max_tries: int = 1000) -> tuple[Mesh, SphericalLink]:
    """Fan of squares whose centre vertex shows the requested red/green pattern."""
    link = realize_pattern(spec.pattern, seed, max_tries=max_tries)
    if link is None:
        raise UnrealizablePattern(
            f"pattern {spec.pattern!r} not realized in {max_tries} attempts"
        )
    return star_fan(link, spec.edge_length), link


def octahedral_rotations() -> list[np.ndarray]:
    """The 24 signed permutation matrices with determinant +1."""
    out = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((-1, 1), repeat=3):
            m = np.zeros((3, 3))
            for r, (c, s) in enumerate(zip(perm, signs)):
                m[r, c] = s
            if round(np.linalg.det(m)) == 1:
                out.append(m)
    return out

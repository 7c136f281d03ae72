"""Edge unfolding into planar nets, overlap classification, refolding and SVG output.

A net keeps every face as a panel placed isometrically in the plane. The
fold edges form a spanning tree of the face-adjacency graph; every other
edge is cut and shows up twice on the net boundary under one gluing label.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np
from shapely.geometry import Polygon

from .mesh import Edge, Mesh, Mode, OpenMesh, build_mesh, edge_key, to_plane
from .ortho import dihedral_angle

OVERLAP_TOL = 1e-9
MM_PER_UNIT = 20.0


class FoldMismatch(RuntimeError):
    pass


class Strategy(enum.Enum):
    BREADTH_FIRST = "bfs"
    DEPTH_FIRST = "dfs"
    STEEPEST_NORMAL = "steepest"


class OverlapKind(enum.Enum):
    SIMPLE = "Simple"
    TOUCHING = "Touching"
    OVERLAPPING = "Overlapping"


@dataclass(frozen=True, eq=False)
class Panel:
    face: int
    vertices: tuple[int, ...]
    coords: np.ndarray

    def point(self, v: int) -> np.ndarray:
        return self.coords[self.vertices.index(v)]


@dataclass(frozen=True)
class Fold:
    edge: Edge
    parent: int
    child: int


@dataclass(frozen=True)
class Cut:
    edge: Edge
    faces: tuple[int, int]
    label: int


@dataclass(frozen=True, eq=False)
class Net:
    panels: dict[int, Panel]
    folds: tuple[Fold, ...]
    cuts: tuple[Cut, ...]
    root: int
    strategy: str = ""

    def bounds(self) -> tuple[float, float, float, float]:
        allpts = np.vstack([p.coords for p in self.panels.values()])
        lo, hi = allpts.min(axis=0), allpts.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def scale(self) -> float:
        x0, y0, x1, y1 = self.bounds()
        return math.hypot(x1 - x0, y1 - y0) or 1.0


def _local_coords(mesh: Mesh) -> list[np.ndarray]:
    return [to_plane(mesh.face_points(f)) for f in range(mesh.n_faces)]


def _place(local: np.ndarray, loop, u: int, w: int, pu: np.ndarray, pw: np.ndarray) -> np.ndarray:
    """Rigidly move ``local`` so its vertices u, w land on pu, pw."""
    lu = local[loop.index(u)]
    lw = local[loop.index(w)]
    src = lw - lu
    dst = pw - pu
    ang = math.atan2(dst[1], dst[0]) - math.atan2(src[1], src[0])
    c, s = math.cos(ang), math.sin(ang)
    rot = np.array([[c, -s], [s, c]])
    return (local - lu) @ rot.T + pu


def _neighbours(mesh: Mesh, f: int):
    loop = mesh.faces[f]
    for u, w in zip(loop, loop[1:] + loop[:1]):
        e = edge_key(u, w)
        g = mesh.halfedge_face.get((w, u))
        if g is not None:
            yield e, g


def unfold(mesh: Mesh, root_face: int = 0, strategy: Strategy | str = Strategy.BREADTH_FIRST) -> Net:
    """Cut ``mesh`` along the complement of a face spanning tree and flatten it.

    The result is always one connected piece; whether it is free of
    overlaps is reported separately by :func:`overlap_status`.
    """
    if not mesh.closed:
        raise OpenMesh("unfolding requires a closed mesh")
    strategy = Strategy(strategy)
    if not 0 <= root_face < mesh.n_faces:
        raise IndexError(f"root face {root_face} out of range")
    local = _local_coords(mesh)
    placed: dict[int, np.ndarray] = {root_face: local[root_face]}
    folds: list[Fold] = []

    def attach(f: int, e: Edge, g: int) -> None:
        loop_f = mesh.faces[f]
        pf = placed[f]
        u, w = e
        placed[g] = _place(local[g], mesh.faces[g], u, w, pf[loop_f.index(u)], pf[loop_f.index(w)])
        folds.append(Fold(e, f, g))

    if strategy is Strategy.BREADTH_FIRST:
        queue = deque([root_face])
        while queue:
            f = queue.popleft()
            for e, g in _neighbours(mesh, f):
                if g not in placed:
                    attach(f, e, g)
                    queue.append(g)
    elif strategy is Strategy.DEPTH_FIRST:
        stack = [(root_face, _neighbours(mesh, root_face))]
        while stack:
            f, it = stack[-1]
            for e, g in it:
                if g not in placed:
                    attach(f, e, g)
                    stack.append((g, _neighbours(mesh, g)))
                    break
            else:
                stack.pop()
    else:
        _steepest(mesh, local, placed, folds)

    tree = {fold.edge for fold in folds}
    cuts = []
    for e in mesh.edges:
        if e not in tree:
            f1, f2 = mesh.edge_faces[e]
            cuts.append(Cut(e, (f1, f2), len(cuts) + 1))
    panels = {
        f: Panel(f, mesh.faces[f], _frozen(placed[f])) for f in range(mesh.n_faces)
    }
    return Net(panels, tuple(folds), tuple(cuts), root_face, strategy.value)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _steepest(mesh: Mesh, local, placed: dict, folds: list) -> None:
    # Greedy growth: attach the candidate whose centre lands farthest from
    # the centre of the current bounding box.
    while len(placed) < mesh.n_faces:
        allpts = np.vstack(list(placed.values()))
        centre = (allpts.min(axis=0) + allpts.max(axis=0)) / 2
        best = None
        for f in sorted(placed):
            loop_f = mesh.faces[f]
            for e, g in _neighbours(mesh, f):
                if g in placed:
                    continue
                u, w = e
                coords = _place(local[g], mesh.faces[g], u, w, placed[f][loop_f.index(u)], placed[f][loop_f.index(w)])
                score = float(np.linalg.norm(coords.mean(axis=0) - centre))
                key = (-score, g, e)
                if best is None or key < best[0]:
                    best = (key, f, e, g, coords)
        _, f, e, g, coords = best
        placed[g] = coords
        folds.append(Fold(e, f, g))


def unfold_summary(mesh: Mesh, net: Net) -> dict:
    """Counts for the cut graph; ``cut_excess`` equals twice the genus."""
    return {
        "panels": len(net.panels),
        "folds": len(net.folds),
        "cuts": len(net.cuts),
        "cut_excess": len(net.cuts) - (mesh.n_vertices - 1),
    }


@dataclass(frozen=True)
class OverlapStatus:
    kind: OverlapKind
    overlapping: tuple[tuple[int, int], ...] = ()
    touching: tuple[tuple[int, int], ...] = ()

    @property
    def name(self) -> str:
        return self.kind.value


def _net_vertex_ids(net: Net) -> dict[tuple[int, int], tuple[int, int]]:
    # (face, source vertex) corners glued by folds collapse to one net vertex
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    for f, p in net.panels.items():
        for v in p.vertices:
            parent[(f, v)] = (f, v)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for fold in net.folds:
        for v in fold.edge:
            parent[find((fold.parent, v))] = find((fold.child, v))
    return {k: find(k) for k in parent}


def _seg_dist(p1, p2, q1, q2) -> float:
    def pt_seg(p, a, b):
        ab = b - a
        denom = float(np.dot(ab, ab))
        t = 0.0 if denom == 0 else max(0.0, min(1.0, float(np.dot(p - a, ab)) / denom))
        return float(np.linalg.norm(p - (a + t * ab)))

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return 0.0
    return min(pt_seg(p1, q1, q2), pt_seg(p2, q1, q2), pt_seg(q1, p1, p2), pt_seg(q2, p1, p2))


def overlap_status(net: Net, tol: float = OVERLAP_TOL) -> OverlapStatus:
    """Classify a net as Simple, Touching or Overlapping.

    Overlapping: two panels share more than ``tol * scale**2`` of area.
    Touching: boundary segments meet anywhere other than at the single net
    vertex where they are consecutive on the boundary.
    """
    scale = net.scale()
    eps = tol * scale
    faces = sorted(net.panels)
    polys = {f: Polygon(net.panels[f].coords) for f in faces}
    overlapping = []
    for i, f in enumerate(faces):
        for g in faces[i + 1 :]:
            if not polys[f].intersects(polys[g]):
                continue
            if polys[f].intersection(polys[g]).area > tol * scale * scale:
                overlapping.append((f, g))

    ids = _net_vertex_ids(net)
    folded = {(fold.edge, f) for fold in net.folds for f in (fold.parent, fold.child)}
    segs = []
    for f in faces:
        p = net.panels[f]
        loop = p.vertices
        for u, w in zip(loop, loop[1:] + loop[:1]):
            if (edge_key(u, w), f) in folded:
                continue
            segs.append((f, p.point(u), p.point(w), ids[(f, u)], ids[(f, w)]))
    touching = set()
    for i in range(len(segs)):
        fa, a1, a2, ia1, ia2 = segs[i]
        for j in range(i + 1, len(segs)):
            fb, b1, b2, ib1, ib2 = segs[j]
            if _seg_dist(a1, a2, b1, b2) > eps:
                continue
            shared = {ia1, ia2} & {ib1, ib2}
            if len(shared) == 1:
                (s,) = shared
                a_far = a2 if ia1 == s else a1
                b_far = b2 if ib1 == s else b1
                if (
                    _seg_dist(a_far, a_far, b1, b2) > eps
                    and _seg_dist(b_far, b_far, a1, a2) > eps
                ):
                    continue
            touching.add((min(fa, fb), max(fa, fb)))
    if overlapping:
        kind = OverlapKind.OVERLAPPING
    elif touching:
        kind = OverlapKind.TOUCHING
    else:
        kind = OverlapKind.SIMPLE
    return OverlapStatus(kind, tuple(overlapping), tuple(sorted(touching)))


@dataclass(frozen=True)
class RefoldResult:
    mesh: Mesh
    alignment_error: float


def _axis_rotation(axis: np.ndarray, angle: float) -> np.ndarray:
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    C = 1 - c
    return np.array(
        [
            [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
            [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
            [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
        ]
    )


def refold(net: Net, source: Mesh, fold_tol: float | None = None) -> RefoldResult:
    """Fold the net back up using the source dihedral angles.

    Every copy of a source vertex must land on the same point (within
    ``fold_tol``, default ``1e-6`` of the net scale), otherwise
    :class:`FoldMismatch` is raised. The folded shape is then aligned to
    the source by the best rigid motion.
    """
    if fold_tol is None:
        fold_tol = 1e-6 * net.scale()
    # rigid maps from net space (z = 0) into 3D: x -> R @ x + t
    maps = {net.root: (np.eye(3), np.zeros(3))}
    children: dict[int, list[Fold]] = {}
    for fold in net.folds:
        children.setdefault(fold.parent, []).append(fold)
    queue = deque([net.root])
    while queue:
        f = queue.popleft()
        R, t = maps[f]
        loop = net.panels[f].vertices
        for fold in children.get(f, []):
            u, w = fold.edge
            i = loop.index(u)
            a, b = (u, w) if loop[(i + 1) % len(loop)] == w else (w, u)
            pa = np.append(net.panels[f].point(a), 0.0)
            pb = np.append(net.panels[f].point(b), 0.0)
            axis = (pb - pa) / np.linalg.norm(pb - pa)
            phi = math.pi - dihedral_angle(source, fold.edge)
            Q = _axis_rotation(axis, phi)
            # x -> R @ (Q @ (x - pa) + pa) + t
            maps[fold.child] = (R @ Q, R @ (pa - Q @ pa) + t)
            queue.append(fold.child)
    if len(maps) != len(net.panels):
        raise FoldMismatch("fold tree does not reach every panel")

    copies: dict[int, list[np.ndarray]] = {}
    for f, panel in net.panels.items():
        R, t = maps[f]
        pts3 = np.column_stack([panel.coords, np.zeros(len(panel.coords))]) @ R.T + t
        for v, p in zip(panel.vertices, pts3):
            copies.setdefault(v, []).append(p)
    folded = np.zeros((source.n_vertices, 3))
    for v, ps in copies.items():
        ps = np.array(ps)
        spread = float(np.max(np.linalg.norm(ps - ps[0], axis=1)))
        if spread > fold_tol:
            raise FoldMismatch(f"copies of vertex {v} disagree by {spread:.3e}")
        folded[v] = ps.mean(axis=0)

    aligned = _kabsch_align(folded, np.asarray(source.vertices))
    err = float(np.max(np.linalg.norm(aligned - source.vertices, axis=1)))
    mode = Mode.CLOSED if source.closed else Mode.OPEN
    return RefoldResult(build_mesh(aligned, source.faces, mode), err)


def _kabsch_align(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    pc, qc = P.mean(axis=0), Q.mean(axis=0)
    H = (P - pc).T @ (Q - qc)
    U, _, Vt = np.linalg.svd(H)
    d = np.sign(np.linalg.det(Vt.T @ U.T)) or 1.0
    R = Vt.T @ np.diag([1.0, 1.0, d]) @ U.T
    return (P - pc) @ R.T + qc


def export_svg(net: Net, mm_per_unit: float = MM_PER_UNIT, margin: float = 5.0) -> str:
    """SVG with one group per panel: cuts solid, folds dashed, gluing labels as text."""
    if not net.panels:
        raise ValueError("cannot export an empty net")
    x0, y0, x1, y1 = net.bounds()
    width = (x1 - x0) * mm_per_unit + 2 * margin
    height = (y1 - y0) * mm_per_unit + 2 * margin

    def tx(p) -> tuple[float, float]:
        return (
            (p[0] - x0) * mm_per_unit + margin,
            (y1 - p[1]) * mm_per_unit + margin,
        )

    font = max(2.0, 0.15 * mm_per_unit)
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.3f}mm" height="{height:.3f}mm" viewBox="0 0 {width:.3f} {height:.3f}">',
    ]
    cut_of = {}
    for cut in net.cuts:
        for f in cut.faces:
            cut_of.setdefault(f, []).append(cut)
    fold_of: dict[int, list[Fold]] = {}
    for fold in net.folds:
        fold_of.setdefault(fold.child, []).append(fold)
    for f in sorted(net.panels):
        panel = net.panels[f]
        out.append(f'  <g id="panel-{f}">')
        pts = " ".join("{:.4f},{:.4f}".format(*tx(p)) for p in panel.coords)
        out.append(f'    <polygon points="{pts}" fill="#f7f4ea" stroke="none"/>')
        for cut in cut_of.get(f, []):
            a, b = (tx(panel.point(v)) for v in cut.edge)
            out.append(
                f'    <line class="cut" x1="{a[0]:.4f}" y1="{a[1]:.4f}" x2="{b[0]:.4f}" y2="{b[1]:.4f}" '
                'stroke="black" stroke-width="0.3"/>'
            )
            # label sits slightly inside the panel, next to the edge midpoint
            mid = (panel.point(cut.edge[0]) + panel.point(cut.edge[1])) / 2
            inward = panel.coords.mean(axis=0) - mid
            pos = tx(mid + 0.15 * inward)
            out.append(
                f'    <text class="label" x="{pos[0]:.4f}" y="{pos[1]:.4f}" font-size="{font:.2f}" '
                f'text-anchor="middle">{escape(str(cut.label))}</text>'
            )
        for fold in fold_of.get(f, []):
            a, b = (tx(panel.point(v)) for v in fold.edge)
            out.append(
                f'    <line class="fold" x1="{a[0]:.4f}" y1="{a[1]:.4f}" x2="{b[0]:.4f}" y2="{b[1]:.4f}" '
                'stroke="black" stroke-width="0.3" stroke-dasharray="2,1"/>'
            )
        out.append("  </g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"

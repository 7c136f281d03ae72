from __future__ import annotations

import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rectipoly.constructions import make_box, octahedral_rotations
from rectipoly.mesh import MeshError, Mode, build_mesh
from rectipoly.ortho import (
    Color,
    classify_edges,
    dihedral_angle,
    dihedral_histogram,
    folded_angle,
    is_rectilinear,
    orthogonality_certificate,
    rectangle_check,
    rectilinear_deviation,
)
from test_mesh import quaternions, random_rotation

ATAN_SQRT2 = math.atan(math.sqrt(2))


def plane_angle_oracle(mesh, edge):
    # independent: acute angle between the two face planes, from normals alone
    f1, f2 = mesh.edge_faces[edge]
    c = abs(float(np.dot(mesh.face_normal(f1), mesh.face_normal(f2))))
    return math.acos(min(1.0, c))


def convexity_oracle(mesh, edge):
    # an edge is convex when the far vertex of one face lies behind the other face's plane
    f1, f2 = mesh.edge_faces[edge]
    n1 = mesh.face_normal(f1)
    p1 = mesh.vertices[edge[0]]
    far = [v for v in mesh.faces[f2] if v not in edge]
    return max(float(np.dot(mesh.vertices[v] - p1, n1)) for v in far) < 0


def test_cube_edges_are_right(cube):
    for e in cube.edges:
        assert math.isclose(dihedral_angle(cube, e), math.pi / 2, abs_tol=1e-12)
    assert all(c.color is Color.GREEN for c in classify_edges(cube).edges)


def test_octopus_square_rim_is_45(octopus):
    rim = [e for e in octopus.edges if any(set(e) <= set(octopus.faces[f]) for f in range(6))]
    assert len(rim) == 24
    for e in rim:
        assert math.isclose(folded_angle(dihedral_angle(octopus, e)), math.pi / 4, abs_tol=1e-12)


def test_octopus_base_long_edges(octopus):
    # long prism edges through square corners: both faces are prism faces
    apexes = {v for v in range(octopus.n_vertices) if octopus.vertex_degree(v) == 8}
    rim = {e for f in range(6) for e in zip(octopus.faces[f], octopus.faces[f][1:] + octopus.faces[f][:1])}
    rim = {tuple(sorted(e)) for e in rim}
    base = [e for e in octopus.edges if not set(e) & apexes and e not in rim]
    assert len(base) == 24
    for e in base:
        assert math.isclose(folded_angle(dihedral_angle(octopus, e)), ATAN_SQRT2, abs_tol=1e-12)


def test_octopus_folded_angles_match_normal_oracle(octopus):
    for e in octopus.edges:
        theta = dihedral_angle(octopus, e)
        assert math.isclose(folded_angle(theta), plane_angle_oracle(octopus, e), abs_tol=1e-9)
        assert (theta < math.pi) == convexity_oracle(octopus, e)


def test_octopus_folded_buckets(octopus):
    # measured buckets; the corner-to-apex edges sit at 60 degrees
    got = Counter(round(math.degrees(folded_angle(dihedral_angle(octopus, e))), 6) for e in octopus.edges)
    want = {
        round(45.0, 6): 24,
        round(math.degrees(ATAN_SQRT2), 6): 24,
        round(60.0, 6): 24,
        round(math.degrees(math.pi - 2 * ATAN_SQRT2), 6): 12,
    }
    assert dict(got) == want


def test_octopus_interior_angles(octopus):
    got = Counter(round(math.degrees(dihedral_angle(octopus, e)), 4) for e in octopus.edges)
    assert got == Counter({135.0: 24, 300.0: 24, 54.7356: 24, 70.5288: 12})


def test_octopus_all_red(octopus):
    cls = classify_edges(octopus)
    assert len(cls.red) == 84 and not cls.green
    cert = orthogonality_certificate(octopus)
    assert cert.status == "Fail" and len(cert.red_edges) == 84


def test_octopus_cubes_mixed(octopus_cubes):
    cls = classify_edges(octopus_cubes)
    assert len(cls.red) == 84 and len(cls.green) == 48
    assert orthogonality_certificate(octopus_cubes).status == "Fail"


def test_controls_pass(cube, torus):
    assert orthogonality_certificate(cube).status == "Pass"
    assert orthogonality_certificate(torus).status == "Pass"


def test_certificate_needs_closed(cube):
    open_mesh = build_mesh(cube.vertices, cube.faces[:-1], Mode.OPEN)
    with pytest.raises(MeshError):
        orthogonality_certificate(open_mesh)


def test_boundary_edge_has_no_dihedral(cube):
    open_mesh = build_mesh(cube.vertices, cube.faces[:-1], Mode.OPEN)
    boundary = [e for e in open_mesh.edges if len(open_mesh.edge_faces[e]) == 1]
    with pytest.raises(MeshError):
        dihedral_angle(open_mesh, boundary[0])
    assert len(classify_edges(open_mesh).edges) == 12 - len(boundary)


def test_rectangle_inventory(octopus, cube, torus):
    inv = rectangle_check(octopus).inventory
    assert len(inv) == 3
    expected = {(3.0, 1.0): 12, (3.0, math.sqrt(3) / 2): 24, (1.0, 1.0): 6}
    for (a, b), n in expected.items():
        match = [k for k in inv if abs(k[0] - a) <= 1e-9 and abs(k[1] - b) <= 1e-9]
        assert len(match) == 1 and inv[match[0]] == n
    assert list(rectangle_check(cube).inventory.values()) == [6]
    tor = rectangle_check(torus)
    assert tor.all_rectangles
    assert {(round(a, 9), round(b, 9)): n for (a, b), n in tor.inventory.items()} == {(2.0, 1.0): 12, (1.0, 1.0): 8}


def test_sheared_cube_has_parallelograms(cube):
    verts = np.array(cube.vertices)
    verts[:, 0] += 0.3 * verts[:, 2]
    sheared = build_mesh(verts, cube.faces)
    rc = rectangle_check(sheared)
    assert not rc.all_rectangles
    assert sorted(rc.failures) == [2, 3]  # the y = 0 and y = a faces


def test_deviation_and_tolerance():
    assert rectilinear_deviation(math.pi + 1e-12) == (2, pytest.approx(1e-12, abs=1e-15))
    assert is_rectilinear(3 * math.pi / 2 - 5e-10)
    assert not is_rectilinear(3 * math.pi / 2 - 5e-9)


def test_histogram_rows(octopus):
    rows = dihedral_histogram(classify_edges(octopus))
    assert [r["count"] for r in rows] == [24, 24, 24, 12]
    assert all(r["color"] == "red" for r in rows)


@given(theta=st.floats(1e-6, 2 * math.pi - 1e-6))
def test_folded_angle_symmetries(theta):
    f = folded_angle(theta)
    assert 0 <= f <= math.pi / 2
    assert math.isclose(f, folded_angle(2 * math.pi - theta), abs_tol=1e-12)
    assert math.isclose(f, folded_angle(abs(math.pi - theta)), abs_tol=1e-12)


boxes = st.tuples(*[st.floats(0.1, 10) for _ in range(3)])


@given(size=boxes, k=st.integers(0, 23))
def test_rotated_boxes_stay_orthogonal(size, k):
    R = octahedral_rotations()[k]
    box = make_box(*size)
    moved = build_mesh(np.asarray(box.vertices) @ R.T, box.faces)
    assert orthogonality_certificate(moved).passed


@given(size=boxes, q=quaternions)
def test_arbitrarily_rotated_boxes_stay_orthogonal(size, q):
    box = make_box(*size)
    moved = build_mesh(np.asarray(box.vertices) @ random_rotation(q).T, box.faces)
    assert orthogonality_certificate(moved).passed
    assert rectangle_check(moved).all_rectangles

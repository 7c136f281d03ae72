from __future__ import annotations

from collections import Counter
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rectipoly.constructions import OctopusParams, make_octopus
from rectipoly.mesh import build_mesh
from rectipoly.ortho import Color, DihedralClassification, classify_edges
from rectipoly.redgraph import (
    Arc,
    CollinearityViolation,
    NotRectangleFaced,
    RedGraph,
    Verdict,
    bound_stats,
    build_red_graph,
    euler_bound,
    facial_walks,
    g01_audit,
    min_faces,
)


def recolor(mesh, red_edges):
    cls = classify_edges(mesh)
    red_edges = set(red_edges)
    edges = tuple(
        replace(c, color=Color.RED if c.edge in red_edges else Color.GREEN) for c in cls.edges
    )
    return DihedralClassification(edges, cls.tol)


def test_controls_have_empty_red_graph(cube, torus):
    assert build_red_graph(cube) == []
    assert build_red_graph(torus) == []


def test_octopus_red_graph(octopus):
    (rg,) = build_red_graph(octopus)
    assert len(rg.nodes) == 30
    assert rg.degree_histogram() == {5: 24, 8: 6}
    assert len(rg.arcs) == 84 and rg.n_mesh_edges == 84
    # handshake
    assert sum(rg.degree(v) for v in rg.nodes) == 2 * len(rg.arcs)


def test_octopus_walks(octopus):
    (rg,) = build_red_graph(octopus)
    walks = facial_walks(rg)
    assert Counter(len(w) for w in walks) == {4: 42}
    darts = [d for w in walks for d in w.darts]
    assert len(darts) == len(set(darts)) == 2 * len(rg.arcs)
    stats = bound_stats(rg, -12, walks)
    assert stats.d == Fraction(168, 30)
    assert stats.k == 4
    assert stats.embedding_chi == -12


def test_walk_of_single_arc():
    rg = RedGraph(
        nodes=(0, 1),
        positions=np.zeros((2, 3)),
        arcs=(Arc(0, 1, (0, 1), ((0, 1),)),),
        rotation={0: ((0, 0),), 1: ((0, 1),)},
    )
    (walk,) = facial_walks(rg)
    assert len(walk) == 2


def test_four_cycle_on_sphere():
    arcs = tuple(Arc(i, (i + 1) % 4, (i, (i + 1) % 4), ((i, (i + 1) % 4),)) for i in range(4))
    rotation = {i: ((i, 0), ((i - 1) % 4, 1)) for i in range(4)}
    rg = RedGraph((0, 1, 2, 3), np.zeros((4, 3)), arcs, rotation)
    walks = facial_walks(rg)
    assert sorted(len(w) for w in walks) == [4, 4]
    assert bound_stats(rg, 2, walks).embedding_chi == 2


def test_collinear_chain_is_merged(torus):
    # the pinwheel side x = n runs straight through T-junction 5
    chain = [(5, 8), (5, 6)]
    cls = recolor(torus, chain)
    (rg,) = build_red_graph(torus, cls)
    assert len(rg.arcs) == 1 and len(rg.arcs[0].mesh_edges) == 2
    assert rg.degree_histogram() == {1: 2}
    (walk,) = facial_walks(rg)
    assert len(walk) == 2


def test_bent_chain_raises(cube):
    # marking one face boundary red makes every corner a bent degree-2 vertex
    loop = cube.faces[0]
    face_edges = [tuple(sorted(e)) for e in zip(loop, loop[1:] + loop[:1])]
    with pytest.raises(CollinearityViolation):
        build_red_graph(cube, recolor(cube, face_edges))


def test_bent_path_raises(cube):
    loop = cube.faces[0]
    with pytest.raises(CollinearityViolation):
        build_red_graph(cube, recolor(cube, [tuple(sorted(loop[:2])), tuple(sorted(loop[1:3]))]))


@pytest.mark.parametrize(
    "chi, k, d_edge",
    [(2, 3, Fraction(6)), (2, 4, Fraction(4))],
)
def test_strict_bounds(chi, k, d_edge):
    for F in (1, 2, 10, 1000):
        assert not euler_bound(F, d_edge, k, chi).holds
        assert not euler_bound(F, d_edge + Fraction(1, 100), k, chi).holds
    below = d_edge - Fraction(1, 100)
    F = min_faces(below, k, chi)
    assert F is not None and euler_bound(F, below, k, chi).holds
    assert not euler_bound(F - 1, below, k, chi).holds
    assert min_faces(d_edge, k, chi) is None


def test_torus_bound_is_tight():
    for F in (1, 7, 100):
        b = euler_bound(F, 4, 4, 0)
        assert b.holds and b.slack == 0
        assert not euler_bound(F, Fraction(401, 100), 4, 0).holds
        assert euler_bound(F, Fraction(399, 100), 4, 0).holds


def test_hexacontahedron():
    # quoted face count 62 (really the vertex count) and the true 60 faces
    assert euler_bound(62, Fraction(240, 62), 4, 2).holds
    b = euler_bound(60, Fraction(240, 62), 4, 2)
    assert b.holds and b.slack == 0


def test_bound_input_checks():
    with pytest.raises(ValueError):
        euler_bound(0, 4, 4, 0)


@given(
    F=st.integers(1, 500),
    d=st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=50),
    k=st.integers(1, 12),
    chi=st.integers(-20, 2),
)
def test_min_faces_is_the_threshold(F, d, k, chi):
    m = min_faces(d, k, chi)
    holds = euler_bound(F, d, k, chi).holds
    factor = k - d * (k - 2) / 2
    if m is None:
        assert not holds
    elif factor > 0:
        assert holds == (F >= m)
    elif factor < 0:
        assert holds == (F * factor >= d * chi)


def test_audits(cube, torus, octopus):
    for mesh, genus in ((cube, 0), (torus, 1)):
        a = g01_audit(mesh)
        assert a.verdict is Verdict.CONSISTENT and a.genus == genus and a.red_graph_empty
    a = g01_audit(octopus)
    assert a.verdict is Verdict.NO_CONSTRAINT and a.genus == 7
    assert a.degree_floor_ok and a.min_walk_length == 4
    (comp,) = a.components
    assert comp.min_degree == 5 and comp.bound.holds and comp.bound.slack == 0


def test_audit_flags_low_genus_red_edges(cube):
    # a cube with a loosened tolerance stays green; squash it into a non-box to force red
    verts = np.array(cube.vertices)
    verts[:, 0] += 0.3 * verts[:, 2]
    sheared = build_mesh(verts, cube.faces)
    with pytest.raises(NotRectangleFaced):
        g01_audit(sheared)


@given(L=st.floats(1.5, 8.0))
def test_octopus_red_graph_shape_is_length_independent(L):
    mesh = make_octopus(OctopusParams(L))
    (rg,) = build_red_graph(mesh)
    assert rg.degree_histogram() == {5: 24, 8: 6}
    walks = facial_walks(rg)
    assert {len(w) for w in walks} == {4}
    assert sum(rg.degree(v) for v in rg.nodes) == 2 * len(rg.arcs)

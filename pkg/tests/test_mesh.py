import math

import numpy as np
import pytest

from hdgpos.errors import InputError, ShapeError
from hdgpos.mesh import (DIRICHLET, INTERIOR, NEUMANN, apply_shear_map, barycenter, build_graph,
                         build_interval_graph, build_single_hypercube, build_structured_rect_mesh,
                         build_structured_simplex_mesh, face_measure, from_cells, outward_normal,
                         rect_sides, volume)


def _check_edge_geometry(E):
    meas = np.array([F.measure for F in E.faces])
    normals = np.array([F.normal for F in E.faces])
    assert np.allclose(np.linalg.norm(normals, axis=1), 1.0, atol=1e-12)
    for F in E.faces:
        assert F.normal @ (F.barycenter - E.barycenter) > 0
    assert np.allclose(meas @ normals, 0.0, atol=1e-12 * E.boundary_measure)
    assert math.isclose(meas.sum(), E.boundary_measure, rel_tol=1e-12)


def test_interval_graph():
    g = build_interval_graph([0, 0.5, 1], [1, 1])
    assert len(g.edges) == 2 and len(g.nodes) == 3
    assert np.allclose([E.volume for E in g.edges], 0.5)
    kinds = [n.boundary_kind for n in g.nodes]
    assert kinds.count(INTERIOR) == 1
    mid = g.find_node([0.5])
    assert g.nodes[mid].boundary_kind == INTERIOR
    assert all(n.measure == 1.0 for n in g.nodes)


def test_interval_single_edge():
    g = build_interval_graph([0, 1])
    assert len(g.edges) == 1
    assert all(n.boundary_kind == DIRICHLET for n in g.nodes)


def test_interval_non_monotone():
    with pytest.raises(InputError):
        build_interval_graph([0, 0.5, 0.5])


def test_star_graph():
    g = build_graph([[0, 0], [1, 0], [-1, 0], [0, 2]], [(0, 1), (0, 2), (0, 3)])
    assert g.nodes[0].boundary_kind == INTERIOR
    assert len(g.node_edges(0)) == 3
    assert all(g.nodes[i].boundary_kind == DIRICHLET for i in (1, 2, 3))


def test_graph_single_edge_and_disconnected():
    g = build_graph([[0.0], [1.0]], [(0, 1)])
    assert all(n.boundary_kind == DIRICHLET for n in g.nodes)
    with pytest.raises(InputError):
        build_graph([[0.0], [1.0], [2.0], [3.0]], [(0, 1), (2, 3)])


@pytest.mark.parametrize("d,n_nodes", [(1, 2), (2, 4), (3, 6)])
def test_single_hypercube(d, n_nodes):
    m = build_single_hypercube(d)
    E = m.edges[0]
    assert len(m.nodes) == n_nodes
    assert np.allclose([n.measure for n in m.nodes], 1.0)
    assert math.isclose(E.volume, 1.0)
    assert math.isclose(E.boundary_measure, 2 * d)
    _check_edge_geometry(E)


def test_rect_mesh_10x10():
    m = build_structured_rect_mesh(10, 10)
    assert len(m.edges) == 100 and len(m.nodes) == 220
    for E in m.edges:
        assert np.allclose(rect_sides(E), (0.1, 0.1))
        _check_edge_geometry(E)


def test_rect_mesh_two_squares():
    m = build_structured_rect_mesh(2, 1, 2.0, 1.0)
    assert len(m.edges) == 2
    shared = set(m.edges[0].node_ids) & set(m.edges[1].node_ids)
    assert len(shared) == 1
    assert np.allclose(m.nodes[shared.pop()].barycenter, [1.0, 0.5])


def test_rect_face_order():
    E = build_single_hypercube(2).edges[0]
    assert np.allclose([F.normal for F in E.faces], [[-1, 0], [1, 0], [0, -1], [0, 1]])


def test_simplex_mesh_2d():
    m = build_structured_simplex_mesh(2)
    assert len(m.edges) == 8
    assert math.isclose(sum(E.volume for E in m.edges), 1.0, rel_tol=1e-12)
    nid = m.find_node([0.75, 0.75])
    assert m.nodes[nid].boundary_kind == INTERIOR
    assert {tuple(x) for x in m.nodes[nid].coords} == {(0.5, 1.0), (1.0, 0.5)}
    for E in m.edges:
        _check_edge_geometry(E)


def test_simplex_mesh_3d():
    m = build_structured_simplex_mesh(3)
    assert len(m.edges) == 48
    assert math.isclose(sum(E.volume for E in m.edges), 1.0, rel_tol=1e-12)
    for E in m.edges:
        _check_edge_geometry(E)


def test_shear_identity():
    m = build_structured_simplex_mesh(2)
    assert np.array_equal(apply_shear_map(m, 0.0).vertices, m.vertices)


def test_shear_central_angle():
    m = apply_shear_map(build_structured_simplex_mesh(2), 1.0)
    A, B, C = np.array([0, 1.0]), np.array([0.5, 1.0]), np.array([0.5, 1.5])
    # images of the reference points (0,1), (0.5,0.5), (0.5,1)
    for P in (A, B, C):
        assert np.min(np.linalg.norm(m.vertices - P, axis=1)) < 1e-14
    u, v = C - B, A - B
    assert math.isclose(np.arccos(u @ v / np.linalg.norm(u) / np.linalg.norm(v)), math.pi / 2)


def test_shear_quad_perimeter():
    m = apply_shear_map(build_structured_rect_mesh(10, 10), 1.5)
    E = m.edges[0]
    assert E.shape == "parallelogram"
    assert math.isclose(E.boundary_measure, 0.2 + 2 * math.hypot(0.1, 0.15), rel_tol=1e-12)
    assert abs(E.boundary_measure - 0.56056) < 1e-5
    assert math.isclose(E.volume, 0.01, rel_tol=1e-12)
    with pytest.raises(ShapeError):
        rect_sides(E)


def test_geometry_queries():
    tri = from_cells([[0, 0], [1, 0], [0, 1]], [("triangle", (0, 1, 2))])
    E = tri.edges[0]
    assert math.isclose(volume(E), 0.5)
    hyp = tri.find_node([0.5, 0.5])
    assert np.allclose(outward_normal(E, hyp), np.array([1, 1]) / math.sqrt(2))
    sq = build_single_hypercube(2).edges[0]
    assert np.allclose(barycenter(sq), [0.5, 0.5])
    assert all(face_measure(n) == 1.0 for n in build_single_hypercube(2).nodes)
    seg = build_interval_graph([0, 0.5]).edges[0]
    assert math.isclose(volume(seg), 0.5)
    assert np.allclose([outward_normal(seg, n).item() for n in seg.node_ids], [-1, 1])


def test_boundary_kinds_and_validation():
    m = build_single_hypercube(2, neumann=lambda p: p[0] == 1.0)
    kinds = sorted(n.boundary_kind for n in m.nodes)
    assert kinds == [DIRICHLET] * 3 + [NEUMANN]
    with pytest.raises(InputError):
        build_single_hypercube(2, neumann=lambda p: True)


def test_interior_iff_two_edges():
    m = build_structured_rect_mesh(3, 2)
    for n in m.nodes:
        assert (n.boundary_kind == INTERIOR) == (len(m.node_edges(n.id)) >= 2)

import io

import numpy as np
import pytest

from hdgpos.assembly import (apply_dirichlet, assemble, assemble_graph_fd, assemble_p0_fast,
                             diagnostics)
from hdgpos.errors import IllPosedComboError, MisuseError
from hdgpos.mesh import (apply_shear_map, build_graph, build_interval_graph,
                         build_structured_rect_mesh, build_structured_simplex_mesh)
from hdgpos.solve import solve, solve_linear
from hdgpos.spaces import P0_COMBO, RT0_COMBO, SpaceCombo

from problems import (random_delaunay_mesh, random_graph, random_params, random_rect_mesh,
                      random_right_triangle_mesh)


def two_squares(tau=1.0):
    return build_structured_rect_mesh(2, 1, 2.0, 1.0, tau=tau)


def test_two_squares_p0_entries():
    m = two_squares()
    sys = assemble(m, P0_COMBO)
    A = sys.full_matrix.toarray()
    n12 = m.find_node([1.0, 0.5])
    top1 = m.find_node([0.5, 1.0])
    left = m.find_node([0.0, 0.5])
    assert np.isclose(A[n12, top1], -0.25)
    # opposite faces of a unit square: -kappa_bar - tau/4
    assert np.isclose(A[n12, left], -1.25)
    assert np.allclose(A.sum(axis=1), 0.0, atol=1e-13)
    assert sys.n == 1


def test_p0_fast_entries():
    m = two_squares(tau=3.0)
    A = assemble_p0_fast(m).full_matrix.toarray()
    n12, left = m.find_node([1.0, 0.5]), m.find_node([0.0, 0.5])
    assert np.isclose(A[n12, left], -1.0 - 3.0 / 4)


def test_p0_fast_errors():
    with pytest.raises(MisuseError):
        assemble_p0_fast(two_squares(), RT0_COMBO)
    with pytest.raises(IllPosedComboError):
        assemble_p0_fast(two_squares(tau=0.0))


@pytest.mark.parametrize("maker", [random_rect_mesh, random_right_triangle_mesh,
                                   random_delaunay_mesh])
def test_p0_fast_matches_generic(maker):
    rng = np.random.default_rng(11)
    for _ in range(5):
        m = random_params(maker(rng), rng)
        a, b = assemble(m, P0_COMBO), assemble_p0_fast(m)
        scale = abs(a.full_matrix).max()
        assert abs(a.full_matrix - b.full_matrix).max() <= 1e-12 * scale
        assert np.allclose(a.full_rhs, b.full_rhs, atol=1e-12)


def test_graph_star_fd():
    m = build_graph([[0, 0], [1, 0], [-1, 0], [0, 2]], [(0, 1), (0, 2), (0, 3)],
                    kappa=[1, 2, 3], tau=[1, 2, 0.5], f=[0.5, -1, 2])
    c = SpaceCombo("P1", "P1d", "P0")
    a, b = assemble(m, c), assemble_graph_fd(m, c)
    assert abs(a.full_matrix - b.full_matrix).max() < 1e-12
    assert np.allclose(a.full_rhs, b.full_rhs, atol=1e-12)


def test_graph_fd_random():
    rng = np.random.default_rng(12)
    for combo in ("P1/P1d/P0", "P0/P0d/P0"):
        c = SpaceCombo.parse(combo)
        m = random_graph(rng, 20)
        a, b = assemble(m, c), assemble_graph_fd(m, c)
        assert abs(a.full_matrix - b.full_matrix).max() <= 1e-11 * abs(b.full_matrix).max()


def test_interval_fd_midpoint():
    for u, tau in (("P1", 1.0), ("P0", 2.0)):
        m = build_interval_graph([0, 0.5, 1], tau=tau)
        m = m.with_dirichlet({m.find_node([0.0]): 0.0, m.find_node([1.0]): 1.0})
        c = SpaceCombo(u, "P1d", "P0")
        sys = assemble_graph_fd(m, c)
        mid = m.find_node([0.5])
        A = sys.full_matrix.toarray()
        assert np.isclose(A[mid, mid], 4.0 if u == "P1" else 6.0)
        x, _ = solve_linear(sys)
        assert np.allclose(x, 0.5)
        assert np.allclose(solve(m, c).lam[mid], 0.5)


def test_star_center():
    m = build_graph([[0, 0], [1, 0], [-1, 0], [0, 1]], [(0, 1), (0, 2), (0, 3)],
                    dirichlet={1: 0.0, 2: 0.0, 3: 3.0})
    x, _ = solve_linear(assemble_graph_fd(m, SpaceCombo("P1", "P1d", "P0")))
    assert np.allclose(x, 1.0)


def test_graph_fd_needs_graph():
    with pytest.raises(MisuseError):
        assemble_graph_fd(two_squares(), P0_COMBO)


def test_row_sums_and_symmetry_p0():
    rng = np.random.default_rng(13)
    for maker in (random_rect_mesh, random_delaunay_mesh):
        m = random_params(maker(rng), rng)
        dg = diagnostics(assemble(m, P0_COMBO))
        assert dg.max_abs_row_sum <= 1e-10 * dg.norm_inf
        assert dg.symmetry_defect <= 1e-12 * dg.norm_max


def test_nonobtuse_offdiag():
    m = build_structured_simplex_mesh(2, tau=1.0)
    dg = diagnostics(assemble(m, P0_COMBO))
    assert dg.max_positive_offdiag <= 1e-12
    assert dg.nonnegative_type
    assert dg.min_inverse_entry >= 0


def test_sheared_quads_offdiag_positive():
    m = apply_shear_map(build_structured_rect_mesh(10, 10, tau=1.0), 1.5)
    dg = diagnostics(assemble_p0_fast(m), inverse_limit=0)
    assert dg.max_positive_offdiag > 0
    assert not dg.nonnegative_type


def test_apply_dirichlet_all_dirichlet():
    m = build_structured_rect_mesh(1, 1).with_dirichlet({i: 2.0 for i in range(4)})
    red = apply_dirichlet(assemble(m, P0_COMBO))
    assert red.n == 0 and red.matrix.shape == (0, 0)
    assert np.allclose(red.expand(np.zeros(0)), 2.0)


def test_apply_dirichlet_zero_data():
    m = two_squares()
    sys = assemble(m, P0_COMBO)
    red = apply_dirichlet(sys)
    assert np.allclose(red.rhs, sys.full_rhs[red.free])


def test_apply_dirichlet_elimination():
    m = two_squares()
    sys = assemble(m, P0_COMBO)
    top1, left = m.find_node([0.5, 1.0]), m.find_node([0.0, 0.5])
    assert np.allclose(apply_dirichlet(sys, m.with_dirichlet({top1: 1.0})).rhs, 0.25)
    assert np.allclose(apply_dirichlet(sys, m.with_dirichlet({left: 1.0})).rhs, 1.25)


def test_sparsity_pattern():
    m = build_structured_rect_mesh(3, 3)
    A = assemble(m, P0_COMBO).full_matrix.toarray()
    share = np.zeros_like(A, dtype=bool)
    for E in m.edges:
        share[np.ix_(E.node_ids, E.node_ids)] = True
    assert np.all(A[~share] == 0)


def test_write_coo_deterministic():
    sys = assemble(two_squares(), SpaceCombo("Q1", "Q1d", "P1"))
    a, b = io.StringIO(), io.StringIO()
    sys.write_coo(a)
    sys.write_coo(b)
    assert a.getvalue() == b.getvalue()
    lines = a.getvalue().splitlines()
    n, nnz = map(int, lines[0].split())
    assert n == sys.n and nnz == len(lines) - 1

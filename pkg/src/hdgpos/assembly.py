"""Condensed skeleton systems.

The global unknown is the trace lambda.  For every node basis function mu the
conservation constraint reads  sum_E <q.n + tau (u - lam), mu> = 0 ; after
static condensation this becomes  A lam = b  with

    A = - sum_E R_E ,   b = sum_E r_E ,

where R_E lam + r_E are the local flux moments of E (see ``local``).  Rows and
columns of Dirichlet nodes are kept in the full system so row sums can be
checked; ``apply_dirichlet`` moves the Dirichlet columns to the right side.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import IllPosedComboError, InputError, MisuseError
from .local import condensed_local, kappa_bar
from .mesh import DIRICHLET, Hypergraph
from .spaces import P0_COMBO, SpaceCombo, check_combo, trace_dim


@dataclass(frozen=True, eq=False)
class SkeletonDofMap:
    """Contiguous block of trace coefficients per node (all nodes)."""

    offsets: np.ndarray       # (n_nodes + 1,)
    dirichlet: np.ndarray     # bool per dof
    values: np.ndarray        # Dirichlet coefficients, 0 on free dofs

    @property
    def n_total(self) -> int:
        return int(self.offsets[-1])

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(~self.dirichlet)

    def block(self, node_id: int) -> slice:
        return slice(int(self.offsets[node_id]), int(self.offsets[node_id + 1]))

    def split(self, vec) -> list[np.ndarray]:
        """Per-node views of a full dof vector."""
        return [np.asarray(vec[self.offsets[i]:self.offsets[i + 1]])
                for i in range(len(self.offsets) - 1)]


def dirichlet_coefficients(values, n_vertices: int, m_size: int) -> np.ndarray:
    """Trace coefficients of stored Dirichlet data (constant or vertex values)."""
    v = np.asarray(values, dtype=float)
    if len(v) not in (1, n_vertices):
        raise InputError(f"Dirichlet data of length {len(v)} on a node with {n_vertices} vertices")
    if m_size == 1:
        return np.array([v.mean()])
    if len(v) == 1:
        return np.full(m_size, v[0])
    return v.copy()


def build_dof_map(mesh: Hypergraph, combo: SpaceCombo) -> SkeletonDofMap:
    sizes = [trace_dim(len(n.vertex_ids), combo.m_space) for n in mesh.nodes]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    mask = np.zeros(offsets[-1], dtype=bool)
    vals = np.zeros(offsets[-1])
    for node in mesh.nodes:
        if node.boundary_kind != DIRICHLET:
            continue
        s = slice(offsets[node.id], offsets[node.id + 1])
        if node.id not in mesh.dirichlet_data:
            raise InputError(f"Dirichlet node {node.id} has no data")
        mask[s] = True
        vals[s] = dirichlet_coefficients(mesh.dirichlet_data[node.id], len(node.vertex_ids),
                                         sizes[node.id])
    return SkeletonDofMap(offsets, mask, vals)


@dataclass(eq=False)
class CondensedSystem:
    """Full skeleton system over all node dofs, Dirichlet ones included."""

    full_matrix: sp.csr_matrix
    full_rhs: np.ndarray
    dof_map: SkeletonDofMap
    combo: SpaceCombo
    _reduced: "ReducedSystem | None" = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.dof_map.free)

    @property
    def matrix(self) -> sp.csr_matrix:
        return self.reduced().matrix

    @property
    def rhs(self) -> np.ndarray:
        return self.reduced().rhs

    def reduced(self) -> "ReducedSystem":
        if self._reduced is None:
            self._reduced = _eliminate(self)
        return self._reduced

    def write_coo(self, path_or_file, full: bool = False) -> None:
        """Dump the (reduced by default) matrix as ``n nnz`` + ``row col value`` lines."""
        A = (self.full_matrix if full else self.matrix).tocoo()
        lines = [f"{A.shape[0]} {A.nnz}"]
        order = np.lexsort((A.col, A.row))
        lines += [f"{A.row[k]} {A.col[k]} {A.data[k]:.17g}" for k in order]
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", encoding="utf-8") as fh:
                fh.write(text)


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """Free x free system after Dirichlet column elimination."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    free: np.ndarray
    full_values: np.ndarray    # Dirichlet coefficients in full numbering

    @property
    def n(self) -> int:
        return len(self.free)

    def expand(self, x) -> np.ndarray:
        """Full dof vector from free values plus the stored Dirichlet data."""
        out = self.full_values.copy()
        out[self.free] = x
        return out


def _eliminate(sys: CondensedSystem) -> ReducedSystem:
    dm = sys.dof_map
    free = dm.free
    A = sys.full_matrix
    g = dm.values
    rhs = sys.full_rhs[free] - A[free][:, dm.dirichlet] @ g[dm.dirichlet]
    return ReducedSystem(A[free][:, free].tocsr(), np.asarray(rhs, dtype=float), free, g.copy())


def apply_dirichlet(sys: CondensedSystem, mesh: Hypergraph | None = None) -> ReducedSystem:
    """Move Dirichlet columns to the right-hand side.

    With ``mesh`` given, Dirichlet values are re-read from its data (so one
    assembled matrix can be reused for several boundary data sets).
    """
    if mesh is not None:
        dm = build_dof_map(mesh, sys.combo)
        if dm.n_total != sys.dof_map.n_total or np.any(dm.dirichlet != sys.dof_map.dirichlet):
            raise InputError("mesh does not match the assembled system")
        sys = CondensedSystem(sys.full_matrix, sys.full_rhs, dm, sys.combo)
    return sys.reduced()


def _check_mesh_combo(mesh: Hypergraph, combo: SpaceCombo):
    for E in mesh.edges:
        check_combo(E.shape, combo)


def assemble(mesh: Hypergraph, combo: SpaceCombo) -> CondensedSystem:
    """Static condensation with unit-trace local solves, in ascending edge order."""
    _check_mesh_combo(mesh, combo)
    dm = build_dof_map(mesh, combo)
    rows, cols, vals = [], [], []
    rhs = np.zeros(dm.n_total)
    for E in mesh.edges:
        R, r = condensed_local(E, combo)
        idx = np.concatenate([np.arange(dm.offsets[n], dm.offsets[n + 1]) for n in E.node_ids])
        if len(idx) != R.shape[0]:
            raise InputError(f"edge {E.id}: trace size mismatch")
        rows.append(np.repeat(idx, len(idx)))
        cols.append(np.tile(idx, len(idx)))
        vals.append(-R.ravel())
        np.add.at(rhs, idx, r)
    A = _coo(rows, cols, vals, dm.n_total)
    return CondensedSystem(A, rhs, dm, combo)


def _coo(rows, cols, vals, n) -> sp.csr_matrix:
    if not rows:
        return sp.csr_matrix((n, n))
    A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    return A.tocsr()


def assemble_p0_fast(mesh: Hypergraph, combo: SpaceCombo = P0_COMBO) -> CondensedSystem:
    """Entry formula for the P0 combo:

    a_NN' = sum_E |N||N'| (kappa_bar n_N.n_N' - tau/|dE|)  for N != N',
    diagonal completed by zero row sums, rhs_N = sum_E |N|/|dE| int_E f.
    """
    if combo != P0_COMBO:
        raise MisuseError(f"assemble_p0_fast only supports P0/P0d/P0, got {combo}")
    dm = build_dof_map(mesh, combo)
    rows, cols, vals = [], [], []
    rhs = np.zeros(dm.n_total)
    for E in mesh.edges:
        if not E.tau > 0:
            raise IllPosedComboError("P0/P0d/P0 needs tau > 0", edge_id=E.id)
        meas = np.array([F.measure for F in E.faces])
        nrm = np.array([F.local_normal for F in E.faces])
        kb = kappa_bar(E)
        loc = np.outer(meas, meas) * (kb * (nrm @ nrm.T) - E.tau / E.boundary_measure)
        np.fill_diagonal(loc, 0.0)
        np.fill_diagonal(loc, -loc.sum(axis=1))
        idx = np.array([dm.offsets[n] for n in E.node_ids])
        rows.append(np.repeat(idx, len(idx)))
        cols.append(np.tile(idx, len(idx)))
        vals.append(loc.ravel())
        np.add.at(rhs, idx, meas / E.boundary_measure * E.f_const * E.volume)
    return CondensedSystem(_coo(rows, cols, vals, dm.n_total), rhs, dm, combo)


def assemble_graph_fd(mesh: Hypergraph, combo: SpaceCombo) -> CondensedSystem:
    """Finite difference system of a graph: sum_E c_E (lam_N - lam_N') = rhs_N.

    c_E = kappa/|E| for U=P1 and kappa/|E| + tau/2 for U=P0; the right side
    is int f phi_N (U=P1) or int f / 2 (U=P0), both f|E|/2 for constant f.
    """
    if mesh.dim != 1:
        raise MisuseError("assemble_graph_fd needs a one-dimensional mesh")
    if combo.u_space not in ("P0", "P1", "Q1"):
        raise MisuseError(f"unsupported combo {combo}")
    dm = build_dof_map(mesh, combo)
    rows, cols, vals = [], [], []
    rhs = np.zeros(dm.n_total)
    for E in mesh.edges:
        c = E.kappa / E.volume
        if combo.u_space == "P0":
            c += E.tau / 2
        a, b = (dm.offsets[n] for n in E.node_ids)
        rows.append(np.array([a, a, b, b]))
        cols.append(np.array([a, b, a, b]))
        vals.append(np.array([c, -c, -c, c]))
        rhs[[a, b]] += E.f_const * E.volume / 2
    return CondensedSystem(_coo(rows, cols, vals, dm.n_total), rhs, dm, combo)


@dataclass(frozen=True)
class MatrixDiagnostics:
    max_abs_row_sum: float
    norm_inf: float
    max_positive_offdiag: float
    symmetry_defect: float
    norm_max: float
    min_inverse_entry: float | None

    @property
    def nonnegative_type(self) -> bool:
        return (self.max_positive_offdiag <= 1e-12 * max(self.norm_max, 1.0)
                and self.max_abs_row_sum <= 1e-10 * max(self.norm_inf, 1.0))


def diagnostics(sys: CondensedSystem, inverse_limit: int = 500) -> MatrixDiagnostics:
    """Row sums, off-diagonal signs, symmetry and (small n) inverse nonnegativity."""
    A = sys.full_matrix.tocsr()
    row_sums = np.asarray(A.sum(axis=1)).ravel()
    absA = abs(A)
    norm_inf = float(np.asarray(absA.sum(axis=1)).max()) if A.shape[0] else 0.0
    norm_max = float(absA.max()) if A.nnz else 0.0
    free = sys.dof_map.free
    Af = A[free].tocoo()
    off = Af.data[free[Af.row] != Af.col]
    max_pos = float(max(off.max(), 0.0)) if off.size else 0.0
    sym = float(abs(A - A.T).max()) if A.nnz else 0.0
    min_inv = None
    red = sys.reduced()
    if 0 < red.n <= inverse_limit:
        try:
            inv = np.linalg.solve(red.matrix.toarray(), np.eye(red.n))
            min_inv = float(inv.min())
        except np.linalg.LinAlgError:
            min_inv = None
    return MatrixDiagnostics(float(np.abs(row_sums).max()) if len(row_sums) else 0.0,
                             norm_inf, max_pos, sym, norm_max, min_inv)

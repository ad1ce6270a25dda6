"""Solving the skeleton system and recovering the local fields."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .assembly import CondensedSystem, ReducedSystem, assemble, build_dof_map
from .errors import SolverError
from .local import LocalSolution, flux_trace, local_solve
from .mesh import DIRICHLET, Hypergraph
from .spaces import SpaceCombo

DENSE_LIMIT = 2000


@dataclass(frozen=True)
class SolverStats:
    method: str
    iterations: int
    relative_residual: float


def solve_linear(sys, dense_limit: int = DENSE_LIMIT, rtol: float = 1e-12):
    """Solve a reduced system; returns (x, SolverStats).

    Dense LU with partial pivoting up to ``dense_limit`` unknowns, otherwise
    Jacobi-preconditioned CG (symmetric matrices) or restarted GMRES.
    """
    if isinstance(sys, CondensedSystem):
        sys = sys.reduced()
    A, b = sys.matrix, np.asarray(sys.rhs, dtype=float)
    n = A.shape[0]
    if n == 0:
        return np.zeros(0), SolverStats("none", 0, 0.0)
    bnorm = max(np.linalg.norm(b), 1e-300)
    if n <= dense_limit:
        M = A.toarray() if hasattr(A, "toarray") else np.asarray(A)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
        pivots = np.abs(np.diag(lu))
        scale = np.abs(M).sum(axis=1).max()
        if pivots.min() <= 1e-14 * scale:
            raise SolverError(f"singular skeleton matrix (min pivot {pivots.min():.3e}, "
                              f"norm {scale:.3e})")
        x = scipy.linalg.lu_solve((lu, piv), b, check_finite=False)
        res = np.linalg.norm(M @ x - b) / bnorm if np.linalg.norm(b) > 0 else 0.0
        return x, SolverStats("dense-lu", 0, float(res))
    A = A.tocsr()
    diag = A.diagonal()
    if np.any(diag == 0):
        raise SolverError("zero diagonal entry, cannot precondition")
    P = spla.LinearOperator(A.shape, matvec=lambda v: v / diag)
    count = [0]

    def cb(*_):
        count[0] += 1

    symmetric = abs(A - A.T).max() <= 1e-12 * abs(A).max()
    if symmetric:
        x, info = spla.cg(A, b, rtol=rtol, atol=0.0, M=P, maxiter=10 * n, callback=cb)
        method = "cg"
    else:
        x, info = spla.gmres(A, b, rtol=rtol, atol=0.0, M=P, restart=50, maxiter=10 * n,
                             callback=cb, callback_type="pr_norm")
        method = "gmres"
    res = np.linalg.norm(A @ x - b) / bnorm
    if info != 0 or res > 1e-10:
        raise SolverError(f"{method} did not converge (info={info}, residual={res:.3e})")
    return x, SolverStats(method, count[0], float(res))


@dataclass(frozen=True, eq=False)
class Solution:
    mesh: Hypergraph
    combo: SpaceCombo
    lam: list            # per node coefficient arrays
    locals: list         # LocalSolution per edge
    residuals: dict      # non-Dirichlet node id -> summed flux moments
    stats: SolverStats | None = None
    scale: float = 1.0

    def lam_node(self, node_id: int) -> np.ndarray:
        return self.lam[node_id]

    def lam_mean(self, node_id: int) -> float:
        """Mean of lambda over a node (exact for nodal linear traces)."""
        return float(np.mean(self.lam[node_id]))

    def u_vertices(self, edge_id: int) -> np.ndarray:
        E = self.mesh.edges[edge_id]
        return self.locals[edge_id].u_at(E.vertex_coords)

    def write_csv(self, path_or_file) -> None:
        """Sections ``lambda`` (node_id, coeff_index, value) and ``u`` (edge_id, basis_index, value)."""
        lines = ["# hdg-pos-lab v1", "lambda", "node_id,coeff_index,value"]
        for i, v in enumerate(self.lam):
            lines += [f"{i},{k},{x:.17g}" for k, x in enumerate(v)]
        lines += ["u", "edge_id,basis_index,value"]
        for sol in self.locals:
            lines += [f"{sol.edge_id},{k},{x:.17g}" for k, x in enumerate(sol.u_coeffs)]
        text = "\n".join(lines) + "\n"
        if hasattr(path_or_file, "write"):
            path_or_file.write(text)
        else:
            with open(path_or_file, "w", encoding="utf-8") as fh:
                fh.write(text)


def _split_lam(mesh: Hypergraph, combo: SpaceCombo, lam) -> list[np.ndarray]:
    dm = build_dof_map(mesh, combo)
    if isinstance(lam, (list, tuple)) and len(lam) == len(mesh.nodes):
        out = [np.atleast_1d(np.asarray(v, dtype=float)) for v in lam]
        for i, v in enumerate(out):
            n = dm.offsets[i + 1] - dm.offsets[i]
            if len(v) == 1 and n > 1:
                out[i] = np.full(n, v[0])
        return out
    vec = np.asarray(lam, dtype=float)
    if vec.shape != (dm.n_total,):
        raise ValueError(f"lambda must have {dm.n_total} entries")
    return dm.split(vec)


def recover_locals(mesh: Hypergraph, combo: SpaceCombo, lam, stats=None) -> Solution:
    """Local fields for given traces, plus conservation moments at free nodes."""
    lam = _split_lam(mesh, combo, lam)
    locs: list[LocalSolution] = []
    res = {n.id: np.zeros(len(lam[n.id])) for n in mesh.nodes if n.boundary_kind != DIRICHLET}
    for E in mesh.edges:
        lam_e = [lam[n] for n in E.node_ids]
        sol = local_solve(E, combo, lam_e)
        locs.append(sol)
        for nid in E.node_ids:
            if nid in res:
                res[nid] = res[nid] + flux_trace(E, nid, sol, lam_e, combo)
    g = [abs(v) for vals in mesh.dirichlet_data.values() for v in vals]
    f = [abs(E.f_const) for E in mesh.edges]
    scale = max([1.0] + g + f)
    return Solution(mesh, combo, lam, locs, res, stats, scale)


def conservation_residual(sol: Solution) -> float:
    """Largest |sum of flux moments| over non-Dirichlet nodes and trace basis functions."""
    if not sol.residuals:
        return 0.0
    return float(max(np.abs(v).max() for v in sol.residuals.values()))


def solve(mesh: Hypergraph, combo: SpaceCombo, system: CondensedSystem | None = None) -> Solution:
    """Assemble, eliminate Dirichlet data, solve and recover local fields."""
    sys = assemble(mesh, combo) if system is None else system
    red: ReducedSystem = sys.reduced()
    x, stats = solve_linear(red)
    return recover_locals(mesh, combo, red.expand(x), stats)

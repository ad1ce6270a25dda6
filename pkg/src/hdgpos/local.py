"""Per-hyperedge local solvers.

Given the trace ``lam`` on the boundary of a hyperedge E, the local problem
finds (q, u) in Q(E) x U(E) with

    (q/kappa, p) - (u, div p) = -<lam, p.n>                    for all p,
    (div q, v) + tau <u, v> = tau <lam, v> + (f, v)             for all v,

where <.,.> is the integral over the boundary of E.  The numerical flux
moments on a node N are

    r_N(mu) = <q.n + tau (u - lam), mu>_N     for trace basis functions mu.

Traces are passed as a list with one coefficient array per incident node, in
the order of ``E.node_ids``.  P0 traces have one coefficient; P1/Q1 traces use
the nodal basis at the node's vertices.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import IllPosedComboError, MisuseError, ShapeError
from .mesh import HyperEdge, is_simplex, rect_sides
from .spaces import (P0_COMBO, SpaceCombo, cell_rule, check_combo, exponents, face_rule,
                     monomial_derivatives, monomials, q_basis, trace_dim, u_basis)


@dataclass(frozen=True, eq=False)
class LocalSolution:
    """Coefficients of u_h and q_h in the monomial dictionary of the local frame."""

    edge_id: int
    u_coeffs: np.ndarray          # (m,)
    q_coeffs: np.ndarray          # (d, m), components in the local frame
    origin: np.ndarray = field(repr=False)
    frame: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.q_coeffs.shape[0]

    def u_local(self, xloc) -> np.ndarray:
        return self.u_coeffs @ monomials(np.atleast_2d(xloc), self.dim)

    def q_local(self, xloc) -> np.ndarray:
        """Flux at local points, shape (npts, d), local components."""
        return (self.q_coeffs @ monomials(np.atleast_2d(xloc), self.dim)).T

    def u_at(self, points) -> np.ndarray:
        return self.u_local(self._to_local(points))

    def q_at(self, points) -> np.ndarray:
        """Flux at ambient points, shape (npts, D), ambient components."""
        return self.q_local(self._to_local(points)) @ self.frame.T

    def _to_local(self, points):
        return (np.atleast_2d(np.asarray(points, dtype=float)) - self.origin) @ self.frame


def kappa_bar(E: HyperEdge) -> float:
    """1 / int_E kappa^{-1}, i.e. kappa/|E| for edgewise constant kappa."""
    return E.kappa / E.volume


def _as_trace(lam, n_faces):
    if np.ndim(lam) == 0:
        return [np.array([float(lam)])] * n_faces
    lam = [np.atleast_1d(np.asarray(v, dtype=float)) for v in lam]
    if len(lam) != n_faces:
        raise MisuseError(f"trace has {len(lam)} entries, edge has {n_faces} nodes")
    return lam


def _p0_values(E: HyperEdge, lam) -> np.ndarray:
    """Mean value of the trace on each face (exact for nodal linear traces)."""
    return np.array([float(np.mean(v)) for v in _as_trace(lam, len(E.faces))])


def _solution(E, u, q) -> LocalSolution:
    return LocalSolution(E.id, np.asarray(u, dtype=float), np.asarray(q, dtype=float),
                         E.barycenter, E.frame)


def _dict_size(d):
    return len(exponents(d))


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def reconstruct_p0(E: HyperEdge, lam, f: float | None = None) -> LocalSolution:
    """Closed form for U=P0, Q=P0d, M=P0 on any polytope."""
    f = E.f_const if f is None else f
    if not E.tau > 0:
        raise IllPosedComboError("P0/P0d/P0 needs tau > 0", edge_id=E.id)
    lv = _p0_values(E, lam)
    meas = np.array([F.measure for F in E.faces])
    nloc = np.array([F.local_normal for F in E.faces])
    d = E.dim
    q0 = -kappa_bar(E) * (lv * meas) @ nloc
    u0 = (lv @ meas) / E.boundary_measure + f * E.volume / (E.tau * E.boundary_measure)
    m = _dict_size(d)
    u = np.zeros(m)
    u[0] = u0
    q = np.zeros((d, m))
    q[:, 0] = q0
    return _solution(E, u, q)


def simplex_second_moment(E: HyperEdge) -> float:
    """int_E |x - x_E|^2 from the closed-form simplex moment formula."""
    V = E.local_vertices  # barycenter at the origin
    d = E.dim
    S = V.T @ V
    s = V.sum(axis=0)
    M = E.volume / ((d + 1) * (d + 2)) * (S + np.outer(s, s))
    return float(np.trace(M))


def radial_face_integral(E: HyperEdge, k: int) -> float:
    """int_N (x - x_E).n over face k, from the face barycenter."""
    F = E.faces[k]
    return float(F.measure * (F.barycenter - E.barycenter) @ F.normal)


def reconstruct_rt0_simplex(E: HyperEdge, lam, f: float | None = None,
                            tau: float | None = None) -> LocalSolution:
    """Closed form for U=P0, Q=RT0, M=P0 on a simplex, any tau >= 0."""
    if not is_simplex(E.shape):
        raise ShapeError(f"RT0 simplex reconstruction needs a simplex, got {E.shape}")
    f = E.f_const if f is None else f
    tau = E.tau if tau is None else tau
    d = E.dim
    lv = _p0_values(E, lam)
    meas = np.array([F.measure for F in E.faces])
    nloc = np.array([F.local_normal for F in E.faces])
    rad = np.array([radial_face_integral(E, k) for k in range(len(E.faces))])
    A = simplex_second_moment(E) / E.kappa
    B = d * d * E.volume ** 2 + tau * E.boundary_measure * A
    int_lam = lv @ meas
    int_rad = lv @ rad
    int_f = f * E.volume
    u0 = (A * tau * int_lam + d * E.volume * int_rad + A * int_f) / B
    c = (d * E.volume * tau * int_lam - tau * E.boundary_measure * int_rad + d * E.volume * int_f) / B
    m = _dict_size(d)
    u = np.zeros(m)
    u[0] = u0
    q = np.zeros((d, m))
    q[:, 0] = -kappa_bar(E) * (lv * meas) @ nloc
    for k in range(d):
        q[k, 1 + k] = c
    return _solution(E, u, q)


def reconstruct_rect(E: HyperEdge, lam, f: float | None = None) -> LocalSolution:
    """Closed form for U=P0, M=P0 and Q in {Q1d, P1d, RT0} on a rectangle.

    The three flux spaces give the same solution, which lies in RT0.  The
    formulas stay valid at tau = 0.
    """
    if E.shape != "rectangle":
        raise ShapeError(f"rectangle reconstruction needs a rectangle, got {E.shape}")
    f = E.f_const if f is None else f
    h1, h2 = rect_sides(E)
    kap, tau = E.kappa, E.tau
    vol, per = E.volume, E.boundary_measure
    lv = _p0_values(E, lam)
    meas = np.array([F.measure for F in E.faces])
    nloc = np.array([F.local_normal for F in E.faces])
    # faces come as N1-, N1+, N2-, N2+
    S1 = lv[0] * meas[0] + lv[1] * meas[1]
    S2 = lv[2] * meas[2] + lv[3] * meas[3]
    int_f = f * vol
    A = 12 * kap * (h1 * S1 - h2 * S2)
    B = 12 * kap * int_f
    C = tau * vol * per + 12 * kap * (h1 ** 2 + h2 ** 2)
    a11 = -(tau * h2 + 6 * kap) / (vol * C) * A + h2 ** 2 / (vol * C) * B
    a22 = (tau * h1 + 6 * kap) / (vol * C) * A + h1 ** 2 / (vol * C) * B
    u0 = vol / C * (tau * (S1 + S2) + 6 * kap / h1 * S1 + 6 * kap / h2 * S2 + int_f)
    u = np.zeros(4)
    u[0] = u0
    q = np.zeros((2, 4))
    q[:, 0] = -kappa_bar(E) * (lv * meas) @ nloc
    q[0, 1] = a11
    q[1, 2] = a22
    return _solution(E, u, q)


def reconstruct_graph(E: HyperEdge, lam, f_integrals=None,
                      combo: SpaceCombo = SpaceCombo("P1", "P1d", "P0")) -> LocalSolution:
    """Closed form on a segment for U, Q in {P0, P1}.

    ``f_integrals`` are (int f phi_a, int f phi_b) with the hat functions of
    the endpoints a = vertex 0 and b = vertex 1; by default they come from the
    edge's constant source.
    """
    if E.shape != "segment":
        raise ShapeError(f"graph reconstruction needs a segment, got {E.shape}")
    if not E.tau > 0:
        raise IllPosedComboError("graph reconstruction needs tau > 0", edge_id=E.id)
    L, kap, tau = E.volume, E.kappa, E.tau
    if f_integrals is None:
        f_integrals = (E.f_const * L / 2, E.f_const * L / 2)
    fa, fb = map(float, f_integrals)
    la, lb = _p0_values(E, lam)
    alpha = kap / L * (la - lb)
    beta = 3 * kap * (fa + fb) / (6 * kap + tau * L) if combo.q_space != "P0d" else 0.0
    q = np.array([[alpha, 2 * beta / L]])
    if combo.u_space == "P0":
        u = np.array([0.5 * (la + lb) + (fa + fb - 2 * beta) / (2 * tau), 0.0])
    else:
        ua = la + (fa - beta) / tau
        ub = lb + (fb - beta) / tau
        u = np.array([0.5 * (ua + ub), (ub - ua) / L])
    return _solution(E, u, q)


# ---------------------------------------------------------------------------
# generic dense local solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LocalOperators:
    """tau- and kappa-independent local integrals of one edge and one combo."""

    ubasis: np.ndarray     # (nu, m)
    qbasis: np.ndarray     # (nq, d, m)
    mass: np.ndarray       # (nq, nq)  int p_i . p_j
    div: np.ndarray        # (nu, nq)  int v_i div p_j
    bmass: np.ndarray      # (nu, nu)  <v_i, v_j> over the boundary
    load: np.ndarray       # (nu,)     int v_i
    face_p: tuple          # per face (nq, nm): <p_i.n, mu_a>
    face_v: tuple          # per face (nu, nm): <v_i, mu_a>
    face_t: tuple          # per face (nm, nm): <mu_a, mu_b>

    @property
    def trace_sizes(self) -> list[int]:
        return [T.shape[0] for T in self.face_t]


_OPS_CACHE: dict = {}
_OPS_CACHE_MAX = 20000


def _ops_key(E: HyperEdge, combo: SpaceCombo):
    return (E.shape, combo, E.vertex_coords.tobytes(), E.frame.tobytes(),
            tuple(F.coords.tobytes() for F in E.faces))


def local_operators(E: HyperEdge, combo: SpaceCombo) -> LocalOperators:
    """Local integrals, cached by geometry so parameter sweeps reuse them."""
    key = _ops_key(E, combo)
    ops = _OPS_CACHE.get(key)
    if ops is None:
        ops = _build_operators(E, combo)
        if len(_OPS_CACHE) >= _OPS_CACHE_MAX:
            _OPS_CACHE.clear()
        _OPS_CACHE[key] = ops
    return ops


def _build_operators(E: HyperEdge, combo: SpaceCombo) -> LocalOperators:
    check_combo(E.shape, combo)
    d = E.dim
    Ub = u_basis(E.shape, combo.u_space)
    Qb = q_basis(E.shape, combo.q_space)
    pts, w = cell_rule(E.shape, E.local_vertices)
    mono = monomials(pts, d)
    dmono = monomial_derivatives(pts, d)
    uv = Ub @ mono                                  # (nu, npts)
    qv = np.einsum("bkm,mp->bkp", Qb, mono)         # (nq, d, npts)
    qdiv = np.einsum("bkm,kmp->bp", Qb, dmono)      # (nq, npts)
    mass = np.einsum("ikp,jkp,p->ij", qv, qv, w)
    div = np.einsum("ip,jp,p->ij", uv, qdiv, w)
    load = uv @ w
    nu = len(Ub)
    bmass = np.zeros((nu, nu))
    face_p, face_v, face_t = [], [], []
    for F in E.faces:
        cl = (F.coords - E.barycenter) @ E.frame
        fp, fw, mu = face_rule(cl, F.measure, combo.m_space)
        fm = monomials(fp, d)
        fu = Ub @ fm
        fqn = np.einsum("bkm,mp,k->bp", Qb, fm, F.local_normal)
        bmass += np.einsum("ip,jp,p->ij", fu, fu, fw)
        face_p.append(np.einsum("ip,ap,p->ia", fqn, mu, fw))
        face_v.append(np.einsum("ip,ap,p->ia", fu, mu, fw))
        face_t.append(np.einsum("ap,bp,p->ab", mu, mu, fw))
    return LocalOperators(Ub, Qb, mass, div, bmass, load, tuple(face_p), tuple(face_v),
                          tuple(face_t))


def _factor(E: HyperEdge, ops: LocalOperators, kappa: float, tau: float):
    nq = len(ops.qbasis)
    K = np.block([[ops.mass / kappa, -ops.div.T], [ops.div, tau * ops.bmass]])
    norm = np.abs(K).sum(axis=1).max()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(K, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= 1e-12 * norm:
        cond = float("inf") if pivots.min() == 0 else norm / pivots.min()
        raise IllPosedComboError(
            f"singular local system on edge {E.id} (tau={tau}, min pivot {pivots.min():.3e})",
            edge_id=E.id, condition=cond)
    return (lu, piv), nq


def _rhs_columns(ops: LocalOperators, tau: float, f: float | None):
    """Right-hand sides for unit trace coefficients (and the source if given)."""
    cols = []
    for P, V in zip(ops.face_p, ops.face_v):
        cols.append(np.vstack([-P, tau * V]))
    R = np.hstack(cols)
    if f is not None:
        src = np.concatenate([np.zeros(len(ops.qbasis)), f * ops.load])
        R = np.hstack([R, src[:, None]])
    return R


def condensed_local(E: HyperEdge, combo: SpaceCombo, kappa=None, tau=None, f=None):
    """Linear response of the flux moments of E to its traces and its source.

    Returns (R, r_f): the moments for trace vector ``lam`` (faces stacked in
    node order) and source ``f`` are ``R @ lam + r_f``.
    """
    kappa = E.kappa if kappa is None else kappa
    tau = E.tau if tau is None else tau
    f = E.f_const if f is None else f
    ops = local_operators(E, combo)
    fac, nq = _factor(E, ops, kappa, tau)
    rhs = _rhs_columns(ops, tau, f)
    Z = scipy.linalg.lu_solve(fac, rhs, check_finite=False)
    Zq, Zu = Z[:nq], Z[nq:]
    Pall = np.hstack(ops.face_p)
    Vall = np.hstack(ops.face_v)
    out = Pall.T @ Zq + tau * (Vall.T @ Zu)
    T = scipy.linalg.block_diag(*ops.face_t)
    R = out[:, :-1] - tau * T
    return R, out[:, -1]


def generic_local_solve(E: HyperEdge, combo: SpaceCombo, lam, f: float | None = None,
                        tau: float | None = None) -> LocalSolution:
    """Dense solve of the local problem for any supported combo."""
    f = E.f_const if f is None else f
    tau = E.tau if tau is None else tau
    ops = local_operators(E, combo)
    if np.ndim(lam) == 0:
        lam = [np.full(n, float(lam)) for n in ops.trace_sizes]
    lam = _as_trace(lam, len(E.faces))
    for v, n in zip(lam, ops.trace_sizes):
        if len(v) != n:
            raise MisuseError(f"trace block of size {len(v)}, expected {n}")
    fac, nq = _factor(E, ops, E.kappa, tau)
    lam_all = np.concatenate(lam)
    rhs = _rhs_columns(ops, tau, f) @ np.append(lam_all, 1.0)
    z = scipy.linalg.lu_solve(fac, rhs, check_finite=False)
    u = z[nq:] @ ops.ubasis
    q = np.einsum("b,bkm->km", z[:nq], ops.qbasis)
    return _solution(E, u, q)


def flux_trace(E: HyperEdge, node_id: int, sol: LocalSolution, lam, combo: SpaceCombo,
               tau: float | None = None) -> np.ndarray:
    """Moments <q.n + tau (u - lam), mu>_N for the trace basis of node N."""
    tau = E.tau if tau is None else tau
    k = E.face_index(node_id)
    F = E.faces[k]
    lam_n = _as_trace(lam, len(E.faces))[k]
    cl = (F.coords - E.barycenter) @ E.frame
    fp, fw, mu = face_rule(cl, F.measure, combo.m_space)
    if len(lam_n) == 1 and mu.shape[0] > 1:
        lam_n = np.repeat(lam_n, mu.shape[0])
    lam_pts = lam_n @ mu if len(lam_n) == mu.shape[0] else np.full(len(fw), lam_n[0])
    flux = sol.q_local(fp) @ F.local_normal + tau * (sol.u_local(fp) - lam_pts)
    return mu @ (flux * fw)


def local_solve(E: HyperEdge, combo: SpaceCombo, lam, f: float | None = None) -> LocalSolution:
    """Closed form where one exists, dense solve otherwise."""
    u, q, m = combo.u_space, combo.q_space, combo.m_space
    if m == "P0" or E.dim == 1:
        if E.shape == "segment" and u in ("P0", "P1", "Q1") and E.tau > 0:
            c = SpaceCombo("P1" if u != "P0" else "P0", "P0d" if q == "P0d" else "P1d", "P0")
            return reconstruct_graph(E, lam, None if f is None else (f * E.volume / 2,) * 2, c)
        if combo == P0_COMBO:
            return reconstruct_p0(E, lam, f)
        if u == "P0" and q == "RT0" and is_simplex(E.shape):
            return reconstruct_rt0_simplex(E, lam, f)
        if u == "P0" and q in ("RT0", "P1d", "Q1d") and E.shape == "rectangle":
            return reconstruct_rect(E, lam, f)
    return generic_local_solve(E, combo, lam, f)


def trace_sizes(E: HyperEdge, combo: SpaceCombo) -> list[int]:
    return [trace_dim(len(F.coords), combo.m_space) for F in E.faces]


def second_moment_quadrature(E: HyperEdge) -> float:
    """int_E |x - x_E|^2 by quadrature (independent check of the moment formula)."""
    pts, w = cell_rule(E.shape, E.local_vertices)
    return float((pts ** 2).sum(axis=1) @ w)


def simplex_height_identity(E: HyperEdge) -> float:
    """d|E|/(d+1), the value every face of a simplex gives for int_N (x-x_E).n."""
    return E.dim * E.volume / (E.dim + 1)


__all__ = [
    "LocalSolution", "LocalOperators", "kappa_bar", "reconstruct_p0", "reconstruct_rt0_simplex",
    "reconstruct_rect", "reconstruct_graph", "generic_local_solve", "flux_trace", "local_solve",
    "local_operators", "condensed_local", "simplex_second_moment", "radial_face_integral",
    "second_moment_quadrature", "simplex_height_identity", "trace_sizes",
]

"""Reference problems: the six two-dimensional counterexamples and the
hypercube, sheared simplex and sheared quadrilateral experiments.

All counterexamples use kappa = 1, f = 0 and Dirichlet data on every
boundary node.  Unit squares are E1 = (0,1)^2, E2 = (1,2)x(0,1),
E3 = (2,3)x(0,1), so x_E1 = (0.5, 0.5).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .mesh import (NEUMANN, Hypergraph, apply_shear_map, build_single_hypercube,
                   build_structured_rect_mesh, build_structured_simplex_mesh,
                   dirichlet_face_constants, dirichlet_vertex_values)
from .solve import Solution, solve
from .spaces import SpaceCombo

COUNTEREXAMPLE_IDS = ("5.1", "5.2", "5.3", "5.4", "5.5", "5.6")


@dataclass
class CounterexampleResult:
    cid: str
    solution: Solution
    computed: dict
    expected: dict
    params: dict = field(default_factory=dict)

    @property
    def deviation(self) -> float:
        return max(abs(self.computed[k] - self.expected[k]) for k in self.expected)


def squares(n: int, tau: float = 1.0, **kwargs) -> Hypergraph:
    """Row of ``n`` unit squares on (0,n) x (0,1), all boundary nodes Dirichlet."""
    return build_structured_rect_mesh(n, 1, float(n), 1.0, tau=tau, **kwargs)


def _vertical_node(mesh: Hypergraph, x: float) -> int:
    return mesh.find_node([x, 0.5])


def _nodal(sol: Solution, nid: int, point) -> float:
    """Trace value at a vertex of a node with nodal (P1/Q1) coefficients."""
    node = sol.mesh.nodes[nid]
    k = int(np.argmin(np.linalg.norm(node.coords - np.asarray(point, dtype=float), axis=1)))
    v = sol.lam[nid]
    return float(v[k] if len(v) > 1 else v[0])


def rectangle_p1_bilinear(a=2.0, b=None, c=2.0, d=None, hx=1.0, hy=1.0) -> CounterexampleResult:
    """Single rectangle, P1/P1d/P1, g = (a(x-x_E)+b)(c(y-y_E)+d).

    u_h = ad(x-x_E) + bc(y-y_E) + bd; with a=c=2, b=hx, d=hy the lower left
    corner value is -hx*hy.
    """
    b = hx if b is None else b
    d = hy if d is None else d
    mesh = build_structured_rect_mesh(1, 1, hx, hy, tau=1.0)
    xe, ye = hx / 2, hy / 2
    mesh = mesh.with_dirichlet(dirichlet_vertex_values(
        mesh, lambda p: (a * (p[0] - xe) + b) * (c * (p[1] - ye) + d)))
    sol = solve(mesh, SpaceCombo("P1", "P1d", "P1"))
    u = sol.locals[0]
    probes = [(0.0, 0.0), (hx, 0.0), (0.0, hy), (hx, hy), (xe, ye)]
    comp, exp = {}, {}
    for p in probes:
        comp[f"u{p}"] = float(u.u_at(p)[0])
        exp[f"u{p}"] = a * d * (p[0] - xe) + b * c * (p[1] - ye) + b * d
        q = u.q_at(p)[0]
        comp[f"qx{p}"], comp[f"qy{p}"] = float(q[0]), float(q[1])
        exp[f"qx{p}"] = -a * (c * (p[1] - ye) + d)
        exp[f"qy{p}"] = -c * (a * (p[0] - xe) + b)
    comp["u_corner"] = comp["u(0.0, 0.0)"]
    exp["u_corner"] = -hx * hy if (a, b, c, d) == (2.0, hx, 2.0, hy) else exp["u(0.0, 0.0)"]
    return CounterexampleResult("5.1", sol, comp, exp, dict(a=a, b=b, c=c, d=d, hx=hx, hy=hy))


def rectangle_p1_two_squares(tau: float = 1.0) -> CounterexampleResult:
    """Two unit squares, P1/P1d/P1; u(0,0) = -1."""
    mesh = squares(2, tau)

    def g(p):
        if p[0] <= 1.0:
            return (2 * (p[0] - 0.5) + 1) * (2 * (p[1] - 0.5) + 1)
        return (2 * (p[0] - 1.5) + 3) * (2 * (p[1] - 0.5) + 1)

    mesh = mesh.with_dirichlet(dirichlet_vertex_values(mesh, g))
    sol = solve(mesh, SpaceCombo("P1", "P1d", "P1"))
    n12 = _vertical_node(mesh, 1.0)
    comp = {"u_corner": float(sol.locals[0].u_at((0.0, 0.0))[0]),
            "u_E2(2,1)": float(sol.locals[1].u_at((2.0, 1.0))[0]),
            "lam_top": _nodal(sol, n12, (1, 1)), "lam_bottom": _nodal(sol, n12, (1, 0))}
    exp = {"u_corner": -1.0, "u_E2(2,1)": 2 * 0.5 + 6 * 0.5 + 3,
           "lam_top": g((1.0, 1.0)), "lam_bottom": g((1.0, 0.0))}
    return CounterexampleResult("5.1", sol, comp, exp, dict(tau=tau, mesh="two_squares"))


def squares_q1_p1d(tau1: float = 1.0, tau2: float | None = None) -> CounterexampleResult:
    """Two unit squares, Q1/P1d/P1, g = 0 for x <= 1 and x - 1 otherwise."""
    tau2 = tau1 if tau2 is None else tau2
    mesh = squares(2, [tau1, tau2])
    mesh = mesh.with_dirichlet(dirichlet_vertex_values(mesh, lambda p: max(p[0] - 1.0, 0.0)))
    sol = solve(mesh, SpaceCombo("Q1", "P1d", "P1"))
    n12 = _vertical_node(mesh, 1.0)
    lam = 8.0 / (40.0 + 3.0 * (tau1 + tau2))
    comp = {"lam_top": _nodal(sol, n12, (1, 1)), "lam_bottom": _nodal(sol, n12, (1, 0)),
            "u(0,0)": float(sol.locals[0].u_at((0, 0))[0]),
            "u(1,0)": float(sol.locals[0].u_at((1, 0))[0]),
            "u(2,1)": float(sol.locals[1].u_at((2, 1))[0])}
    exp = {"lam_top": lam, "lam_bottom": lam}
    if tau1 == tau2:
        exp.update({"u(0,0)": -lam / 8, "u(1,0)": 5 * lam / 8, "u(2,1)": 1 - lam / 8})
    return CounterexampleResult("5.2", sol, comp, exp, dict(tau1=tau1, tau2=tau2))


def centered_square_p1_q1d(tau: float = 1.0) -> CounterexampleResult:
    """Square (-1/2,1/2)^2, P1/Q1d/P1, g = (x+1/2)(y+1/2)."""
    mesh = build_structured_rect_mesh(1, 1, 1.0, 1.0, origin=(-0.5, -0.5), tau=tau)
    mesh = mesh.with_dirichlet(dirichlet_vertex_values(mesh, lambda p: (p[0] + .5) * (p[1] + .5)))
    sol = solve(mesh, SpaceCombo("P1", "Q1d", "P1"))
    u = sol.locals[0]
    comp, exp = {}, {}
    for p in [(-.5, -.5), (.5, -.5), (-.5, .5), (.5, .5), (0.1, -0.3)]:
        comp[f"u{p}"] = float(u.u_at(p)[0])
        exp[f"u{p}"] = (p[0] + p[1]) / 2 + 0.25
        q = u.q_at(p)[0]
        comp[f"qx{p}"], comp[f"qy{p}"] = float(q[0]), float(q[1])
        exp[f"qx{p}"], exp[f"qy{p}"] = -(p[1] + .5), -(p[0] + .5)
    comp["u_corner"], exp["u_corner"] = comp["u(-0.5, -0.5)"], -0.25
    return CounterexampleResult("5.3", sol, comp, exp, dict(tau=tau))


def _bilinear_corner_data(p):
    if p[0] <= 1.0:
        return -(p[0] - 0.5 - 0.5) * (p[1] - 0.5 + 0.5)
    return 0.0


def squares_bilinear_data(n_squares: int, tau: float = 1.0) -> Hypergraph:
    """Two or three unit squares with the bilinear boundary data of E1."""
    if n_squares not in (2, 3):
        raise InputError("counterexample 5.4 uses two or three squares")
    mesh = squares(n_squares, tau)
    return mesh.with_dirichlet(dirichlet_vertex_values(mesh, _bilinear_corner_data))


def squares_q1_q1d_p1(tau: float = 3.0, n_squares: int = 2) -> CounterexampleResult:
    """Q1/Q1d/P1 on two or three unit squares, g = -(x-x_E1-1/2)(y-y_E1+1/2) on E1."""
    mesh = squares_bilinear_data(n_squares, tau)
    sol = solve(mesh, SpaceCombo("Q1", "Q1d", "P1"))
    n12 = _vertical_node(mesh, 1.0)
    comp = {"lam1": _nodal(sol, n12, (1, 1)), "lam2": _nodal(sol, n12, (1, 0))}
    if n_squares == 2:
        s = (4 * tau + 6) / (3 * tau ** 2 + 29 * tau + 30)
        dlt = (4 * tau + 6) / (5 * tau ** 2 + 29 * tau + 12)
        exp = {"lam1": (s + dlt) / 2, "lam2": (s - dlt) / 2}
    else:
        n23 = _vertical_node(mesh, 2.0)
        comp["lam3"] = _nodal(sol, n23, (2, 1))
        comp["lam4"] = _nodal(sol, n23, (2, 0))
        exp = {}
        if tau == 3.0:
            exp = {"lam1": 32 / 255, "lam2": 0.0, "lam3": -2 / 255, "lam4": 0.0}
    return CounterexampleResult("5.4", sol, comp, exp, dict(tau=tau, n_squares=n_squares))


def squares_q1_q1d_p0(tau: float = 1.0) -> CounterexampleResult:
    """Two unit squares, Q1/Q1d/P0, g = 1 on the left face and 0 elsewhere."""
    mesh = squares(2, tau)
    mesh = mesh.with_dirichlet(dirichlet_face_constants(mesh, lambda p: 1.0 if p[0] == 0 else 0.0))
    sol = solve(mesh, SpaceCombo("Q1", "Q1d", "P0"))
    n12 = _vertical_node(mesh, 1.0)
    lam = -(tau ** 2 + tau + 6) / (2 * (3 * tau ** 2 + 29 * tau + 30))
    alpha = 3 * tau / (4 * tau + 6)
    comp = {"lam": float(sol.lam[n12][0])}
    exp = {"lam": lam}
    for p in [(0, 0), (1, 1), (0.25, 0.75)]:
        comp[f"u1{p}"] = float(sol.locals[0].u_at(p)[0])
        exp[f"u1{p}"] = alpha * (lam - 1) * (p[0] - 0.5) + (1 + lam) / 4
    for p in [(1, 0), (2, 1)]:
        comp[f"u2{p}"] = float(sol.locals[1].u_at(p)[0])
        exp[f"u2{p}"] = -alpha * lam * (p[0] - 1.5) + lam / 4
    return CounterexampleResult("5.5", sol, comp, exp, dict(tau=tau))


def squares_rt0_zero_tau() -> CounterexampleResult:
    """Two unit squares, P0/RT0/P0 with tau = 0, g = 10 on the left face."""
    mesh = squares(2, 0.0)
    mesh = mesh.with_dirichlet(dirichlet_face_constants(mesh, lambda p: 10.0 if p[0] == 0 else 0.0))
    sol = solve(mesh, SpaceCombo("P0", "RT0", "P0"))
    n12 = _vertical_node(mesh, 1.0)
    comp = {"u1": float(sol.locals[0].u_coeffs[0]), "u2": float(sol.locals[1].u_coeffs[0]),
            "lam": float(sol.lam[n12][0])}
    exp = {"u1": 9 / 4, "u2": -1 / 4, "lam": -1.0}
    for p in [(0.2, 0.9), (0.5, 0.5)]:
        q = sol.locals[0].q_at(p)[0]
        comp[f"q1x{p}"], comp[f"q1y{p}"] = float(q[0]), float(q[1])
        exp[f"q1x{p}"], exp[f"q1y{p}"] = 11 - 27 * (p[0] - 0.5), 27 * (p[1] - 0.5)
    for p in [(1.7, 0.1)]:
        q = sol.locals[1].q_at(p)[0]
        comp[f"q2x{p}"], comp[f"q2y{p}"] = float(q[0]), float(q[1])
        exp[f"q2x{p}"], exp[f"q2y{p}"] = -1 + 3 * (p[0] - 1.5), -3 * (p[1] - 0.5)
    return CounterexampleResult("5.6", sol, comp, exp, {})


def run_counterexample(cid: str, tau: float | None = None, params: dict | None = None
                       ) -> CounterexampleResult:
    """Build, solve and compare one counterexample with its closed-form solution."""
    params = dict(params or {})
    cid = str(cid)
    if tau is not None:
        params.setdefault("tau", tau)
    try:
        if cid == "5.1":
            if params.pop("two_squares", False):
                return rectangle_p1_two_squares(**params)
            params.pop("tau", None)
            return rectangle_p1_bilinear(**params)
        if cid == "5.2":
            if "tau" in params:
                params.setdefault("tau1", params.pop("tau"))
            return squares_q1_p1d(**params)
        if cid == "5.3":
            return centered_square_p1_q1d(**params)
        if cid == "5.4":
            params.setdefault("tau", 3.0)
            return squares_q1_q1d_p1(**params)
        if cid == "5.5":
            return squares_q1_q1d_p0(**params)
        if cid == "5.6":
            params.pop("tau", None)
            return squares_rt0_zero_tau(**params)
    except TypeError as exc:
        raise InputError(f"bad parameters for counterexample {cid}: {exc}") from exc
    raise InputError(f"unknown counterexample {cid!r}; expected one of {COUNTEREXAMPLE_IDS}")


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _left_one(p) -> float:
    return 1.0 if abs(p[0]) < 1e-12 else 0.0


def _right_face(p) -> bool:
    return abs(p[0] - 1.0) < 1e-12


def unit_hypercube(d: int, tau: float = 1.0) -> Hypergraph:
    """(0,1)^d as one hyperedge; Neumann on x1=1, g=1 on x1=0, g=0 elsewhere."""
    mesh = build_single_hypercube(d, tau=tau, neumann=_right_face)
    return mesh.with_dirichlet(dirichlet_face_constants(mesh, _left_one))


def neumann_mean(sol: Solution) -> float:
    """Face-measure weighted mean of lambda over all Neumann nodes."""
    num = den = 0.0
    for n in sol.mesh.nodes:
        if n.boundary_kind == NEUMANN:
            num += n.measure * float(np.mean(sol.lam[n.id]))
            den += n.measure
    return num / den


def sheared_simplex_reference(d: int) -> Hypergraph:
    """Reference structured simplex mesh with the shear experiment's boundary data."""
    mesh = build_structured_simplex_mesh(d, tau=0.0, neumann=_right_face)
    return mesh.with_dirichlet(dirichlet_face_constants(mesh, _left_one))


# Probe nodes in reference coordinates (face barycenters).  d=2: the face from
# (0.5,1) to (1,0.5).  d=3: the face of the top subcube spanned by its Kuhn
# diagonal (0.5,1,1)-(1,0.5,0.5) and the corner (0.5,0.5,0.5).
SIMPLEX_PROBE = {2: (0.75, 0.75), 3: (2 / 3, 2 / 3, 2 / 3)}


def sheared_simplex(d: int, theta: float) -> tuple[Hypergraph, int]:
    ref = sheared_simplex_reference(d)
    nid = ref.find_node(SIMPLEX_PROBE[d])
    return apply_shear_map(ref, theta), nid


# The rightmost vertical node at the top of the Neumann face.
QUAD_PROBE = (1.0, 0.95)


def sheared_quads(theta: float = 1.5, n: int = 10, tau: float = 1.0) -> tuple[Hypergraph, int]:
    ref = build_structured_rect_mesh(n, n, tau=tau, neumann=_right_face)
    ref = ref.with_dirichlet(dirichlet_face_constants(ref, _left_one))
    probe = (1.0, 1.0 - 0.5 / n)
    return apply_shear_map(ref, theta), ref.find_node(probe)


def with_uniform_tau(mesh: Hypergraph, tau: float) -> Hypergraph:
    return mesh.with_edge_params(tau=tau)


__all__ = [
    "COUNTEREXAMPLE_IDS", "CounterexampleResult", "run_counterexample", "squares",
    "rectangle_p1_bilinear", "rectangle_p1_two_squares", "squares_q1_p1d",
    "centered_square_p1_q1d", "squares_q1_q1d_p1", "squares_q1_q1d_p0", "squares_rt0_zero_tau",
    "unit_hypercube", "neumann_mean", "sheared_simplex", "sheared_simplex_reference",
    "sheared_quads", "with_uniform_tau", "squares_bilinear_data", "SIMPLEX_PROBE", "QUAD_PROBE",
]

"""Sufficient positivity conditions, solution checks and tau thresholds."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.optimize

from .errors import BracketError
from .mesh import HyperEdge, rect_sides
from .solve import Solution


def check_angle_condition(E: HyperEdge, tol: float = 1e-12) -> bool:
    """True iff all pairs of distinct outward face normals have n.n' <= tol."""
    N = np.array([F.normal for F in E.faces])
    G = N @ N.T
    iu = np.triu_indices(len(N), 1)
    return bool(np.all(G[iu] <= tol))


def tau_lower_bound_p0(E: HyperEdge) -> float:
    """|dE| / int_E kappa^{-1}: the stabilization that makes P0 positivity preserving."""
    return E.boundary_measure * E.kappa / E.volume


def rect_s0(rho: float | None, h1: float, h2: float) -> float:
    """Smallest s >= 0 with (s+1)(s P^2 + 12 H) >= 12 |E| rho (2s + 3).

    P = 2(h1 + h2), H = h1^2 + h2^2 and s = tau |E| / (kappa P).  ``rho``
    defaults to the aspect ratio max(h1,h2)/min(h1,h2), which is the binding
    value when both face families are checked.
    """
    if rho is None:
        rho = max(h1, h2) / min(h1, h2)
    P = 2 * (h1 + h2)
    H = h1 * h1 + h2 * h2
    area = h1 * h2
    a = P * P
    b = P * P + 12 * H - 24 * area * rho
    c = 12 * H - 36 * area * rho
    if c >= 0:
        return 0.0
    return (-b + math.sqrt(b * b - 4 * a * c)) / (2 * a)


def rect_tau_threshold(E: HyperEdge) -> float:
    """tau = s0 kappa |dE| / |E| for a rectangle (2 kappa / h on a square of side h)."""
    h1, h2 = rect_sides(E)
    return rect_s0(None, h1, h2) * E.kappa * E.boundary_measure / E.volume


@dataclass(frozen=True)
class EdgeConditions:
    edge_id: int
    angle_ok: bool
    tau_min_p0: float
    tau_ok_p0: bool
    tau_rect: float | None
    tau_ok_rect: bool | None


def edge_conditions(E: HyperEdge) -> EdgeConditions:
    bound = tau_lower_bound_p0(E)
    rect = rect_tau_threshold(E) if E.shape == "rectangle" else None
    return EdgeConditions(
        edge_id=E.id,
        angle_ok=check_angle_condition(E),
        tau_min_p0=bound,
        tau_ok_p0=E.tau >= bound * (1 - 1e-12),
        tau_rect=rect,
        tau_ok_rect=None if rect is None else E.tau >= rect * (1 - 1e-12),
    )


@dataclass(frozen=True)
class PositivityReport:
    min_lambda: float
    argmin_lambda: tuple       # (node id, basis index)
    min_u: float
    argmin_u: tuple            # (edge id, vertex index)
    lambda_nonneg: bool
    u_nonneg: bool
    scale: float
    conditions: tuple          # EdgeConditions per edge

    @property
    def nonneg(self) -> bool:
        return self.lambda_nonneg and self.u_nonneg


def positivity_report(sol: Solution, combo=None) -> PositivityReport:
    """Minima of lambda (at its nodal points) and u (at cell vertices)."""
    min_l, arg_l = math.inf, (-1, -1)
    for nid, v in enumerate(sol.lam):
        k = int(np.argmin(v))
        if v[k] < min_l:
            min_l, arg_l = float(v[k]), (nid, k)
    min_u, arg_u = math.inf, (-1, -1)
    for E in sol.mesh.edges:
        vals = sol.u_vertices(E.id)
        k = int(np.argmin(vals))
        if vals[k] < min_u:
            min_u, arg_u = float(vals[k]), (E.id, k)
    tol = -1e-10 * sol.scale
    conds = tuple(edge_conditions(E) for E in sol.mesh.edges)
    return PositivityReport(min_l, arg_l, min_u, arg_u, min_l >= tol, min_u >= tol,
                            sol.scale, conds)


def tau_threshold_bisect(probe: Callable[[float], float], tau_lo: float, tau_hi: float,
                         xtol: float = 1e-6) -> float:
    """Bisection for the tau where ``probe`` changes sign.

    ``probe`` maps a uniform tau to the monitored value (e.g. lambda on one
    node).  Raises BracketError without a sign change on [tau_lo, tau_hi].
    """
    f_lo, f_hi = probe(tau_lo), probe(tau_hi)
    if f_lo == 0:
        return float(tau_lo)
    if f_hi == 0:
        return float(tau_hi)
    if np.sign(f_lo) == np.sign(f_hi):
        raise BracketError(f"no sign change on [{tau_lo}, {tau_hi}] "
                           f"(values {f_lo:.3e}, {f_hi:.3e})")
    return float(scipy.optimize.bisect(probe, tau_lo, tau_hi, xtol=xtol))

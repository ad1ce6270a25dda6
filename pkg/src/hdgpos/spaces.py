"""Space combinations, local polynomial bases and exact quadrature.

Every supported space lives inside the monomial dictionary with exponents in
{0,1}^d, written in the local frame of a hyperedge (origin at the barycenter,
axes along the cell sides for boxes).  Dictionary order:

    d=1: 1, x1
    d=2: 1, x1, x2, x1x2
    d=3: 1, x1, x2, x3, x1x2, x1x3, x2x3, x1x2x3

Scalar functions are coefficient vectors over the dictionary; vector-valued
basis functions are (d, m) coefficient matrices.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import MisuseError, ShapeError
from .mesh import SHAPE_DIM, is_orthogonal_box, is_simplex

U_SPACES = ("P0", "P1", "Q1")
Q_SPACES = ("P0d", "P1d", "Q1d", "RT0")
M_SPACES = ("P0", "P1", "Q1")


@dataclass(frozen=True)
class SpaceCombo:
    """The triple (U(E), Q(E), M(N)) selecting the discretization."""

    u_space: str = "P0"
    q_space: str = "P0d"
    m_space: str = "P0"

    def __post_init__(self):
        if self.u_space not in U_SPACES:
            raise MisuseError(f"unknown u space {self.u_space!r}")
        if self.q_space not in Q_SPACES:
            raise MisuseError(f"unknown q space {self.q_space!r}")
        if self.m_space not in M_SPACES:
            raise MisuseError(f"unknown trace space {self.m_space!r}")

    @classmethod
    def parse(cls, text: str) -> "SpaceCombo":
        """Parse ``"P0/RT0/P0"`` style strings."""
        parts = [p.strip() for p in text.replace(",", "/").split("/")]
        if len(parts) != 3:
            raise MisuseError(f"space combo must have three parts, got {text!r}")
        return cls(*parts)

    def __str__(self):
        return f"{self.u_space}/{self.q_space}/{self.m_space}"

    @property
    def tau_zero_ok(self) -> bool:
        """Whether tau = 0 can give a well-posed local problem."""
        return self.q_space != "P0d" and self.u_space == "P0"


P0_COMBO = SpaceCombo("P0", "P0d", "P0")
RT0_COMBO = SpaceCombo("P0", "RT0", "P0")


@lru_cache(maxsize=None)
def exponents(d: int) -> np.ndarray:
    """Exponent table (m, d) of the monomial dictionary, in dictionary order."""
    rows = [tuple(0 for _ in range(d))]
    for r in range(1, d + 1):
        for combo in itertools.combinations(range(d), r):
            rows.append(tuple(1 if k in combo else 0 for k in range(d)))
    out = np.array(rows, dtype=int)
    out.setflags(write=False)
    return out


def monomials(points: np.ndarray, d: int) -> np.ndarray:
    """Values (m, npts) of the dictionary monomials at local points (npts, d)."""
    P = np.atleast_2d(points)
    E = exponents(d)
    return np.stack([np.prod(np.where(e == 1, P, 1.0), axis=1) for e in E])


def monomial_derivatives(points: np.ndarray, d: int) -> np.ndarray:
    """Partial derivatives (d, m, npts) of the dictionary monomials."""
    P = np.atleast_2d(points)
    E = exponents(d)
    out = np.zeros((d, len(E), len(P)))
    for k in range(d):
        for i, e in enumerate(E):
            if e[k] == 0:
                continue
            ee = e.copy()
            ee[k] = 0
            out[k, i] = np.prod(np.where(ee == 1, P, 1.0), axis=1)
    return out


def _index(d: int, exps) -> int:
    E = exponents(d)
    return int(np.flatnonzero((E == np.asarray(exps)).all(axis=1))[0])


def check_combo(shape: str, combo: SpaceCombo, face_sizes=None) -> None:
    """Raise ShapeError if ``combo`` is not supported on ``shape``."""
    d = SHAPE_DIM[shape]
    if d == 1:
        return
    simplex = is_simplex(shape)
    ortho = is_orthogonal_box(shape)
    if combo.u_space == "Q1" and not ortho:
        raise ShapeError(f"U=Q1 needs a rectangle or cuboid, got {shape}")
    if combo.q_space == "Q1d" and not ortho:
        raise ShapeError(f"Q=Q1d needs a rectangle or cuboid, got {shape}")
    if combo.q_space == "RT0" and not (simplex or ortho):
        raise ShapeError(f"Q=RT0 needs a simplex or a rectangle/cuboid, got {shape}")
    if combo.m_space == "P1" and not (simplex or d == 2):
        raise ShapeError(f"M=P1 needs simplex faces, got {shape}")
    if combo.m_space == "Q1" and not (ortho or d == 2):
        raise ShapeError(f"M=Q1 needs box faces, got {shape}")


def u_basis(shape: str, u_space: str) -> np.ndarray:
    """Scalar basis as rows of coefficients over the dictionary, shape (nu, m)."""
    d = SHAPE_DIM[shape]
    m = len(exponents(d))
    if u_space == "P0":
        idx = [0]
    elif u_space == "P1" or d == 1:
        idx = list(range(d + 1))
    else:
        idx = list(range(m))
    return np.eye(m)[idx]


def q_basis(shape: str, q_space: str) -> np.ndarray:
    """Vector basis as coefficient matrices, shape (nq, d, m)."""
    d = SHAPE_DIM[shape]
    m = len(exponents(d))
    out = []

    def unit(k, i):
        C = np.zeros((d, m))
        C[k, i] = 1.0
        return C

    if d == 1 and q_space != "P0d":
        q_space = "P1d"
    if q_space == "P0d":
        out = [unit(k, 0) for k in range(d)]
    elif q_space == "P1d":
        out = [unit(k, i) for k in range(d) for i in range(d + 1)]
    elif q_space == "Q1d":
        out = [unit(k, i) for k in range(d) for i in range(m)]
    elif q_space == "RT0":
        out = [unit(k, 0) for k in range(d)]
        if is_simplex(shape):
            C = np.zeros((d, m))
            for k in range(d):
                C[k, 1 + k] = 1.0
            out.append(C)
        else:
            out += [unit(k, 1 + k) for k in range(d)]
    return np.array(out)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _gauss01(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def reference_box_rule(k: int, n: int = 3):
    """Tensor Gauss rule on [0,1]^k; returns (points (npts,k), weights)."""
    if k == 0:
        return np.zeros((1, 0)), np.ones(1)
    x, w = _gauss01(n)
    pts = np.array(list(itertools.product(x, repeat=k)))
    wts = np.array([np.prod(c) for c in itertools.product(w, repeat=k)])
    return pts, wts


@lru_cache(maxsize=None)
def reference_simplex_rule(k: int, n: int = 4):
    """Collapsed Gauss rule on the unit k-simplex (weights sum to 1/k!)."""
    if k == 0:
        return np.zeros((1, 0)), np.ones(1)
    if k == 1:
        return reference_box_rule(1, n)
    x, w = _gauss01(n)
    pts, wts = [], []
    if k == 2:
        for (s, ws), (t, wt) in itertools.product(zip(x, w), repeat=2):
            pts.append([s, (1 - s) * t])
            wts.append(ws * wt * (1 - s))
    elif k == 3:
        for (s, ws), (t, wt), (r, wr) in itertools.product(zip(x, w), repeat=3):
            pts.append([s, (1 - s) * t, (1 - s) * (1 - t) * r])
            wts.append(ws * wt * wr * (1 - s) ** 2 * (1 - t))
    else:
        raise ValueError("simplex rule supports k <= 3")
    return np.array(pts), np.array(wts)


def cell_rule(shape: str, local_vertices: np.ndarray):
    """Quadrature (points in local coordinates, weights) on a cell."""
    d = SHAPE_DIM[shape]
    L = local_vertices
    if is_simplex(shape):
        ref, w = reference_simplex_rule(d)
        J = (L[1:d + 1] - L[0]).T
    else:
        ref, w = reference_box_rule(d)
        J = np.stack([L[2 ** k] - L[0] for k in range(d)]).T
    pts = L[0] + ref @ J.T
    return pts, w * abs(np.linalg.det(J))


def face_rule(face_coords_local: np.ndarray, measure: float, m_space: str):
    """Quadrature on a face plus its nodal trace basis.

    Returns (points (npts, d) in local cell coordinates, weights, trace basis
    values (nm, npts)).  The trace basis depends only on the face vertex
    order, so it is shared by all cells incident to the node.
    """
    C = face_coords_local
    k = len(C)
    if k == 1:
        return C.copy(), np.ones(1), np.ones((1, 1))
    if k == 2:
        ref, w = reference_box_rule(1)
        t = ref[:, 0]
        nodal = np.stack([1 - t, t])
    elif k == 3:
        ref, w = reference_simplex_rule(2)
        w = w * 2.0
        nodal = np.stack([1 - ref[:, 0] - ref[:, 1], ref[:, 0], ref[:, 1]])
    else:
        ref, w = reference_box_rule(2)
        t1, t2 = ref[:, 0], ref[:, 1]
        nodal = np.stack([(1 - t1) * (1 - t2), t1 * (1 - t2), (1 - t1) * t2, t1 * t2])
    A = (C[1:3] - C[0]) if k >= 3 else (C[1:2] - C[0])
    pts = C[0] + ref @ A
    if m_space == "P0":
        basis = np.ones((1, len(w)))
    else:
        if m_space == "P1" and k == 4:
            raise ShapeError("P1 traces are only defined on simplex faces")
        if m_space == "Q1" and k == 3:
            raise ShapeError("Q1 traces are only defined on box faces")
        basis = nodal
    return pts, w * measure, basis


def trace_dim(n_face_vertices: int, m_space: str) -> int:
    if m_space == "P0" or n_face_vertices == 1:
        return 1
    return n_face_vertices

"""Hypergraph meshes.

A hypergraph is a set of d-dimensional hyperedges (cells) glued along
(d-1)-dimensional hypernodes (faces).  A hypernode may be shared by any number
of hyperedges, which covers networks of segments with branching points as well
as ordinary simplicial / rectangular meshes.

All geometric quantities are computed from affine formulas (QR frames,
determinants, Gram matrices); there is no quadrature in this module.

Vertex ordering conventions
---------------------------
* simplices (segment, triangle, tetrahedron): any order.
* boxes (rectangle, cuboid and their sheared images): tensor order, i.e. the
  vertex with index ``i = sum_k b_k 2**k`` sits at ``v0 + sum_k b_k a_k``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import InputError, ShapeError

SIMPLEX_SHAPES = {"segment": 1, "triangle": 2, "tetrahedron": 3}
BOX_SHAPES = {"segment": 1, "rectangle": 2, "cuboid": 3, "parallelogram": 2, "parallelepiped": 3}
SHAPE_DIM = {**SIMPLEX_SHAPES, **BOX_SHAPES}
SHAPE_NVERTS = {"segment": 2, "triangle": 3, "tetrahedron": 4, "rectangle": 4,
                "parallelogram": 4, "cuboid": 8, "parallelepiped": 8}
HYPERCUBE_SHAPE = {1: "segment", 2: "rectangle", 3: "cuboid"}

INTERIOR = "interior"
DIRICHLET = "dirichlet"
NEUMANN = "neumann"
BOUNDARY_KINDS = (INTERIOR, DIRICHLET, NEUMANN)

_ORTHO_TOL = 1e-12


def is_simplex(shape: str) -> bool:
    return shape in SIMPLEX_SHAPES


def is_box(shape: str) -> bool:
    return shape in BOX_SHAPES


def is_orthogonal_box(shape: str) -> bool:
    return shape in ("segment", "rectangle", "cuboid")


def face_shape(n_vertices: int) -> str:
    """Shape of a hypernode from its vertex count (point, segment, triangle, quad)."""
    return {1: "point", 2: "segment", 3: "triangle", 4: "quadrilateral"}[n_vertices]


def cell_faces(shape: str, verts: Sequence[int]) -> list[tuple[int, ...]]:
    """Faces of a cell as vertex tuples.

    Simplices: face ``i`` omits vertex ``i``.  Boxes: faces are ordered
    (axis 0 low, axis 0 high, axis 1 low, ...) and keep tensor vertex order.
    """
    d = SHAPE_DIM[shape]
    if shape == "segment":
        return [(verts[0],), (verts[1],)]
    if is_simplex(shape):
        return [tuple(v for j, v in enumerate(verts) if j != i) for i in range(d + 1)]
    faces = []
    for k in range(d):
        for side in (0, 1):
            faces.append(tuple(verts[i] for i in range(2 ** d) if (i >> k) & 1 == side))
    return faces


@dataclass(frozen=True, eq=False)
class FaceGeometry:
    """Geometry of one hypernode as seen from one incident hyperedge."""

    coords: np.ndarray        # face vertices (ambient), in the node's canonical order
    measure: float
    barycenter: np.ndarray
    normal: np.ndarray        # outward unit normal of the edge (ambient)
    local_normal: np.ndarray  # same normal in the edge's local frame


@dataclass(frozen=True, eq=False)
class HyperNode:
    id: int
    vertex_ids: tuple[int, ...]
    boundary_kind: str
    measure: float
    barycenter: np.ndarray
    coords: np.ndarray

    @property
    def shape(self) -> str:
        return face_shape(len(self.vertex_ids))


@dataclass(frozen=True, eq=False)
class HyperEdge:
    id: int
    shape: str
    vertex_ids: tuple[int, ...]
    vertex_coords: np.ndarray
    node_ids: tuple[int, ...]
    kappa: float
    tau: float
    f_const: float
    # cached geometry
    volume: float
    boundary_measure: float
    barycenter: np.ndarray
    frame: np.ndarray          # D x d, orthonormal columns; local x = frame.T @ (X - barycenter)
    faces: tuple[FaceGeometry, ...]

    @property
    def dim(self) -> int:
        return SHAPE_DIM[self.shape]

    @property
    def local_vertices(self) -> np.ndarray:
        return (self.vertex_coords - self.barycenter) @ self.frame

    def face_index(self, node_id: int) -> int:
        return self.node_ids.index(node_id)

    def to_local(self, points) -> np.ndarray:
        return (np.atleast_2d(points) - self.barycenter) @ self.frame


def _box_sides(X: np.ndarray, d: int) -> np.ndarray:
    return np.stack([X[2 ** k] - X[0] for k in range(d)])


def _edge_frame(shape: str, X: np.ndarray) -> np.ndarray:
    d = SHAPE_DIM[shape]
    if is_simplex(shape):
        V = X[1:d + 1] - X[0]
    else:
        V = _box_sides(X, d)
    Q, R = np.linalg.qr(V.T)
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


def _classify_box(shape: str, X: np.ndarray) -> str:
    d = SHAPE_DIM[shape]
    if d == 1 or not is_box(shape):
        return shape
    A = _box_sides(X, d)
    G = A @ A.T
    scale = np.sqrt(np.outer(np.diag(G), np.diag(G)))
    off = np.abs(G - np.diag(np.diag(G))) / scale
    ortho = off.max() <= _ORTHO_TOL
    if d == 2:
        return "rectangle" if ortho else "parallelogram"
    return "cuboid" if ortho else "parallelepiped"


def _face_measure(coords: np.ndarray) -> float:
    k = len(coords)
    if k == 1:
        return 1.0
    if k == 4:  # tensor-ordered quadrilateral (parallelogram)
        V = np.stack([coords[1] - coords[0], coords[2] - coords[0]])
        return float(math.sqrt(max(np.linalg.det(V @ V.T), 0.0)))
    V = coords[1:] - coords[0]
    return float(math.sqrt(max(np.linalg.det(V @ V.T), 0.0)) / math.factorial(k - 1))


def _node_barycenter(coords: np.ndarray) -> np.ndarray:
    return coords.mean(axis=0)


def _check_box_planarity(shape: str, X: np.ndarray) -> None:
    d = SHAPE_DIM[shape]
    A = _box_sides(X, d)
    for i in range(2 ** d):
        expected = X[0] + sum(((i >> k) & 1) * A[k] for k in range(d))
        if not np.allclose(X[i], expected, atol=1e-12 * (1 + np.abs(A).max())):
            raise InputError(f"{shape} vertices are not an affine box in tensor order")


def make_edge(edge_id: int, shape: str, vertex_ids: Sequence[int], vertices: np.ndarray,
              nodes: Sequence[HyperNode], kappa: float = 1.0, tau: float = 1.0,
              f_const: float = 0.0) -> HyperEdge:
    """Build a hyperedge and all its cached geometry.

    ``nodes`` are the incident hypernodes, in the order used for the edge's
    node list.
    """
    if shape not in SHAPE_DIM:
        raise ShapeError(f"unknown shape {shape!r}")
    vertex_ids = tuple(int(v) for v in vertex_ids)
    if len(vertex_ids) != SHAPE_NVERTS[shape]:
        raise InputError(f"{shape} needs {SHAPE_NVERTS[shape]} vertices, got {len(vertex_ids)}")
    if not kappa > 0:
        raise InputError(f"kappa must be positive on edge {edge_id}")
    if tau < 0:
        raise InputError(f"tau must be nonnegative on edge {edge_id}")
    X = np.asarray(vertices, dtype=float)[list(vertex_ids)]
    if is_box(shape) and shape != "segment":
        _check_box_planarity(shape, X)
        shape = _classify_box(shape, X)
    d = SHAPE_DIM[shape]
    frame = _edge_frame(shape, X)
    bary = X.mean(axis=0)
    L = (X - bary) @ frame
    if is_simplex(shape):
        vol = abs(np.linalg.det((L[1:d + 1] - L[0]).T)) / math.factorial(d)
    else:
        vol = abs(np.linalg.det(_box_sides(L, d).T))
    if not vol > 0:
        raise InputError(f"degenerate {shape} on edge {edge_id}")

    faces = []
    for node in nodes:
        C = node.coords
        Cl = (C - bary) @ frame
        mid = Cl.mean(axis=0)
        if d == 1:
            n_loc = np.array([np.sign(mid[0])])
        else:
            T = Cl[1:] - Cl[0]
            _, _, Vt = np.linalg.svd(T)
            n_loc = Vt[-1]
            if n_loc @ mid < 0:
                n_loc = -n_loc
        n_loc = n_loc / np.linalg.norm(n_loc)
        faces.append(FaceGeometry(coords=C, measure=node.measure, barycenter=node.barycenter,
                                  normal=frame @ n_loc, local_normal=n_loc))
    return HyperEdge(id=edge_id, shape=shape, vertex_ids=vertex_ids, vertex_coords=X,
                     node_ids=tuple(n.id for n in nodes), kappa=float(kappa), tau=float(tau),
                     f_const=float(f_const), volume=float(vol),
                     boundary_measure=float(sum(n.measure for n in nodes)),
                     barycenter=bary, frame=frame, faces=tuple(faces))


def make_node(node_id: int, vertex_ids: Sequence[int], vertices: np.ndarray,
              boundary_kind: str) -> HyperNode:
    if boundary_kind not in BOUNDARY_KINDS:
        raise InputError(f"unknown boundary kind {boundary_kind!r}")
    vertex_ids = tuple(int(v) for v in vertex_ids)
    C = np.asarray(vertices, dtype=float)[list(vertex_ids)]
    return HyperNode(id=node_id, vertex_ids=vertex_ids, boundary_kind=boundary_kind,
                     measure=_face_measure(C), barycenter=_node_barycenter(C), coords=C)


@dataclass(frozen=True, eq=False)
class Hypergraph:
    """Immutable hypergraph with per-edge data and Dirichlet trace data.

    ``dirichlet_data`` maps a Dirichlet node id to a tuple of values: one value
    means a constant on the node; ``len(vertex_ids)`` values are vertex values
    of a (multi)linear function on the node.
    """

    vertices: np.ndarray
    nodes: tuple[HyperNode, ...]
    edges: tuple[HyperEdge, ...]
    dirichlet_data: Mapping[int, tuple[float, ...]]
    dim: int
    ambient_dim: int

    def __post_init__(self):
        self._validate()

    # -- validation ---------------------------------------------------------
    def _validate(self):
        n_nodes = len(self.nodes)
        for i, node in enumerate(self.nodes):
            if node.id != i:
                raise InputError("node ids must be 0..n-1 in order")
        incidence = [0] * n_nodes
        for i, edge in enumerate(self.edges):
            if edge.id != i:
                raise InputError("edge ids must be 0..n-1 in order")
            if edge.dim != self.dim:
                raise InputError(f"edge {i} has dimension {edge.dim}, mesh has {self.dim}")
            for nid in edge.node_ids:
                if not 0 <= nid < n_nodes:
                    raise InputError(f"edge {i} references missing node {nid}")
                incidence[nid] += 1
        for node, count in zip(self.nodes, incidence):
            if count == 0:
                raise InputError(f"node {node.id} is not incident to any edge")
            if (count >= 2) != (node.boundary_kind == INTERIOR):
                raise InputError(f"node {node.id}: boundary kind {node.boundary_kind!r} "
                                 f"inconsistent with {count} incident edges")
        dirichlet = [n.id for n in self.nodes if n.boundary_kind == DIRICHLET]
        if not dirichlet:
            raise InputError("at least one Dirichlet node is required")
        for nid in dirichlet:
            vals = self.dirichlet_data.get(nid)
            if vals is None:
                raise InputError(f"Dirichlet node {nid} has no data")
            if len(vals) not in (1, len(self.nodes[nid].vertex_ids)):
                raise InputError(f"Dirichlet node {nid}: expected 1 or "
                                 f"{len(self.nodes[nid].vertex_ids)} values, got {len(vals)}")
        if not _connected(n_nodes, [e.node_ids for e in self.edges]):
            raise InputError("hypergraph is not connected")

    # -- queries ------------------------------------------------------------
    def node_edges(self, node_id: int | None = None):
        """Incident edge ids of one node, or the list for all nodes."""
        out: list[list[int]] = [[] for _ in self.nodes]
        for e in self.edges:
            for nid in e.node_ids:
                out[nid].append(e.id)
        return out if node_id is None else out[node_id]

    def dirichlet_nodes(self) -> list[int]:
        return [n.id for n in self.nodes if n.boundary_kind == DIRICHLET]

    def find_node(self, point, tol: float = 1e-9) -> int:
        """Id of the node whose barycenter is closest to ``point`` (within ``tol``)."""
        P = np.asarray(point, dtype=float)
        dists = np.array([np.linalg.norm(n.barycenter - P) for n in self.nodes])
        i = int(np.argmin(dists))
        if dists[i] > tol:
            raise InputError(f"no node barycenter within {tol} of {list(P)}")
        return i

    # -- derived meshes -----------------------------------------------------
    def with_edge_params(self, kappa=None, tau=None, f=None) -> "Hypergraph":
        """Copy with kappa / tau / f replaced (scalar or per-edge sequence)."""
        def pick(val, i, old):
            if val is None:
                return old
            if np.ndim(val) == 0:
                return float(val)
            return float(val[i])
        edges = tuple(dataclasses.replace(e, kappa=pick(kappa, i, e.kappa), tau=pick(tau, i, e.tau),
                                          f_const=pick(f, i, e.f_const))
                      for i, e in enumerate(self.edges))
        for e in edges:
            if not e.kappa > 0 or e.tau < 0:
                raise InputError(f"invalid kappa/tau on edge {e.id}")
        return dataclasses.replace(self, edges=edges)

    def with_dirichlet(self, data: Mapping[int, Sequence[float]]) -> "Hypergraph":
        new = dict(self.dirichlet_data)
        for k, v in data.items():
            new[int(k)] = tuple(float(x) for x in np.atleast_1d(v))
        return dataclasses.replace(self, dirichlet_data=new)

    def with_boundary_kinds(self, kinds: Mapping[int, str],
                            data: Mapping[int, Sequence[float]] | None = None) -> "Hypergraph":
        """Change the kind of boundary nodes (dirichlet <-> neumann)."""
        nodes = list(self.nodes)
        for nid, kind in kinds.items():
            if nodes[nid].boundary_kind == INTERIOR or kind == INTERIOR:
                raise InputError(f"node {nid}: only boundary nodes can change kind")
            nodes[nid] = dataclasses.replace(nodes[nid], boundary_kind=kind)
        dd = {k: v for k, v in self.dirichlet_data.items() if nodes[k].boundary_kind == DIRICHLET}
        for nid in range(len(nodes)):
            if nodes[nid].boundary_kind == DIRICHLET and nid not in dd:
                dd[nid] = (0.0,)
        if data:
            dd.update({int(k): tuple(float(x) for x in np.atleast_1d(v)) for k, v in data.items()})
        return Hypergraph(self.vertices, tuple(nodes), self.edges, dd, self.dim, self.ambient_dim)

    def map_vertices(self, fn: Callable[[np.ndarray], np.ndarray]) -> "Hypergraph":
        """Apply a vertex map and recompute all geometry; topology is kept."""
        V = np.asarray(fn(self.vertices.copy()), dtype=float)
        if V.shape != self.vertices.shape:
            raise InputError("vertex map must preserve the coordinate array shape")
        nodes = tuple(make_node(n.id, n.vertex_ids, V, n.boundary_kind) for n in self.nodes)
        shape_family = {"parallelogram": "rectangle", "parallelepiped": "cuboid"}
        edges = tuple(make_edge(e.id, shape_family.get(e.shape, e.shape), e.vertex_ids, V,
                                [nodes[i] for i in e.node_ids], e.kappa, e.tau, e.f_const)
                      for e in self.edges)
        return Hypergraph(V, nodes, edges, dict(self.dirichlet_data), self.dim, self.ambient_dim)


def _connected(n_nodes: int, edge_nodes: Sequence[Sequence[int]]) -> bool:
    parent = list(range(n_nodes))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for ns in edge_nodes:
        r0 = find(ns[0])
        for n in ns[1:]:
            parent[find(n)] = r0
    return len({find(i) for i in range(n_nodes)}) <= 1


def from_cells(vertices, cells: Sequence[tuple[str, Sequence[int]]], *, kappa=1.0, tau=1.0, f=0.0,
               neumann: Callable[[np.ndarray], bool] | None = None,
               dirichlet: Mapping[int, Sequence[float]] | None = None) -> Hypergraph:
    """Build a hypergraph from cells, creating one hypernode per distinct face.

    Faces incident to a single cell are boundary nodes: Neumann where
    ``neumann(face_barycenter)`` is true, Dirichlet otherwise.  Dirichlet data
    defaults to zero.
    """
    V = np.atleast_2d(np.asarray(vertices, dtype=float))
    if V.ndim != 2:
        raise InputError("vertices must be a 2-d array")
    if not cells:
        raise InputError("at least one cell is required")
    dims = {SHAPE_DIM.get(s, -1) for s, _ in cells}
    if len(dims) != 1 or -1 in dims:
        raise InputError("all cells must share one known shape dimension")
    d = dims.pop()
    face_index: dict[tuple[int, ...], int] = {}
    face_verts: list[tuple[int, ...]] = []
    cell_nodes = []
    for shape, verts in cells:
        if len(verts) != SHAPE_NVERTS[shape]:
            raise InputError(f"{shape} needs {SHAPE_NVERTS[shape]} vertices")
        if any(not 0 <= v < len(V) for v in verts):
            raise InputError("cell references a missing vertex")
        ids = []
        for fv in cell_faces(shape, verts):
            key = tuple(sorted(fv))
            if key not in face_index:
                face_index[key] = len(face_verts)
                face_verts.append(fv)
            ids.append(face_index[key])
        cell_nodes.append(ids)
    counts = [0] * len(face_verts)
    for ids in cell_nodes:
        for i in ids:
            counts[i] += 1
    nodes = []
    for i, fv in enumerate(face_verts):
        if counts[i] >= 2:
            kind = INTERIOR
        else:
            kind = DIRICHLET
            if neumann is not None and neumann(V[list(fv)].mean(axis=0)):
                kind = NEUMANN
        nodes.append(make_node(i, fv, V, kind))
    n_cells = len(cells)
    kap = np.broadcast_to(np.asarray(kappa, dtype=float), (n_cells,))
    ta = np.broadcast_to(np.asarray(tau, dtype=float), (n_cells,))
    ff = np.broadcast_to(np.asarray(f, dtype=float), (n_cells,))
    edges = tuple(make_edge(j, shape, verts, V, [nodes[i] for i in cell_nodes[j]],
                            kap[j], ta[j], ff[j])
                  for j, (shape, verts) in enumerate(cells))
    data = {n.id: (0.0,) for n in nodes if n.boundary_kind == DIRICHLET}
    if dirichlet:
        data.update({int(k): tuple(float(x) for x in np.atleast_1d(v)) for k, v in dirichlet.items()})
    return Hypergraph(V, tuple(nodes), edges, data, d, V.shape[1])


# ---------------------------------------------------------------------------
# Dirichlet data helpers
# ---------------------------------------------------------------------------

def dirichlet_vertex_values(mesh: Hypergraph, g: Callable[[np.ndarray], float]) -> dict[int, tuple]:
    """Vertex values of ``g`` on every Dirichlet node (nodal interpolation)."""
    return {n.id: tuple(float(g(x)) for x in n.coords)
            for n in mesh.nodes if n.boundary_kind == DIRICHLET}


def dirichlet_face_constants(mesh: Hypergraph, g: Callable[[np.ndarray], float]) -> dict[int, tuple]:
    """One constant per Dirichlet node: ``g`` at the node barycenter."""
    return {n.id: (float(g(n.barycenter)),) for n in mesh.nodes if n.boundary_kind == DIRICHLET}


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_interval_graph(breakpoints, kappa_per_edge=1.0, tau=1.0, f=0.0) -> Hypergraph:
    """Division of an interval into segments; both ends Dirichlet."""
    x = np.asarray(breakpoints, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise InputError("need at least two breakpoints")
    if np.any(np.diff(x) <= 0):
        raise InputError("breakpoints must be strictly increasing")
    n = len(x) - 1
    kap = np.broadcast_to(np.asarray(kappa_per_edge, dtype=float), (n,))
    if np.ndim(kappa_per_edge) and len(kappa_per_edge) != n:
        raise InputError("kappa_per_edge length must equal the number of edges")
    cells = [("segment", (i, i + 1)) for i in range(n)]
    return from_cells(x[:, None], cells, kappa=kap, tau=tau, f=f)


def build_graph(vertices, edge_list, kappa=1.0, tau=1.0, f=0.0,
                dirichlet: Mapping[int, float] | None = None) -> Hypergraph:
    """Graph of straight segments; nodes are the vertices.

    Vertices of degree one are Dirichlet nodes; ``dirichlet`` maps vertex ids
    to values (missing values default to 0).
    """
    V = np.asarray(vertices, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    edge_list = [tuple(int(v) for v in e) for e in edge_list]
    for a, b in edge_list:
        if not (0 <= a < len(V) and 0 <= b < len(V)) or a == b:
            raise InputError(f"invalid edge ({a}, {b})")
    used = {v for e in edge_list for v in e}
    if used != set(range(len(V))):
        raise InputError("graph is not connected (isolated vertices)")
    if not _connected(len(V), edge_list):
        raise InputError("graph is not connected")
    # nodes must coincide with vertex ids, so build them directly
    degree = np.zeros(len(V), dtype=int)
    for a, b in edge_list:
        degree[a] += 1
        degree[b] += 1
    nodes = tuple(make_node(i, (i,), V, INTERIOR if degree[i] >= 2 else DIRICHLET)
                  for i in range(len(V)))
    n = len(edge_list)
    kap = np.broadcast_to(np.asarray(kappa, dtype=float), (n,))
    ta = np.broadcast_to(np.asarray(tau, dtype=float), (n,))
    ff = np.broadcast_to(np.asarray(f, dtype=float), (n,))
    edges = tuple(make_edge(j, "segment", (a, b), V, [nodes[a], nodes[b]], kap[j], ta[j], ff[j])
                  for j, (a, b) in enumerate(edge_list))
    data = {i: (0.0,) for i in range(len(V)) if degree[i] == 1}
    for k, v in (dirichlet or {}).items():
        if int(k) not in data:
            raise InputError(f"vertex {k} is not a boundary node")
        data[int(k)] = (float(v),)
    return Hypergraph(V, nodes, edges, data, 1, V.shape[1])


def _tensor_vertices(d: int, origin, sides) -> np.ndarray:
    pts = []
    for i in range(2 ** d):
        pts.append([origin[k] + ((i >> k) & 1) * sides[k] for k in range(d)])
    return np.array(pts, dtype=float)


def build_single_hypercube(d: int, **kwargs) -> Hypergraph:
    """The unit hypercube (0,1)^d as a single hyperedge."""
    if d not in HYPERCUBE_SHAPE:
        raise InputError(f"hypercube dimension must be 1, 2 or 3, got {d}")
    V = _tensor_vertices(d, [0.0] * d, [1.0] * d)
    return from_cells(V, [(HYPERCUBE_SHAPE[d], tuple(range(2 ** d)))], **kwargs)


def build_structured_rect_mesh(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0,
                               origin=(0.0, 0.0), **kwargs) -> Hypergraph:
    """``nx`` x ``ny`` rectangles on ``[x0, x0+lx] x [y0, y0+ly]``."""
    if nx < 1 or ny < 1:
        raise InputError("nx and ny must be at least 1")
    if not (lx > 0 and ly > 0):
        raise InputError("lx and ly must be positive")
    xs = origin[0] + np.linspace(0.0, lx, nx + 1)
    ys = origin[1] + np.linspace(0.0, ly, ny + 1)
    V = np.array([[x, y] for y in ys for x in xs])

    def vid(i, j):
        return j * (nx + 1) + i

    cells = [("rectangle", (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)))
             for j in range(ny) for i in range(nx)]
    return from_cells(V, cells, **kwargs)


# Kuhn subdivision of the unit cube into 6 path simplices
_KUHN_PERMS = [(0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]


def build_structured_simplex_mesh(d: int, **kwargs) -> Hypergraph:
    """Structured triangulation of (0,1)^d: 8 triangles (d=2) or 48 tetrahedra (d=3).

    d=2: the 2x2 subsquares are split by their anti-diagonals (x + y = const),
    giving right triangles.  d=3: each of the 2x2x2 subcubes is split into six
    Kuhn tetrahedra along its (1,-1,-1) diagonal, the 3-d analogue of the
    anti-diagonal split.
    """
    if d == 2:
        V = np.array([[i * 0.5, j * 0.5] for j in range(3) for i in range(3)])

        def vid(i, j):
            return j * 3 + i

        cells = []
        for j in range(2):
            for i in range(2):
                a, b = vid(i, j), vid(i + 1, j)
                c, e = vid(i, j + 1), vid(i + 1, j + 1)
                cells.append(("triangle", (a, b, c)))
                cells.append(("triangle", (b, e, c)))
        return from_cells(V, cells, **kwargs)
    if d == 3:
        V = np.array([[i * 0.5, j * 0.5, k * 0.5] for k in range(3) for j in range(3) for i in range(3)])

        def vid(i, j, k):
            return k * 9 + j * 3 + i

        cells = []
        for k in range(2):
            for j in range(2):
                for i in range(2):
                    # walk from corner (i, j+1, k+1) to (i+1, j, k) one axis at a time
                    start = np.array([i, j + 1, k + 1])
                    step = np.array([1, -1, -1])
                    for perm in _KUHN_PERMS:
                        p = start.copy()
                        verts = [vid(*p)]
                        for ax in perm:
                            p[ax] += step[ax]
                            verts.append(vid(*p))
                        cells.append(("tetrahedron", tuple(verts)))
        return from_cells(V, cells, **kwargs)
    raise InputError(f"structured simplex mesh supports d=2 or d=3, got {d}")


def shear_points(points: np.ndarray, theta: float) -> np.ndarray:
    """(x, y[, z]) -> (x, y + theta x[, z + theta x])."""
    P = np.array(points, dtype=float, copy=True)
    if P.shape[-1] not in (2, 3):
        raise InputError("shear map needs ambient dimension 2 or 3")
    P[..., 1:] += theta * P[..., :1]
    return P


def apply_shear_map(mesh: Hypergraph, theta: float) -> Hypergraph:
    if mesh.ambient_dim not in (2, 3):
        raise InputError("shear map needs ambient dimension 2 or 3")
    return mesh.map_vertices(lambda V: shear_points(V, theta))


# ---------------------------------------------------------------------------
# Geometry queries
# ---------------------------------------------------------------------------

def volume(E: HyperEdge) -> float:
    return E.volume


def face_measure(N: HyperNode) -> float:
    return N.measure


def outward_normal(E: HyperEdge, node_id: int) -> np.ndarray:
    return E.faces[E.face_index(node_id)].normal


def barycenter(E: HyperEdge) -> np.ndarray:
    return E.barycenter


def rect_sides(E: HyperEdge) -> tuple[float, float]:
    """Side lengths (h1, h2) of a rectangle along its local axes."""
    if E.shape != "rectangle":
        raise ShapeError(f"rect_sides needs a rectangle, got {E.shape}")
    A = _box_sides(E.vertex_coords, 2)
    return float(np.linalg.norm(A[0])), float(np.linalg.norm(A[1]))

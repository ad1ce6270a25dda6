"""Plain text mesh format.

Grammar (UTF-8, one record per line, ``#`` starts a comment, blank lines are
ignored, ids are 0-based)::

    DIM <d> <D>
    VERTICES <n>
    <x_1> ... <x_D>                                  (n lines)
    NODES <m>
    <nv> <v_1> ... <v_nv> <I|D|N> [<nc> <c_1> ... <c_nc>]   (m lines)
    EDGES <k>
    <shape> <nv> <v_1> ... <v_nv> <nn> <n_1> ... <n_nn> <kappa> <tau> <f>   (k lines)

Marker ``I`` is interior, ``D`` Dirichlet, ``N`` Neumann.  Dirichlet nodes
carry either one constant or one value per node vertex.  Box cells list their
vertices in tensor order; their node list may come in any order.
"""
from __future__ import annotations

import io

import numpy as np

from .errors import InputError
from .mesh import (DIRICHLET, HYPERCUBE_SHAPE, INTERIOR, NEUMANN, SHAPE_DIM, Hypergraph,
                   cell_faces, make_edge, make_node)

_MARK = {"I": INTERIOR, "D": DIRICHLET, "N": NEUMANN}
_MARK_OUT = {v: k for k, v in _MARK.items()}


class _Lines:
    def __init__(self, text: str):
        self.items = []
        for no, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                self.items.append((no, line.split()))
        self.pos = 0

    def next(self, what: str):
        if self.pos >= len(self.items):
            raise InputError(f"unexpected end of file, expected {what}")
        item = self.items[self.pos]
        self.pos += 1
        return item

    def header(self, key: str, nvals: int):
        no, tok = self.next(key)
        if tok[0] != key or len(tok) != nvals + 1:
            raise InputError(f"line {no}: expected '{key}' with {nvals} value(s)")
        return no, [_int(t, no) for t in tok[1:]]


def _int(tok, no):
    try:
        return int(tok)
    except ValueError:
        raise InputError(f"line {no}: expected an integer, got {tok!r}") from None


def _float(tok, no):
    try:
        return float(tok)
    except ValueError:
        raise InputError(f"line {no}: expected a number, got {tok!r}") from None


def parse_mesh(text: str) -> Hypergraph:
    L = _Lines(text)
    _, (d, D) = L.header("DIM", 2)
    _, (nv,) = L.header("VERTICES", 1)
    verts = []
    for _ in range(nv):
        no, tok = L.next("a vertex")
        if len(tok) != D:
            raise InputError(f"line {no}: vertex needs {D} coordinates")
        verts.append([_float(t, no) for t in tok])
    V = np.array(verts, dtype=float).reshape(nv, D)
    _, (nn,) = L.header("NODES", 1)
    nodes, data = [], {}
    for i in range(nn):
        no, tok = L.next("a node")
        k = _int(tok[0], no)
        if len(tok) < k + 2:
            raise InputError(f"line {no}: node record too short")
        vids = [_int(t, no) for t in tok[1:k + 1]]
        if any(not 0 <= v < nv for v in vids):
            raise InputError(f"line {no}: node references a missing vertex")
        mark = tok[k + 1]
        if mark not in _MARK:
            raise InputError(f"line {no}: unknown marker {mark!r}")
        rest = tok[k + 2:]
        if rest:
            nc = _int(rest[0], no)
            if len(rest) != nc + 1:
                raise InputError(f"line {no}: expected {nc} Dirichlet values")
            data[i] = tuple(_float(t, no) for t in rest[1:])
        try:
            nodes.append(make_node(i, vids, V, _MARK[mark]))
        except InputError as exc:
            raise InputError(f"line {no}: {exc}") from None
    _, (ne,) = L.header("EDGES", 1)
    edges = []
    for j in range(ne):
        no, tok = L.next("an edge")
        shape = tok[0]
        if shape == "hypercube":
            shape = HYPERCUBE_SHAPE.get(d, shape)
        if shape not in SHAPE_DIM:
            raise InputError(f"line {no}: unknown shape {tok[0]!r}")
        try:
            k = _int(tok[1], no)
            vids = [_int(t, no) for t in tok[2:2 + k]]
            m = _int(tok[2 + k], no)
            nids = [_int(t, no) for t in tok[3 + k:3 + k + m]]
            kap, tau, f = (_float(t, no) for t in tok[3 + k + m:])
        except (IndexError, ValueError):
            raise InputError(f"line {no}: malformed edge record") from None
        if any(not 0 <= v < nv for v in vids) or any(not 0 <= n < nn for n in nids):
            raise InputError(f"line {no}: edge references a missing vertex or node")
        by_set = {frozenset(nodes[n].vertex_ids): n for n in nids}
        try:
            faces = cell_faces(shape, vids)
        except (IndexError, KeyError):
            raise InputError(f"line {no}: wrong vertex count for {shape}") from None
        ordered = []
        for fv in faces:
            n = by_set.get(frozenset(fv))
            if n is None:
                raise InputError(f"line {no}: no listed node matches face {list(fv)}")
            ordered.append(n)
        if len(ordered) != len(nids):
            raise InputError(f"line {no}: node list does not match the cell faces")
        try:
            edges.append(make_edge(j, shape, vids, V, [nodes[n] for n in ordered], kap, tau, f))
        except InputError as exc:
            raise InputError(f"line {no}: {exc}") from None
    if L.pos != len(L.items):
        raise InputError(f"line {L.items[L.pos][0]}: unexpected trailing content")
    for node in nodes:
        if node.boundary_kind == DIRICHLET and node.id not in data:
            data[node.id] = (0.0,)
    return Hypergraph(V, tuple(nodes), tuple(edges), data, d, D)


def read_mesh(path) -> Hypergraph:
    with open(path, encoding="utf-8") as fh:
        return parse_mesh(fh.read())


def format_mesh(mesh: Hypergraph) -> str:
    out = io.StringIO()
    w = out.write
    w(f"DIM {mesh.dim} {mesh.ambient_dim}\n")
    w(f"VERTICES {len(mesh.vertices)}\n")
    for x in mesh.vertices:
        w(" ".join(repr(float(c)) for c in x) + "\n")
    w(f"NODES {len(mesh.nodes)}\n")
    for n in mesh.nodes:
        line = f"{len(n.vertex_ids)} " + " ".join(map(str, n.vertex_ids)) + f" {_MARK_OUT[n.boundary_kind]}"
        if n.boundary_kind == DIRICHLET:
            vals = mesh.dirichlet_data[n.id]
            line += f" {len(vals)} " + " ".join(repr(float(v)) for v in vals)
        w(line + "\n")
    w(f"EDGES {len(mesh.edges)}\n")
    shape_out = {"parallelogram": "rectangle", "parallelepiped": "cuboid"}
    for e in mesh.edges:
        w(f"{shape_out.get(e.shape, e.shape)} {len(e.vertex_ids)} " + " ".join(map(str, e.vertex_ids))
          + f" {len(e.node_ids)} " + " ".join(map(str, e.node_ids))
          + f" {e.kappa!r} {e.tau!r} {e.f_const!r}\n")
    return out.getvalue()


def write_mesh(mesh: Hypergraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_mesh(mesh))

"""Incidence matrix and fundamental cycle basis of the transmission graph."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import Network


@dataclass(frozen=True)
class IncidenceMatrix:
    matrix: sp.csc_matrix  # buses x lines, int8
    bus_ids: tuple
    line_ids: tuple


@dataclass(frozen=True)
class CycleBasis:
    matrix: sp.csc_matrix  # lines x cycles, int8
    line_ids: tuple
    tree_lines: tuple  # line indices in the spanning forest
    n_components: int

    @property
    def n_cycles(self) -> int:
        return self.matrix.shape[1]


def _endpoints(network: Network):
    index = network.bus_index()
    return [(index[ln.bus_from], index[ln.bus_to]) for ln in network.lines]


def incidence_from_edges(n_nodes: int, edges) -> sp.csc_matrix:
    """+1 where an edge leaves a node, -1 where it enters."""
    n_edges = len(edges)
    rows = np.empty(2 * n_edges, dtype=np.int64)
    cols = np.repeat(np.arange(n_edges), 2)
    vals = np.tile(np.array([1, -1], dtype=np.int8), n_edges)
    for k, (a, b) in enumerate(edges):
        rows[2 * k] = a
        rows[2 * k + 1] = b
    return sp.csc_matrix((vals, (rows, cols)), shape=(n_nodes, n_edges), dtype=np.int8)


def incidence_matrix(network: Network) -> IncidenceMatrix:
    K = incidence_from_edges(len(network.buses), _endpoints(network))
    return IncidenceMatrix(K, tuple(network.bus_ids), tuple(ln.id for ln in network.lines))


def cycle_basis_from_edges(n_nodes: int, edges):
    """Fundamental cycles of an oriented multigraph.

    The spanning forest is grown depth-first from the lowest-indexed unvisited
    node, scanning incident edges in input order.  Every non-tree edge closes
    one cycle, oriented along that edge.

    Returns ``(C, tree_edges, n_components)`` with ``C`` an int8 matrix of
    shape ``(len(edges), n_cycles)``.
    """
    adjacency = [[] for _ in range(n_nodes)]
    for k, (a, b) in enumerate(edges):
        adjacency[a].append(k)
        adjacency[b].append(k)

    parent_edge = [-1] * n_nodes
    depth = [-1] * n_nodes
    in_tree = [False] * len(edges)
    n_components = 0
    for root in range(n_nodes):
        if depth[root] >= 0:
            continue
        n_components += 1
        depth[root] = 0
        # iterative DFS; each stack frame is (node, position in adjacency list)
        stack = [[root, 0]]
        while stack:
            frame = stack[-1]
            node, pos = frame
            if pos == len(adjacency[node]):
                stack.pop()
                continue
            frame[1] += 1
            k = adjacency[node][pos]
            a, b = edges[k]
            other = b if a == node else a
            if depth[other] < 0:
                depth[other] = depth[node] + 1
                parent_edge[other] = k
                in_tree[k] = True
                stack.append([other, 0])

    rows, cols, vals = [], [], []
    n_cycles = 0
    for k, (a, b) in enumerate(edges):
        if in_tree[k]:
            continue
        # walk a -> b along the tree would close the loop b -> a; traverse the
        # non-tree edge forward (a -> b), then return from b to a via the tree.
        entries = {k: 1}
        u, v = b, a
        path_u, path_v = [], []
        while depth[u] > depth[v]:
            path_u.append(u)
            u = _other(edges[parent_edge[u]], u)
        while depth[v] > depth[u]:
            path_v.append(v)
            v = _other(edges[parent_edge[v]], v)
        while u != v:
            path_u.append(u)
            path_v.append(v)
            u = _other(edges[parent_edge[u]], u)
            v = _other(edges[parent_edge[v]], v)
        # from b up to the common ancestor: moving child -> parent
        for node in path_u:
            e = parent_edge[node]
            entries[e] = entries.get(e, 0) + (1 if edges[e][0] == node else -1)
        # from the common ancestor down to a: moving parent -> child
        for node in path_v:
            e = parent_edge[node]
            entries[e] = entries.get(e, 0) + (1 if edges[e][1] == node else -1)
        for e in sorted(entries):
            if entries[e]:
                rows.append(e)
                cols.append(n_cycles)
                vals.append(entries[e])
        n_cycles += 1

    C = sp.csc_matrix(
        (np.array(vals, dtype=np.int8), (np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64))),
        shape=(len(edges), n_cycles),
        dtype=np.int8,
    )
    tree = tuple(k for k in range(len(edges)) if in_tree[k])
    return C, tree, n_components


def _other(edge, node):
    a, b = edge
    return b if a == node else a


def cycle_basis(network: Network) -> CycleBasis:
    C, tree, n_comp = cycle_basis_from_edges(len(network.buses), _endpoints(network))
    return CycleBasis(C, tuple(ln.id for ln in network.lines), tree, n_comp)


def boundary_is_zero(K: sp.spmatrix, C: sp.spmatrix) -> bool:
    """Exact integer check of ``K @ C == 0``."""
    prod = K.astype(np.int64) @ C.astype(np.int64)
    return prod.count_nonzero() == 0

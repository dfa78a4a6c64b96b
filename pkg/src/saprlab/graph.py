"""Undirected simple graphs: Barabasi-Albert generation and SNAP edge-list loading.

Graphs are stored in CSR form (``indptr``/``indices`` with sorted neighbour
lists) because every hot loop downstream is a numba kernel over flat arrays.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import EmptyGraphError, ParameterError, ParseError


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected simple graph on nodes ``0..n-1``.

    ``labels`` maps each dense node id back to the id it carried in the
    source it was built from (identity for generated graphs).
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray

    @classmethod
    def from_edges(cls, n: int, edges, labels=None) -> Graph:
        """Build from an iterable/array of (u, v) pairs.

        Self-loops are dropped and duplicates (in either orientation) collapse.
        """
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ParameterError("edge endpoint out of range")
        e = e[e[:, 0] != e[:, 1]]
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        und = np.unique(np.stack([lo, hi], axis=1), axis=0) if len(e) else e
        both = np.concatenate([und, und[:, ::-1]]) if len(und) else und
        order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else []
        both = both[order] if len(both) else both
        counts = np.bincount(both[:, 0], minlength=n) if len(both) else np.zeros(n, np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        indices = both[:, 1].astype(np.int64) if len(both) else np.zeros(0, np.int64)
        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        labels = np.asarray(labels, dtype=np.int64)
        for arr in (indptr, indices, labels):
            arr.setflags(write=False)
        return cls(n=int(n), indptr=indptr, indices=indices, labels=labels)

    @property
    def m_edges(self) -> int:
        return len(self.indices) // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(u).tolist() for u in range(self.n)]

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < len(nb) and nb[i] == v)

    def edges(self) -> np.ndarray:
        """Each undirected edge once as (u, v) with u < v, lexicographically sorted."""
        src = np.repeat(np.arange(self.n), self.degrees)
        mask = src < self.indices
        return np.stack([src[mask], self.indices[mask]], axis=1)

    def relabel(self, order) -> Graph:
        """Graph in which old node ``order[i]`` becomes node ``i``."""
        order = np.asarray(order, dtype=np.int64)
        new_id = np.empty(self.n, dtype=np.int64)
        new_id[order] = np.arange(self.n)
        return Graph.from_edges(self.n, new_id[self.edges()], labels=self.labels[order])

    def bfs_order(self, start: int = 0) -> np.ndarray:
        """Breadth-first visiting order (ascending neighbours) of a connected graph."""
        seen = np.zeros(self.n, dtype=bool)
        seen[start] = True
        order = [start]
        i = 0
        while i < len(order):
            for v in self.neighbors(order[i]):
                if not seen[v]:
                    seen[v] = True
                    order.append(int(v))
            i += 1
        if len(order) != self.n:
            raise ParameterError("graph is not connected")
        return np.array(order)

    def is_connected(self) -> bool:
        if self.n == 0:
            return False
        ncomp, _ = connected_components(self._sparse(), directed=False)
        return ncomp == 1

    def same_as(self, other: Graph) -> bool:
        return (self.n == other.n
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def _sparse(self):
        data = np.ones(len(self.indices), dtype=np.int8)
        src = np.repeat(np.arange(self.n), self.degrees)
        return coo_matrix((data, (src, self.indices)), shape=(self.n, self.n)).tocsr()


def generate_ba(n: int, m0: int = 3, m: int = 2, seed=None) -> Graph:
    """Barabasi-Albert graph grown from a complete ``m0``-clique.

    Every new node links to ``m`` distinct existing nodes, each drawn with
    probability proportional to its current degree; a draw that hits an
    already chosen target is repeated. The edge count is therefore exactly
    ``m0*(m0-1)/2 + m*(n-m0)``.
    """
    if not (n >= m0 >= m >= 1):
        raise ParameterError(f"need n >= m0 >= m >= 1, got n={n}, m0={m0}, m={m}")
    rng = np.random.default_rng(seed)
    n_edges = m0 * (m0 - 1) // 2 + m * (n - m0)
    edges = np.empty((n_edges, 2), dtype=np.int64)
    # each node appears once per unit of degree -> uniform draw here is degree-proportional
    ends = np.empty(2 * n_edges, dtype=np.int64)
    ne = 0
    for u in range(m0):
        for v in range(u + 1, m0):
            edges[ne] = (u, v)
            ends[2 * ne] = u
            ends[2 * ne + 1] = v
            ne += 1
    for new in range(m0, n):
        n_ends = 2 * ne
        targets: list[int] = []
        while len(targets) < m:
            if n_ends == 0:
                # only reachable with m0 == 1: the lone seed node has degree zero
                t = int(rng.integers(new))
            else:
                t = int(ends[rng.integers(n_ends)])
            if t not in targets:
                targets.append(t)
        for t in targets:
            edges[ne] = (new, t)
            ends[2 * ne] = new
            ends[2 * ne + 1] = t
            ne += 1
    return Graph.from_edges(n, edges)


def load_edge_list(text: str | Iterable[str]) -> Graph:
    """Parse a SNAP-style edge list ('#' comments, two integer ids per line).

    Node ids are relabelled densely in order of first appearance; the original
    ids are kept in ``Graph.labels``.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    ids: dict[int, int] = {}
    pairs = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected two node ids, got {len(tokens)} tokens", lineno)
        try:
            a, b = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(f"malformed node id in {line!r}", lineno) from None
        ia = ids.setdefault(a, len(ids))
        ib = ids.setdefault(b, len(ids))
        pairs.append((ia, ib))
    g = Graph.from_edges(len(ids), pairs, labels=list(ids))
    if g.m_edges == 0:
        raise EmptyGraphError("edge list contains no edges")
    return g


def read_edge_list(path) -> Graph:
    with open(path, encoding="utf-8") as fh:
        return load_edge_list(fh)


def write_edge_list(g: Graph, path, comment: str | None = None) -> None:
    """Write the canonical edge list: dense ids, ``u < v``, rows sorted by ``(v, u)``.

    With this row order :func:`load_edge_list` gives back the same ids whenever
    every node but 0 has a smaller-numbered neighbour (true for BA graphs and
    for any connected graph relabelled by :meth:`Graph.bfs_order`).
    """
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if comment:
            for line in comment.splitlines():
                fh.write(f"# {line}\n")
        fh.write(f"# nodes: {g.n} edges: {g.m_edges}\n")
        e = g.edges()
        for u, v in e[np.lexsort((e[:, 0], e[:, 1]))]:
            fh.write(f"{u}\t{v}\n")


def largest_connected_component(g: Graph) -> Graph:
    """Induced subgraph on the largest component, relabelled densely.

    Ties between equally large components go to the one holding the
    smallest node id. Relative node order is preserved.
    """
    if g.n == 0:
        raise EmptyGraphError("graph has no nodes")
    _, comp = connected_components(g._sparse(), directed=False)
    sizes = np.bincount(comp)
    # components are numbered in order of their smallest member, so argmax
    # (first maximum) already applies the tie-break
    best = int(np.argmax(sizes))
    keep = np.flatnonzero(comp == best)
    if len(keep) == g.n:
        return g
    remap = np.full(g.n, -1, dtype=np.int64)
    remap[keep] = np.arange(len(keep))
    e = g.edges()
    e = e[(remap[e[:, 0]] >= 0) & (remap[e[:, 1]] >= 0)]
    return Graph.from_edges(len(keep), remap[e], labels=g.labels[keep])

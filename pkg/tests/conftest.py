from collections import deque

import networkx as nx
import numpy as np
import pytest

from saprlab.graph import Graph

_ACCEPTANCE_LINES: list[str] = []


def from_nx(G) -> Graph:
    G = nx.convert_node_labels_to_integers(G)
    return Graph.from_edges(G.number_of_nodes(), list(G.edges()))


def random_connected(n, p, seed) -> Graph:
    """Erdos-Renyi graph made connected by chaining its components."""
    G = nx.gnp_random_graph(n, p, seed=seed)
    comps = [min(c) for c in nx.connected_components(G)]
    for a, b in zip(comps, comps[1:]):
        G.add_edge(a, b)
    return from_nx(G)


def bfs_distances(g: Graph, s: int) -> np.ndarray:
    dist = np.full(g.n, -1)
    dist[s] = 0
    q = deque([s])
    while q:
        u = q.popleft()
        for v in g.adjacency[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                q.append(v)
    return dist


def interior_recount(paths) -> np.ndarray:
    """Pure-Python recount over explicit path lists."""
    counts = np.zeros(paths.n, dtype=np.int64)
    for _, p in paths.paths():
        for r in p[1:-1]:
            counts[r] += 1
    return counts


@pytest.fixture
def acceptance_report():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

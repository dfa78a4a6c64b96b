import heapq

import numpy as np
import pytest

from conftest import bfs_distances, interior_recount, random_connected
from saprlab.errors import ConsistencyError, UnreachableNodeError
from saprlab.graph import Graph, generate_ba
from saprlab.sapr import (Relax, RoutingState, build_source_tree,
                          decrement_path, increment_path, node_cost,
                          relax_neighbor, remove_source_tree, run_sapr)


def path_graph(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def star(n):
    return Graph.from_edges(n, [(0, i) for i in range(1, n)])


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


@pytest.mark.parametrize("n_p,alpha,expected", [
    (0, 0.0, 1.0), (0, 3.7, 1.0), (1, 5.0, 1.0), (4, 0.0, 1.0), (4, 2.0, 16.0), (3, 0.5, 3 ** 0.5),
])
def test_node_cost(n_p, alpha, expected):
    assert node_cost(n_p, alpha) == pytest.approx(expected)


def _chain_state(alpha=1.0):
    # antecedents from source 0: 1 <- 0, 2 <- 1, 3 <- 2
    st = RoutingState.fresh(4, alpha)
    st.antecedent[0, 1:] = [0, 1, 2]
    return st


def test_increment_single_hop():
    st = _chain_state()
    increment_path(st, 0, 1)
    assert st.n_paths.tolist() == [0, 1, 0, 0]


def test_increment_chain_skips_source():
    st = _chain_state(alpha=2.0)
    increment_path(st, 0, 2)
    assert st.n_paths.tolist() == [0, 1, 1, 0]
    increment_path(st, 0, 2)
    assert st.cost.tolist() == [1.0, 4.0, 4.0, 1.0]


def test_decrement_restores_exactly():
    st = _chain_state(alpha=1.5)
    increment_path(st, 0, 3)
    before = (st.n_paths.copy(), st.cost.copy())
    increment_path(st, 0, 2)
    decrement_path(st, 0, 2)
    assert np.array_equal(st.n_paths, before[0])
    assert np.array_equal(st.cost, before[1])
    decrement_path(st, 0, 3)
    assert st.n_paths.tolist() == [0, 0, 0, 0]


def test_decrement_guard_and_broken_chain():
    st = _chain_state()
    with pytest.raises(ConsistencyError):
        decrement_path(st, 0, 2)
    assert st.n_paths.tolist() == [0, 0, 0, 0]
    st.antecedent[0, 2] = -1
    with pytest.raises(ConsistencyError):
        increment_path(st, 0, 3)


def test_star_center_tree_has_no_interior():
    g = star(6)
    st = RoutingState.fresh(6, 2.0)
    build_source_tree(st, g, 0, np.random.default_rng(0))
    assert st.n_paths.sum() == 0
    for leaf in range(1, 6):
        assert st.path_set.path(0, leaf) == [0, leaf]


def _sweep_state(alpha=1.0):
    # source 0, finalized chain 0 -> 1 -> 2, candidate v = 3 via u = 2, old path via t = 4
    st = RoutingState.fresh(5, alpha)
    st.antecedent[0, 1] = 0
    st.antecedent[0, 2] = 1
    st.antecedent[0, 4] = 1
    st.antecedent[0, 3] = 4
    increment_path(st, 0, 1)      # path 0-1-2
    increment_path(st, 0, 4)      # old path 0-1-4-3
    dist = np.array([0.0, 1.0, 3.0, 5.0, 3.0])
    return st, dist


def test_relax_case1_keep():
    st, dist = _sweep_state()
    dist[3] = 5.0
    dist[2] = 5.0                  # d(u) + w(v) = 6 > 5
    before = st.n_paths.copy()
    assert relax_neighbor(st, 0, 2, 3, dist, np.random.default_rng(0)) is Relax.KEEP
    assert np.array_equal(st.n_paths, before)
    assert st.antecedent[0, 3] == 4


def test_relax_case2_replace():
    st, dist = _sweep_state()
    dist[3] = 7.0
    dist[2] = 3.0                  # candidate 3 + w(3)=1 -> 4 < 7
    out = relax_neighbor(st, 0, 2, 3, dist, np.random.default_rng(0))
    assert out is Relax.REPLACE
    assert st.antecedent[0, 3] == 2
    assert dist[3] == 4.0
    # old interior {1, 4} lost one, new interior {1, 2} gained one
    assert st.n_paths.tolist() == [0, 2, 1, 0, 0]


def test_relax_tie_frequency():
    # oracle: Monte-Carlo frequency of replacement on equal-cost ties
    rng = np.random.default_rng(1234)
    replaced = 0
    trials = 10_000
    for _ in range(trials):
        st, dist = _sweep_state()
        dist[2], dist[3] = 4.0, 5.0
        out = relax_neighbor(st, 0, 2, 3, dist, rng)
        assert out in (Relax.TIE_KEEP, Relax.TIE_REPLACE)
        replaced += out is Relax.TIE_REPLACE
    assert abs(replaced / trials - 0.5) <= 0.02


def test_tree_on_path_graph():
    g = path_graph(3)
    st = RoutingState.fresh(3, 1.0)
    build_source_tree(st, g, 0, np.random.default_rng(0))
    ps = st.path_set
    assert ps.path(0, 1) == [0, 1] and ps.path(0, 2) == [0, 1, 2]
    assert st.n_paths.tolist() == [0, 1, 0]


def test_tree_on_four_cycle_both_outcomes():
    g = cycle(4)
    seen = set()
    for seed in range(40):
        st = RoutingState.fresh(4, 1.0)
        build_source_tree(st, g, 0, np.random.default_rng(seed))
        p = st.path_set.path(0, 2)
        assert p in ([0, 1, 2], [0, 3, 2])
        assert st.n_paths.sum() == 1
        assert st.n_paths[p[1]] == 1
        seen.add(tuple(p))
    assert len(seen) == 2


def test_tree_on_complete_graph():
    g = complete(4)
    for s in range(4):
        st = RoutingState.fresh(4, 3.0)
        build_source_tree(st, g, s, np.random.default_rng(s))
        assert st.n_paths.sum() == 0
        assert all(len(st.path_set.path(s, t)) == 2 for t in range(4) if t != s)


def test_disconnected_raises():
    g = Graph.from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(UnreachableNodeError):
        run_sapr(g, 1.0)


def _python_sweep(state, g, source, rng, snapshots):
    """Independent sweep assembled from the public single-step operations."""
    dist = np.full(g.n, np.inf)
    dist[source] = 0.0
    state.antecedent[source, :] = -1
    done = np.zeros(g.n, bool)
    heap = [(0.0, source)]
    while heap:
        _, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v in g.neighbors(u):
            v = int(v)
            if done[v]:
                continue
            w_before = state.cost[v]
            out = relax_neighbor(state, source, u, v, dist, rng)
            if out in (Relax.REPLACE, Relax.TIE_REPLACE):
                snapshots.append(dist[v] == dist[u] + w_before)
                heapq.heappush(heap, (dist[v], v))


@pytest.mark.parametrize("alpha", [0.0, 1.0, 2.5])
def test_kernel_matches_composed_operations(alpha):
    g = random_connected(30, 0.12, seed=5)
    a = RoutingState.fresh(g.n, alpha)
    b = RoutingState.fresh(g.n, alpha)
    ra, rb = np.random.default_rng(9), np.random.default_rng(9)
    snaps = []
    for s in range(g.n):
        build_source_tree(a, g, s, ra)
        _python_sweep(b, g, s, rb, snaps)
    assert np.array_equal(a.antecedent, b.antecedent)
    assert np.array_equal(a.n_paths, b.n_paths)
    assert snaps and all(snaps)


def test_remove_source_tree_zeroes_its_contribution():
    g = random_connected(25, 0.15, seed=2)
    st = RoutingState.fresh(g.n, 2.0)
    rng = np.random.default_rng(0)
    build_source_tree(st, g, 3, rng)
    assert st.n_paths.sum() > 0
    remove_source_tree(st, 3)
    assert st.n_paths.sum() == 0
    assert np.all(st.cost == 1.0)


@pytest.mark.parametrize("seed", range(100))
def test_count_conservation_every_iteration(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 30))
    g = random_connected(n, float(rng.uniform(0.08, 0.4)), seed=seed)
    alpha = float(rng.uniform(0, 6))
    for iters in (1, 2, 3):
        r = run_sapr(g, alpha, max_iterations=iters, tol=0.0, seed=seed)
        assert r.iterations == iters
        recount = interior_recount(r.paths)
        assert np.array_equal(r.state.n_paths, recount)
        assert r.state.n_paths.sum() == sum(len(p) - 2 for _, p in r.paths.paths())
        assert np.allclose(r.state.cost, np.maximum(recount, 1) ** alpha)
        for (s, t), p in r.paths.paths():
            assert p[0] == s and p[-1] == t and len(set(p)) == len(p)
            assert all(g.has_edge(a, b) for a, b in zip(p, p[1:]))


@pytest.mark.parametrize("seed", range(100))
def test_alpha_zero_is_breadth_first(seed):
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(3, 51))
    g = random_connected(n, float(rng.uniform(0.05, 0.3)), seed=seed)
    r = run_sapr(g, 0.0, max_iterations=5, seed=seed)
    hops = r.paths.hop_lengths()
    for s in range(n):
        assert np.array_equal(hops[s], bfs_distances(g, s))
    assert r.converged and r.iterations == 2


def test_seeded_determinism():
    g = generate_ba(200, 3, 2, seed=3)
    a = run_sapr(g, 4.0, seed=17)
    b = run_sapr(g, 4.0, seed=17)
    assert np.array_equal(a.paths.pred, b.paths.pred)
    assert a.avg_path_length == b.avg_path_length


def test_mean_length_grows_with_alpha():
    g = generate_ba(300, 3, 2, seed=0)
    L = [run_sapr(g, a, seed=0).avg_path_length[-1] for a in (0.0, 1.0, 3.0, 6.0)]
    assert L == sorted(L)

"""Self-avoiding paths routing.

Dijkstra sweeps from every source in which node costs are not fixed: each
time a cheaper path to some node is accepted, the path counts (and hence the
costs) of the nodes it traverses go up by one, and those of the path it
replaces go down by one. Later discoveries in the same sweep therefore avoid
nodes already crowded with paths. Sweeps over all sources are repeated with
counts carried over until the mean path length settles.

Conventions used throughout:

* a path counts only on its interior nodes (never on its source or target);
* ``cost(u) = max(n_paths(u), 1) ** alpha`` so untouched nodes cost 1 and
  ``alpha = 0`` is plain hop-count shortest paths;
* distances are frozen when recorded; a mid-sweep cost change does not
  refresh tentative distances already in the queue.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field
from enum import IntEnum

import numba as nb
import numpy as np

from .errors import ConsistencyError, ParameterError, UnreachableNodeError
from .graph import Graph
from .paths import PathSet

log = logging.getLogger(__name__)


class Relax(IntEnum):
    KEEP = 0
    REPLACE = 1
    TIE_KEEP = 2
    TIE_REPLACE = 3


@nb.njit(cache=True)
def _node_cost(n_p, alpha):
    x = n_p if n_p > 1 else 1
    return float(x) ** alpha


@nb.njit(cache=True)
def _walk_update(n_paths, cost, alpha, pred_row, source, tail, delta):
    # validate the whole chain before touching anything
    n = n_paths.shape[0]
    r = tail
    steps = 0
    while r != source:
        if r < 0 or steps >= n:
            raise ConsistencyError("broken antecedent chain")
        if n_paths[r] + delta < 0:
            raise ConsistencyError("path count would become negative")
        r = pred_row[r]
        steps += 1
    r = tail
    while r != source:
        n_paths[r] += delta
        cost[r] = _node_cost(n_paths[r], alpha)
        r = pred_row[r]


@nb.njit(cache=True)
def _relax(n_paths, cost, alpha, pred_row, dist, source, u, v, rng):
    cur = dist[v]
    if cur < 0.0:
        raise ConsistencyError("negative tentative distance")
    cand = dist[u] + cost[v]
    if cur < cand:
        return 0
    if cur == cand:
        if rng.random() < 0.5:
            return 2
        outcome = 3
    else:
        outcome = 1
    old = pred_row[v]
    if old >= 0:
        _walk_update(n_paths, cost, alpha, pred_row, source, old, -1)
    pred_row[v] = u
    dist[v] = cand
    _walk_update(n_paths, cost, alpha, pred_row, source, u, 1)
    return outcome


@nb.njit(cache=True)
def _build_tree(indptr, indices, n_paths, cost, alpha, pred_row, source, rng):
    """One adaptive sweep from ``source``; returns the summed hop count of its paths."""
    n = n_paths.shape[0]
    dist = np.full(n, np.inf)
    depth = np.zeros(n, dtype=np.int64)
    done = np.zeros(n, dtype=np.bool_)
    pred_row[:] = -1
    dist[source] = 0.0
    heap = [(0.0, source)]
    reached = 0
    hops = 0
    while len(heap) > 0:
        _, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        reached += 1
        if u != source:
            depth[u] = depth[pred_row[u]] + 1
            hops += depth[u]
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            # finalized nodes (source included) can only hit case 1
            if done[v]:
                continue
            outcome = _relax(n_paths, cost, alpha, pred_row, dist, source, u, v, rng)
            if outcome == 1 or outcome == 3:
                heapq.heappush(heap, (dist[v], v))
    if reached < n:
        raise UnreachableNodeError("graph is disconnected: some destinations unreachable")
    return hops


@nb.njit(cache=True)
def _remove_tree(n_paths, cost, alpha, pred_row, source):
    for v in range(n_paths.shape[0]):
        if v != source and pred_row[v] >= 0:
            _walk_update(n_paths, cost, alpha, pred_row, source, pred_row[v], -1)


@nb.njit(cache=True)
def _iteration(indptr, indices, n_paths, cost, alpha, pred, rng, carry_over):
    hops = 0
    for s in range(pred.shape[0]):
        if carry_over:
            _remove_tree(n_paths, cost, alpha, pred[s], s)
        hops += _build_tree(indptr, indices, n_paths, cost, alpha, pred[s], s, rng)
    return hops


def node_cost(n_p: int, alpha: float) -> float:
    """Cost of a node crossed by ``n_p`` stored paths: ``max(n_p, 1) ** alpha``."""
    if n_p < 0 or alpha < 0:
        raise ParameterError("n_p and alpha must be non-negative")
    return _node_cost(n_p, float(alpha))


@dataclass
class RoutingState:
    """Mutable path-count bookkeeping for one SAPR build."""

    n_paths: np.ndarray
    cost: np.ndarray
    alpha: float
    antecedent: np.ndarray

    @classmethod
    def fresh(cls, n: int, alpha: float) -> RoutingState:
        if alpha < 0:
            raise ParameterError("alpha must be non-negative")
        return cls(
            n_paths=np.zeros(n, dtype=np.int64),
            cost=np.ones(n, dtype=np.float64),
            alpha=float(alpha),
            antecedent=np.full((n, n), -1, dtype=np.int32),
        )

    @property
    def n(self) -> int:
        return len(self.n_paths)

    @property
    def path_set(self) -> PathSet:
        return PathSet(self.antecedent, protocol="sapr", params={"alpha": self.alpha})


def increment_path(state: RoutingState, source: int, tail: int) -> RoutingState:
    """Add one path: +1 on ``tail`` and each antecedent up to (excluding) ``source``."""
    _walk_update(state.n_paths, state.cost, state.alpha, state.antecedent[source],
                 source, tail, 1)
    return state


def decrement_path(state: RoutingState, source: int, tail: int) -> RoutingState:
    """Inverse of :func:`increment_path`; refuses to drive any count below zero."""
    _walk_update(state.n_paths, state.cost, state.alpha, state.antecedent[source],
                 source, tail, -1)
    return state


def relax_neighbor(state: RoutingState, source: int, u: int, v: int,
                   dist: np.ndarray, rng: np.random.Generator) -> Relax:
    """Examine neighbour ``v`` of the finalized node ``u`` during the sweep from ``source``.

    ``dist`` holds the sweep's tentative distances (``inf`` where none) and is
    updated in place, as are the counts and ``antecedent[source]``.
    """
    if v == source:
        raise ParameterError("v must differ from the source")
    return Relax(_relax(state.n_paths, state.cost, state.alpha, state.antecedent[source],
                        dist, source, u, v, rng))


def build_source_tree(state: RoutingState, graph: Graph, source: int,
                      rng: np.random.Generator) -> RoutingState:
    """Run one adaptive sweep from ``source``, storing its N-1 paths.

    Any tree previously stored for ``source`` is overwritten without touching
    the counts; use :func:`remove_source_tree` first when rebuilding.
    """
    _build_tree(graph.indptr, graph.indices, state.n_paths, state.cost, state.alpha,
                state.antecedent[source], source, rng)
    return state


def remove_source_tree(state: RoutingState, source: int) -> RoutingState:
    _remove_tree(state.n_paths, state.cost, state.alpha, state.antecedent[source], source)
    return state


@dataclass
class SaprRun:
    paths: PathSet
    state: RoutingState
    avg_path_length: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.avg_path_length)

    def convergence_rows(self):
        return [(i + 1, L) for i, L in enumerate(self.avg_path_length)]


def run_sapr(graph: Graph, alpha: float, max_iterations: int = 50, tol: float = 1e-3,
             seed=None) -> SaprRun:
    """Iterate adaptive sweeps over all sources until the mean hop length settles.

    The first iteration starts from zero counts and unit costs. Later ones
    rebuild each source's tree in ascending id order after removing that
    source's previous tree from the counts; all other trees stay in the costs.
    Stops once the relative change of the mean hop length drops below ``tol``.
    """
    if max_iterations < 1:
        raise ParameterError("max_iterations must be >= 1")
    if graph.n < 2:
        raise ParameterError("need at least two nodes")
    rng = np.random.default_rng(seed)
    state = RoutingState.fresh(graph.n, alpha)
    run = SaprRun(paths=state.path_set, state=state)
    n_pairs = graph.n * (graph.n - 1)
    for it in range(1, max_iterations + 1):
        hops = _iteration(graph.indptr, graph.indices, state.n_paths, state.cost,
                          state.alpha, state.antecedent, rng, it > 1)
        L = hops / n_pairs
        log.debug("sapr alpha=%g iteration %d <L>=%.6f", alpha, it, L)
        run.avg_path_length.append(L)
        if it > 1:
            prev = run.avg_path_length[-2]
            if abs(L - prev) / prev < tol:
                run.converged = True
                break
    return run

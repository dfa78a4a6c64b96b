"""Static node-cost routing (SPR, EPR, EPR2) and the iterative max-betweenness baseline (OR)."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import ParameterError, UnreachableNodeError
from .graph import Graph
from .paths import PathSet


@dataclass(frozen=True)
class StaticWeights:
    weights: np.ndarray
    policy: str
    params: dict = field(default_factory=dict)

    def path_cost(self, path) -> float:
        return float(self.weights[list(path)].sum())


def spr_weights(g: Graph) -> StaticWeights:
    return StaticWeights(np.ones(g.n), "spr")


def epr_weights(g: Graph, beta: float = 1.0) -> StaticWeights:
    """Efficient-path weights ``k_i ** beta``."""
    k = g.degrees.astype(np.float64)
    if np.any(k == 0):
        raise ParameterError("isolated node: degree-based weights need every degree >= 1")
    return StaticWeights(k ** beta, "epr", {"beta": beta})


def epr2_weights(g: Graph, k_c: float = 15, eps: float = 0.3) -> StaticWeights:
    """EPR with capped hub cost: ``k`` below ``k_c``, ``k_c**eps * k**(1-eps)`` from ``k_c`` up.

    Both branches give ``k_c`` at ``k = k_c``.
    """
    if k_c < 1 or not 0 <= eps <= 1:
        raise ParameterError("need k_c >= 1 and 0 <= eps <= 1")
    k = g.degrees.astype(np.float64)
    if np.any(k == 0):
        raise ParameterError("isolated node: degree-based weights need every degree >= 1")
    hub = k >= k_c
    w = k.copy()
    w[hub] = k_c ** eps * k[hub] ** (1.0 - eps)
    # exact continuity: the formula rounds at k == k_c for some eps
    w[k == k_c] = k_c
    return StaticWeights(w, "epr2", {"k_c": k_c, "eps": eps})


@nb.njit(cache=True)
def _static_tree(indptr, indices, w, pred_row, source, rng):
    n = w.shape[0]
    dist = np.full(n, np.inf)
    done = np.zeros(n, dtype=np.bool_)
    pred_row[:] = -1
    dist[source] = w[source]
    heap = [(w[source], source)]
    reached = 0
    while len(heap) > 0:
        _, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        reached += 1
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if done[v]:
                continue
            cand = dist[u] + w[v]
            if cand < dist[v]:
                dist[v] = cand
                pred_row[v] = u
                heapq.heappush(heap, (cand, v))
            elif cand == dist[v] and rng.random() >= 0.5:
                pred_row[v] = u
    return reached


@nb.njit(cache=True)
def _static_all(indptr, indices, w, pred, rng):
    n = w.shape[0]
    for s in range(n):
        if _static_tree(indptr, indices, w, pred[s], s, rng) < n:
            return False
    return True


def dijkstra_static(g: Graph, w: StaticWeights | np.ndarray, seed=None) -> PathSet:
    """Minimum node-cost path for every ordered pair (endpoint weights included).

    Equal-cost alternatives met during a sweep replace the stored antecedent
    with probability 1/2.
    """
    weights = np.asarray(getattr(w, "weights", w), dtype=np.float64)
    if weights.shape != (g.n,):
        raise ParameterError("one weight per node required")
    if np.any(weights <= 0):
        raise ParameterError("weights must be positive")
    rng = np.random.default_rng(seed)
    pred = np.full((g.n, g.n), -1, dtype=np.int32)
    if not _static_all(g.indptr, g.indices, weights, pred, rng):
        raise UnreachableNodeError("graph is disconnected: some destinations unreachable")
    policy = getattr(w, "policy", "static")
    params = dict(getattr(w, "params", {}))
    return PathSet(pred, protocol=policy, params=params)


@dataclass
class OrRun:
    paths: PathSet
    b_max: list[int]
    weights: np.ndarray

    @property
    def best_b_max(self) -> list[int]:
        return np.minimum.accumulate(self.b_max).tolist()


def run_or(g: Graph, iterations: int = 2000, seed=None, step: float = 1.0,
           rule: str = "additive") -> OrRun:
    """Extremal max-betweenness minimisation.

    Starting from unit weights, each iteration routes every pair with
    :func:`dijkstra_static`, recounts interior betweenness and penalises the
    single most loaded node (lowest id on ties): ``w += step`` for the
    additive rule, ``w *= step`` for the multiplicative one. The path set with
    the smallest maximum betweenness seen is returned.
    """
    if iterations < 1:
        raise ParameterError("iterations must be >= 1")
    if rule not in ("additive", "multiplicative"):
        raise ParameterError(f"unknown OR update rule {rule!r}")
    if rule == "multiplicative" and step <= 1:
        raise ParameterError("multiplicative step must exceed 1")
    if rule == "additive" and step <= 0:
        raise ParameterError("additive step must be positive")
    rng = np.random.default_rng(seed)
    w = np.ones(g.n)
    series: list[int] = []
    best = None
    for _ in range(iterations):
        ps = dijkstra_static(g, w, rng)
        counts = ps.interior_counts()
        hot = int(np.argmax(counts))
        b = int(counts[hot])
        series.append(b)
        if best is None or b < min(series[:-1]):
            best = ps
        if rule == "additive":
            w[hot] += step
        else:
            w[hot] *= step
    best.protocol = "or"
    best.params = {"iterations": iterations, "step": step, "rule": rule}
    return OrRun(paths=best, b_max=series, weights=w)

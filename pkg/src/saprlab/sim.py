"""Discrete-time packet traffic on a fixed forwarding plan.

One step:

1. ``R`` packets appear at uniformly random sources, each with a uniformly
   random destination other than its source, appended to the source queue.
2. Nodes are visited in a fresh random permutation. Each sends up to ``C``
   packets from the head of its queue: straight to the destination when it is
   a neighbour, otherwise to the next hop of the plan. Packets reaching their
   destination leave the network at once; others join the tail of the
   receiver's queue and cannot move again before the next step.

A packet born in step ``t`` and delivered during step ``t'`` has travel time
``t' + 1 - t`` (at least 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import ParameterError, RoutingIntegrityError
from .graph import Graph
from .routes import NEXT_HOP, SOURCE, ForwardingPlan

# counter slots
_T, _GEN, _DEL = 0, 1, 2


@nb.njit(cache=True)
def _is_neighbor(indptr, indices, u, v):
    lo = indptr[u]
    hi = indptr[u + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        x = indices[mid]
        if x == v:
            return True
        if x < v:
            lo = mid + 1
        else:
            hi = mid
    return False


@nb.njit(cache=True)
def _advance(indptr, indices, use_table, pred, nh, R, C, n_steps, rng,
             src, dst, birth, moved, link, q_head, q_tail, q_len,
             ctr, del_time, del_step, series):
    n = q_head.shape[0]
    for k in range(n_steps):
        t = ctr[_T]
        for _ in range(R):
            s = rng.integers(0, n)
            d = rng.integers(0, n - 1)
            if d >= s:
                d += 1
            p = ctr[_GEN]
            src[p] = s
            dst[p] = d
            birth[p] = t
            moved[p] = -1
            link[p] = -1
            if q_tail[s] >= 0:
                link[q_tail[s]] = p
            else:
                q_head[s] = p
            q_tail[s] = p
            q_len[s] += 1
            ctr[_GEN] += 1
        order = rng.permutation(n)
        for i in range(n):
            node = order[i]
            served = 0
            while served < C:
                p = q_head[node]
                # arrivals of this step sit behind every older packet
                if p < 0 or moved[p] == t:
                    break
                q_head[node] = link[p]
                if link[p] < 0:
                    q_tail[node] = -1
                q_len[node] -= 1
                link[p] = -1
                served += 1
                d = dst[p]
                if _is_neighbor(indptr, indices, node, d):
                    nxt = d
                elif use_table:
                    nxt = nh[node, d]
                    if nxt < 0 or not _is_neighbor(indptr, indices, node, nxt):
                        raise RoutingIntegrityError("next-hop table has no valid hop")
                else:
                    s = src[p]
                    nxt = d
                    guard = 0
                    while pred[s, nxt] != node:
                        nxt = pred[s, nxt]
                        guard += 1
                        if nxt < 0 or nxt == s or guard > n:
                            raise RoutingIntegrityError("packet is off its stored path")
                if nxt == d:
                    j = ctr[_DEL]
                    del_time[j] = t + 1 - birth[p]
                    del_step[j] = t
                    ctr[_DEL] += 1
                else:
                    moved[p] = t
                    if q_tail[nxt] >= 0:
                        link[q_tail[nxt]] = p
                    else:
                        q_head[nxt] = p
                    q_tail[nxt] = p
                    q_len[nxt] += 1
        series[k] = ctr[_GEN] - ctr[_DEL]
        ctr[_T] += 1


@dataclass(frozen=True)
class Packet:
    source: int
    dest: int
    birth_step: int
    position: int


@dataclass(frozen=True)
class SimConfig:
    """Traffic parameters. ``window`` is the slope width for the order parameter."""

    R: int = 1
    C: int = 1
    steps: int = 10_000
    warmup: int = 2_000
    window: int = 100
    seed: int | None = 0

    def __post_init__(self):
        if self.R < 1 or self.C < 1:
            raise ParameterError("R and C must be >= 1")
        if self.window < 1 or self.warmup < 0:
            raise ParameterError("window must be >= 1 and warmup >= 0")
        if self.warmup + self.window > self.steps:
            raise ParameterError("warmup + window must not exceed steps")

    def replace(self, **kw) -> SimConfig:
        from dataclasses import replace
        return replace(self, **kw)


class SimState:
    """Queues and packets of a running simulation (packet ids never reused)."""

    def __init__(self, n: int, capacity: int = 1024):
        self.n = n
        self.q_head = np.full(n, -1, dtype=np.int64)
        self.q_tail = np.full(n, -1, dtype=np.int64)
        self.q_len = np.zeros(n, dtype=np.int64)
        self.ctr = np.zeros(3, dtype=np.int64)
        self._alloc(max(capacity, 1))

    def _alloc(self, cap):
        old = getattr(self, "src", None)
        new = {name: np.zeros(cap, dtype=np.int64)
               for name in ("src", "dst", "birth", "moved", "link", "del_time", "del_step")}
        if old is not None:
            for name, arr in new.items():
                cur = getattr(self, name)
                arr[:len(cur)] = cur
        for name, arr in new.items():
            setattr(self, name, arr)

    def ensure_capacity(self, extra: int) -> None:
        need = int(self.ctr[_GEN]) + extra
        if need > len(self.src):
            self._alloc(max(need, 2 * len(self.src)))

    @property
    def t(self) -> int:
        return int(self.ctr[_T])

    @property
    def generated(self) -> int:
        return int(self.ctr[_GEN])

    @property
    def delivered(self) -> int:
        return int(self.ctr[_DEL])

    @property
    def in_network(self) -> int:
        return int(self.q_len.sum())

    def inject(self, source: int, dest: int) -> int:
        """Queue one packet at ``source`` as if generated in the current step."""
        if source == dest or not (0 <= source < self.n and 0 <= dest < self.n):
            raise ParameterError("need two distinct valid nodes")
        self.ensure_capacity(1)
        p = int(self.ctr[_GEN])
        self.src[p], self.dst[p], self.birth[p] = source, dest, self.t
        self.moved[p], self.link[p] = -1, -1
        if self.q_tail[source] >= 0:
            self.link[self.q_tail[source]] = p
        else:
            self.q_head[source] = p
        self.q_tail[source] = p
        self.q_len[source] += 1
        self.ctr[_GEN] += 1
        return p

    def queue(self, node: int) -> list[int]:
        """Packet ids queued at ``node``, head first."""
        out = []
        p = self.q_head[node]
        while p >= 0:
            out.append(int(p))
            p = self.link[p]
        return out

    def packet(self, pid: int) -> Packet:
        pos = next((v for v in range(self.n) if pid in self.queue(v)), -1)
        return Packet(int(self.src[pid]), int(self.dst[pid]), int(self.birth[pid]), pos)

    def travel_times(self, since_step: int = 0) -> np.ndarray:
        k = self.delivered
        sel = self.del_step[:k] >= since_step
        return self.del_time[:k][sel]


def _plan_arrays(plan: ForwardingPlan):
    dummy = np.full((1, 1), -1, dtype=np.int32)
    if plan.mode == SOURCE:
        return False, plan.paths.pred, dummy
    if plan.mode == NEXT_HOP:
        return True, dummy, plan.next_hop
    raise ParameterError(f"unknown forwarding mode {plan.mode!r}")


def advance(state: SimState, plan: ForwardingPlan, g: Graph, config: SimConfig,
            rng: np.random.Generator, n_steps: int = 1, generate: bool = True) -> np.ndarray:
    """Run ``n_steps`` steps in place; returns the in-network count after each.

    ``generate=False`` skips packet creation (only forwarding happens).
    """
    if plan.n != g.n or state.n != g.n:
        raise ParameterError("plan, state and graph sizes differ")
    use_table, pred, nh = _plan_arrays(plan)
    R = config.R if generate else 0
    state.ensure_capacity(n_steps * R)
    series = np.zeros(n_steps, dtype=np.int64)
    _advance(g.indptr, g.indices, use_table, pred, nh, R, config.C, n_steps, rng,
             state.src, state.dst, state.birth, state.moved, state.link,
             state.q_head, state.q_tail, state.q_len, state.ctr,
             state.del_time, state.del_step, series)
    return series


def step(state: SimState, plan: ForwardingPlan, g: Graph, config: SimConfig,
         rng: np.random.Generator, generate: bool = True) -> SimState:
    advance(state, plan, g, config, rng, 1, generate)
    return state


def order_parameter(series, config: SimConfig) -> float:
    """Normalised growth rate ``C/R * <N(t+dt) - N(t)> / dt`` over post-warmup windows.

    ``series[t]`` is the in-network packet count after ``t`` steps
    (``series[0] = 0``). Windows are disjoint, starting at ``warmup``. The
    value is returned unclamped; small negatives are free-flow noise.
    """
    x = np.asarray(series, dtype=np.float64)
    dt = config.window
    starts = np.arange(config.warmup, len(x) - dt, dt)
    if len(x) <= config.warmup + dt or len(starts) == 0:
        raise ParameterError("series too short for the requested warmup and window")
    slopes = (x[starts + dt] - x[starts]) / dt
    return float(config.C / config.R * slopes.mean())


@dataclass
class SimResult:
    config: SimConfig
    n_packets: np.ndarray
    travel_times: np.ndarray
    eta: float
    generated: int
    delivered: int
    extra: dict = field(default_factory=dict)

    @property
    def avg_travel_time(self) -> float:
        if len(self.travel_times) == 0:
            return float("nan")
        return float(self.travel_times.mean())

    avg_T = avg_travel_time

    def timeseries_rows(self):
        return list(enumerate(self.n_packets.tolist()))

    def summary_row(self):
        return (self.config.R, self.eta, self.avg_travel_time, self.delivered, self.generated)


def run(g: Graph, plan: ForwardingPlan, config: SimConfig) -> SimResult:
    """Simulate ``config.steps`` steps from empty queues."""
    rng = np.random.default_rng(config.seed)
    state = SimState(g.n, capacity=config.R * config.steps)
    body = advance(state, plan, g, config, rng, config.steps)
    series = np.concatenate([[0], body])
    return SimResult(
        config=config,
        n_packets=series,
        travel_times=state.travel_times(since_step=config.warmup),
        eta=order_parameter(series, config),
        generated=state.generated,
        delivered=state.delivered,
    )

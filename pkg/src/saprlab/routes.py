"""Forwarding plans derived from a PathSet.

Two disciplines:

``source``   the packet follows the stored path of its (source, destination)
             pair exactly. Always loop-free since stored paths are simple.
``next-hop`` each router forwards towards ``d`` along its own stored path to
             ``d``. SAPR trees of different sources need not agree, so such
             a table can loop; :func:`validate_loop_free` checks it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import ParameterError
from .graph import Graph
from .paths import PathSet

SOURCE = "source"
NEXT_HOP = "next-hop"
MODES = (SOURCE, NEXT_HOP)


@nb.njit(cache=True)
def _next_hop_table(pred):
    n = pred.shape[0]
    nh = np.full((n, n), -1, dtype=np.int32)
    for v in range(n):
        for d in range(n):
            if d == v:
                continue
            r = d
            while pred[v, r] != v:
                r = pred[v, r]
            nh[v, d] = r
    return nh


@nb.njit(cache=True)
def _looping_pairs(nh):
    n = nh.shape[0]
    bad = []
    for v in range(n):
        for d in range(n):
            if d == v:
                continue
            r = v
            steps = 0
            while r != d and steps < n:
                r = nh[r, d]
                steps += 1
                if r < 0:
                    break
            if r != d:
                bad.append((v, d))
    return bad


@dataclass(frozen=True)
class ForwardingPlan:
    mode: str
    paths: PathSet | None = None
    next_hop: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.paths.n if self.paths is not None else self.next_hop.shape[0]

    def trajectory(self, s: int, d: int) -> list[int]:
        """Nodes visited from ``s`` to ``d`` when the plan is followed literally."""
        if self.mode == SOURCE:
            return self.paths.path(s, d)
        out = [s]
        r = s
        while r != d:
            r = int(self.next_hop[r, d])
            if r < 0 or len(out) > self.n:
                raise ParameterError(f"next-hop walk from {s} to {d} does not terminate")
            out.append(r)
        return out

    def dump_csv(self, path) -> None:
        if self.mode != NEXT_HOP:
            raise ParameterError("only next-hop plans have a table to dump")
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["current", "dest", "next"])
            n = self.n
            for v in range(n):
                for d in range(n):
                    if v != d:
                        wr.writerow([v, d, int(self.next_hop[v, d])])


def build_plan(paths: PathSet, mode: str = SOURCE) -> ForwardingPlan:
    if mode not in MODES:
        raise ParameterError(f"unknown forwarding mode {mode!r}")
    paths.require_complete()
    if mode == SOURCE:
        return ForwardingPlan(SOURCE, paths=paths)
    return ForwardingPlan(NEXT_HOP, paths=paths, next_hop=_next_hop_table(paths.pred))


def plan_from_table(next_hop) -> ForwardingPlan:
    """Wrap a hand-made next-hop table (``-1`` on the diagonal)."""
    nh = np.asarray(next_hop, dtype=np.int32)
    if nh.ndim != 2 or nh.shape[0] != nh.shape[1]:
        raise ParameterError("next-hop table must be square")
    return ForwardingPlan(NEXT_HOP, next_hop=nh)


@dataclass
class LoopReport:
    looping: list[tuple[int, int]]
    non_neighbor: list[tuple[int, int]]

    @property
    def ok(self) -> bool:
        return not self.looping and not self.non_neighbor


def validate_loop_free(plan: ForwardingPlan, g: Graph) -> LoopReport:
    """Walk the table from every (v, d) for at most N hops."""
    if plan.mode != NEXT_HOP:
        raise ParameterError("loop validation applies to next-hop plans")
    nh = plan.next_hop
    if nh.shape[0] != g.n:
        raise ParameterError("plan and graph sizes differ")
    looping = [(int(v), int(d)) for v, d in _looping_pairs(nh)] if g.n > 1 else []
    non_neighbor = []
    for v in range(g.n):
        nbrs = g.neighbors(v)
        row = np.delete(nh[v], v)
        dests = np.delete(np.arange(g.n), v)
        off = ~np.isin(row, nbrs)
        non_neighbor.extend((v, int(d)) for d in dests[off])
    return LoopReport(looping=looping, non_neighbor=non_neighbor)

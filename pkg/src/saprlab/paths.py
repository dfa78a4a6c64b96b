"""Stored routing paths: one path per ordered (source, destination) pair.

Every protocol in this package builds one Dijkstra-like tree per source, so
the whole set is held as an antecedent matrix ``pred[s, v]`` (the node
preceding ``v`` on the path from ``s``; -1 on the diagonal and for pairs not
yet discovered). A path is read by walking antecedents back to the source.
"""

from __future__ import annotations

from pathlib import Path

import numba as nb
import numpy as np

from .errors import ConsistencyError, IncompletePathSetError

FORMAT_VERSION = 1


@nb.njit(cache=True)
def _hop_lengths(pred):
    n = pred.shape[0]
    out = np.zeros((n, n), dtype=np.int64)
    for s in range(n):
        for t in range(n):
            if t == s:
                continue
            hops = 0
            r = t
            while r != s:
                if r < 0 or hops > n:
                    return out, s, t
                r = pred[s, r]
                hops += 1
            out[s, t] = hops
    return out, -1, -1


@nb.njit(cache=True)
def _interior_counts(pred):
    n = pred.shape[0]
    counts = np.zeros(n, dtype=np.int64)
    for s in range(n):
        for t in range(n):
            if t == s:
                continue
            r = pred[s, t]
            steps = 0
            while r != s:
                if r < 0 or steps > n:
                    return counts, s, t
                counts[r] += 1
                r = pred[s, r]
                steps += 1
    return counts, -1, -1


class PathSet:
    """Complete (or partially built) set of per-pair paths.

    ``protocol`` and ``params`` are free-form provenance stored with archives.
    """

    def __init__(self, pred: np.ndarray, protocol: str = "", params: dict | None = None):
        pred = np.asarray(pred)
        if pred.ndim != 2 or pred.shape[0] != pred.shape[1]:
            raise ValueError("antecedent matrix must be square")
        self.pred = pred.astype(np.int32, copy=False)
        self.protocol = protocol
        self.params = dict(params or {})

    @property
    def n(self) -> int:
        return self.pred.shape[0]

    def is_complete(self) -> bool:
        off = ~np.eye(self.n, dtype=bool)
        return bool(np.all(self.pred[off] >= 0))

    def require_complete(self) -> None:
        if not self.is_complete():
            s, t = np.argwhere((self.pred < 0) & ~np.eye(self.n, dtype=bool))[0]
            raise IncompletePathSetError(f"no stored path for pair ({s}, {t})")

    def path(self, s: int, t: int) -> list[int]:
        """Node sequence ``[s, ..., t]``."""
        if s == t:
            return [s]
        out = [t]
        r = t
        while r != s:
            r = int(self.pred[s, r])
            if r < 0:
                raise IncompletePathSetError(f"no stored path for pair ({s}, {t})")
            if len(out) > self.n:
                raise ConsistencyError(f"antecedent cycle on pair ({s}, {t})")
            out.append(r)
        out.reverse()
        return out

    def paths(self):
        """Yield ``((s, t), path)`` for every ordered pair."""
        for s in range(self.n):
            for t in range(self.n):
                if s != t:
                    yield (s, t), self.path(s, t)

    def hop_lengths(self) -> np.ndarray:
        """Matrix of path lengths in edges (0 on the diagonal)."""
        out, s, t = _hop_lengths(self.pred)
        if s >= 0:
            raise IncompletePathSetError(f"no stored path for pair ({s}, {t})")
        return out

    def interior_counts(self) -> np.ndarray:
        """Number of stored paths on which each node is neither endpoint."""
        counts, s, t = _interior_counts(self.pred)
        if s >= 0:
            raise IncompletePathSetError(f"no stored path for pair ({s}, {t})")
        return counts

    def save(self, path, graph=None) -> None:
        """Write an ``.npz`` archive; the graph is embedded when given."""
        payload = {
            "format_version": np.array(FORMAT_VERSION),
            "pred": self.pred,
            "protocol": np.array(self.protocol),
            "param_keys": np.array(list(self.params), dtype=str),
            "param_values": np.array([repr(v) for v in self.params.values()], dtype=str),
        }
        if graph is not None:
            payload.update(graph_n=np.array(graph.n), graph_indptr=graph.indptr,
                           graph_indices=graph.indices, graph_labels=graph.labels)
        with Path(path).open("wb") as fh:
            np.savez_compressed(fh, **payload)

    @classmethod
    def load(cls, path):
        """Return ``(PathSet, Graph | None)`` from an archive written by :meth:`save`."""
        from ast import literal_eval

        from .graph import Graph

        with np.load(path, allow_pickle=False) as z:
            version = int(z["format_version"])
            if version != FORMAT_VERSION:
                raise ValueError(f"unsupported path archive version {version}")
            params = {k: literal_eval(v) for k, v in zip(z["param_keys"].tolist(),
                                                         z["param_values"].tolist())}
            ps = cls(z["pred"], protocol=str(z["protocol"]), params=params)
            graph = None
            if "graph_n" in z:
                indptr = np.array(z["graph_indptr"])
                indices = np.array(z["graph_indices"])
                labels = np.array(z["graph_labels"])
                for arr in (indptr, indices, labels):
                    arr.setflags(write=False)
                graph = Graph(int(z["graph_n"]), indptr, indices, labels)
        return ps, graph

"""Path statistics, congestion thresholds and the small-world check."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import ParameterError, RangeExhaustedError
from .graph import Graph
from .paths import PathSet
from .routes import ForwardingPlan
from .sim import SimConfig, run

log = logging.getLogger(__name__)


def average_path_length(paths: PathSet) -> float:
    """Mean hop count over all ordered pairs."""
    n = paths.n
    return float(paths.hop_lengths().sum() / (n * (n - 1)))


def betweenness_profile(paths: PathSet, g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Per-node ``(degree, interior path count)``, recounted from the stored paths."""
    return g.degrees.copy(), paths.interior_counts()


def analytic_gamma_c(paths: PathSet, n: int | None = None) -> tuple[float, float]:
    """Return ``(gamma_c, n * gamma_c)`` with ``gamma_c = (n-1) / B_max``.

    ``B_max`` is the largest interior path count. Without any interior node
    (complete graph) the threshold is ``inf``.
    """
    n = paths.n if n is None else n
    b_max = int(paths.interior_counts().max())
    if b_max == 0:
        return math.inf, math.inf
    gamma = (n - 1) / b_max
    return gamma, n * gamma


def _sim_one(args):
    g, plan, config = args
    res = run(g, plan, config)
    return res.eta, res.avg_travel_time


def rate_point(g: Graph, plan: ForwardingPlan, config: SimConfig, R: int,
               seeds: int = 3, jobs: int = 1) -> tuple[float, float]:
    """Seed-averaged ``(eta, <T>)`` at generation rate ``R``.

    Seed ``i`` runs with ``config.seed + i`` so every rate sees the same
    random streams.
    """
    base = config.seed or 0
    tasks = [(g, plan, config.replace(R=R, seed=base + i)) for i in range(seeds)]
    if jobs > 1 and seeds > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, seeds)) as ex:
            out = list(ex.map(_sim_one, tasks))
    else:
        out = [_sim_one(t) for t in tasks]
    etas = [e for e, _ in out]
    times = [T for _, T in out if not math.isnan(T)]
    return float(np.mean(etas)), (float(np.mean(times)) if times else math.nan)


def rate_sweep(g: Graph, plan: ForwardingPlan, config: SimConfig, rates,
               seeds: int = 1, jobs: int = 1) -> list[tuple[int, float, float]]:
    """Rows ``(R, eta, <T>)`` for each rate."""
    return [(int(R), *rate_point(g, plan, config, int(R), seeds, jobs)) for R in rates]


@dataclass
class RcEstimate:
    r_c: int
    eta_curve: list[tuple[int, float]]
    eta_c: float
    method: str = "bisection"
    travel_curve: list[tuple[int, float]] = field(default_factory=list)

    def rows(self):
        T = dict(self.travel_curve)
        return [(R, eta, T.get(R, math.nan)) for R, eta in self.eta_curve]


def estimate_rc(g: Graph, plan: ForwardingPlan, config: SimConfig | None = None,
                eta_c: float = 0.01, r_min: int = 1, r_max: int = 200,
                seeds: int = 3, jobs: int = 1, confirm: int = 2) -> RcEstimate:
    """Smallest sampled rate whose seed-averaged order parameter reaches ``eta_c``.

    Integer bisection between a free-flowing ``r_min`` and a congested
    ``r_max``, then every rate within ``confirm`` of the crossing is sampled
    too; ``r_c`` is the smallest sampled rate at or above threshold.
    """
    if r_min < 1 or r_max < r_min:
        raise ParameterError("need 1 <= r_min <= r_max")
    config = config or SimConfig()
    cache: dict[int, tuple[float, float]] = {}

    def eta(R):
        if R not in cache:
            cache[R] = rate_point(g, plan, config, R, seeds, jobs)
            log.info("R=%d eta=%.5f <T>=%.3f", R, *cache[R])
        return cache[R][0]

    def curve():
        return sorted((R, v[0]) for R, v in cache.items())

    if eta(r_max) < eta_c:
        raise RangeExhaustedError(f"no congestion up to R={r_max}", curve())
    if eta(r_min) >= eta_c:
        crossing = r_min
    else:
        lo, hi = r_min, r_max
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if eta(mid) >= eta_c:
                hi = mid
            else:
                lo = mid
        crossing = hi
    for R in range(max(r_min, crossing - confirm), min(r_max, crossing + confirm) + 1):
        eta(R)
    r_c = min(R for R, v in cache.items() if v[0] >= eta_c)
    return RcEstimate(
        r_c=r_c,
        eta_curve=curve(),
        eta_c=eta_c,
        travel_curve=sorted((R, v[1]) for R, v in cache.items()),
    )


def monotonicity_violations(curve, noise: float = 0.005) -> list[tuple[int, int]]:
    """Pairs of consecutive sampled rates where eta drops by more than ``noise``."""
    pts = sorted(curve)
    return [(a[0], b[0]) for a, b in zip(pts, pts[1:]) if b[1] < a[1] - noise]


def small_world_fit(samples) -> tuple[float, float, float]:
    """Least-squares ``<L> = slope * ln N + intercept``; returns ``(slope, intercept, r^2)``."""
    pts = np.asarray(samples, dtype=np.float64)
    if pts.ndim != 2 or len(pts) < 3:
        raise ParameterError("need at least three (N, <L>) samples")
    if np.unique(pts[:, 0]).size < 2:
        raise ParameterError("all samples share the same N")
    fit = stats.linregress(np.log(pts[:, 0]), pts[:, 1])
    return float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2)

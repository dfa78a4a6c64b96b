"""Glue between configs and modules, plus the figure-level reproduction runs."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import baselines
from .config import NetworkConfig, RoutingConfig
from .errors import ParameterError
from .graph import Graph, generate_ba, largest_connected_component, read_edge_list
from .metrics import (average_path_length, betweenness_profile, estimate_rc,
                      rate_sweep)
from .paths import PathSet
from .routes import build_plan
from .sapr import run_sapr
from .sim import SimConfig

log = logging.getLogger(__name__)


def load_network(cfg: NetworkConfig) -> Graph:
    cfg.validate()
    if cfg.type == "ba":
        return generate_ba(cfg.n, cfg.m0, cfg.m, seed=cfg.seed)
    g = read_edge_list(cfg.path)
    return largest_connected_component(g) if cfg.lcc else g


@dataclass
class RouteBuild:
    paths: PathSet
    convergence: list[tuple[int, float]] = field(default_factory=list)
    b_max: list[tuple[int, int]] = field(default_factory=list)


def build_routes(g: Graph, cfg: RoutingConfig) -> RouteBuild:
    cfg.validate()
    p = cfg.protocol
    if p == "sapr":
        r = run_sapr(g, cfg.alpha, cfg.iterations, cfg.tol, seed=cfg.seed)
        r.paths.params.update(iterations=r.iterations, converged=r.converged)
        return RouteBuild(r.paths, convergence=r.convergence_rows())
    if p == "or":
        r = baselines.run_or(g, cfg.or_iterations, seed=cfg.seed, step=cfg.or_step,
                             rule=cfg.or_rule)
        return RouteBuild(r.paths, b_max=list(enumerate(r.b_max, start=1)))
    if p == "spr":
        w = baselines.spr_weights(g)
    elif p == "epr":
        w = baselines.epr_weights(g, cfg.beta)
    else:
        w = baselines.epr2_weights(g, cfg.k_c, cfg.eps)
    ps = baselines.dijkstra_static(g, w, seed=cfg.seed)
    return RouteBuild(ps, convergence=[(1, average_path_length(ps))])


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        wr.writerows(rows)
    return path


# ---------------------------------------------------------------- figures

@dataclass(frozen=True)
class Budget:
    """Scale knobs for ``reproduce``. Defaults follow the original study."""

    n: int | None = None
    seeds: int = 3
    sim: SimConfig = SimConfig()
    r_max: int = 200
    jobs: int = 1
    or_iterations: int = 2000
    edgelist: str | None = None
    rates: tuple[int, ...] | None = None


FIGURES = ("ord_param", "compar", "compar_real", "avlength", "gen_rate",
           "nb_paths", "small_world", "path_iter", "comp_OR")

SAPR = "sapr"


def _routing(protocol, seed, **kw):
    return RoutingConfig(protocol=protocol, seed=seed, **kw)


def _ba(n, seed):
    return generate_ba(n, 3, 2, seed=seed)


def _mean_curves(curves):
    """Average (R, eta, T) rows of several realizations sampled at the same rates."""
    arr = np.array(curves, dtype=float)
    mean = np.nanmean(arr, axis=0)
    return [(int(r[0]), float(r[1]), float(r[2])) for r in mean]


def _sweep_rows(budget, make_graph, routing, rates):
    curves = []
    for i in range(budget.seeds):
        g = make_graph(i)
        ps = build_routes(g, replace(routing, seed=i)).paths
        sim = budget.sim.replace(seed=(budget.sim.seed or 0) + i)
        curves.append(rate_sweep(g, build_plan(ps), sim, rates, seeds=1, jobs=budget.jobs))
    return _mean_curves(curves)


def _mean_rc(budget, make_graph, routing):
    values = []
    for i in range(budget.seeds):
        g = make_graph(i)
        ps = build_routes(g, replace(routing, seed=i)).paths
        sim = budget.sim.replace(seed=(budget.sim.seed or 0) + i)
        est = estimate_rc(g, build_plan(ps), sim, r_max=budget.r_max, seeds=1, jobs=budget.jobs)
        values.append(est.r_c)
    return float(np.mean(values))


def _n(budget, default=1000):
    return budget.n or default


def _rates(budget, default):
    return budget.rates if budget.rates else default


def fig_ord_param(out: Path, b: Budget):
    rates = _rates(b, tuple(range(5, 101, 5)))
    files = []
    for a in (1.0, 2.0, 4.0, 6.0, 10.0):
        rows = _sweep_rows(b, lambda i: _ba(_n(b), i), _routing(SAPR, 0, alpha=a), rates)
        files.append(write_csv(out / f"ord_param_alpha{a:g}.csv", ["R", "eta", "avg_travel_time"], rows))
    return files


def _compare(out, b, prefix, make_graph, protocols, rates):
    files = []
    for label, routing in protocols:
        rows = _sweep_rows(b, make_graph, routing, rates)
        files.append(write_csv(out / f"{prefix}_{label}.csv", ["R", "eta", "avg_travel_time"], rows))
    return files


def fig_compar(out: Path, b: Budget):
    protos = [("spr", _routing("spr", 0)), ("epr", _routing("epr", 0, beta=1.0)),
              ("sapr_alpha10", _routing(SAPR, 0, alpha=10.0))]
    return _compare(out, b, "compar", lambda i: _ba(_n(b), i), protos,
                    _rates(b, tuple(range(2, 101, 2))))


def fig_compar_real(out: Path, b: Budget):
    if not b.edgelist:
        raise ParameterError("compar_real needs an AS-733 snapshot (--edgelist)")
    g = largest_connected_component(read_edge_list(b.edgelist))
    protos = [("spr", _routing("spr", 0)), ("epr", _routing("epr", 0, beta=1.0)),
              ("sapr_alpha5", _routing(SAPR, 0, alpha=5.0))]
    return _compare(out, b, "compar_real", lambda i: g, protos,
                    _rates(b, tuple(range(1, 61, 1))))


def fig_avlength(out: Path, b: Budget):
    rows, ref = [], []
    graphs = [_ba(_n(b), i) for i in range(b.seeds)]
    for a in np.arange(0.0, 10.5, 1.0):
        L = [average_path_length(run_sapr(g, a, 50, 1e-3, seed=i).paths)
             for i, g in enumerate(graphs)]
        rows.append((float(a), float(np.mean(L))))
    for proto in ("spr", "epr"):
        L = [average_path_length(build_routes(g, _routing(proto, i)).paths)
             for i, g in enumerate(graphs)]
        ref.append((proto, float(np.mean(L))))
    return [write_csv(out / "avlength.csv", ["alpha", "avg_path_length"], rows),
            write_csv(out / "avlength_reference.csv", ["protocol", "avg_path_length"], ref)]


def fig_gen_rate(out: Path, b: Budget):
    make = lambda i: _ba(_n(b), i)  # noqa: E731
    rows = [(a, _mean_rc(b, make, _routing(SAPR, 0, alpha=a)))
            for a in (0.0, 1.0, 2.0, 4.0, 6.0, 8.0, 10.0)]
    ref = [(p, _mean_rc(b, make, _routing(p, 0))) for p in ("spr", "epr")]
    return [write_csv(out / "gen_rate.csv", ["alpha", "r_c"], rows),
            write_csv(out / "gen_rate_reference.csv", ["protocol", "r_c"], ref)]


def fig_nb_paths(out: Path, b: Budget):
    g = _ba(_n(b), 0)
    protos = [("spr", _routing("spr", 0)), ("epr", _routing("epr", 0)),
              ("sapr_alpha8", _routing(SAPR, 0, alpha=8.0)), ("epr2", _routing("epr2", 0))]
    files = []
    for label, routing in protos:
        k, counts = betweenness_profile(build_routes(g, routing).paths, g)
        rows = [(v, int(k[v]), int(counts[v])) for v in range(g.n)]
        files.append(write_csv(out / f"nb_paths_{label}.csv", ["node", "degree", "n_paths"], rows))
    return files


SMALL_WORLD_SIZES = (250, 500, 1000, 1500, 2000)


def fig_small_world(out: Path, b: Budget):
    files = []
    for a in (2.0, 4.0, 6.0):
        rows = []
        for n in SMALL_WORLD_SIZES:
            L = [average_path_length(run_sapr(_ba(n, i), a, 50, 1e-3, seed=i).paths)
                 for i in range(b.seeds)]
            rows.append((n, float(np.mean(L))))
        files.append(write_csv(out / f"small_world_alpha{a:g}.csv", ["N", "avg_path_length"], rows))
    return files


def fig_path_iter(out: Path, b: Budget):
    g = _ba(_n(b), 0)
    files = []
    for a in (4.0, 6.0, 10.0):
        r = run_sapr(g, a, 50, 1e-3, seed=0)
        files.append(write_csv(out / f"path_iter_alpha{a:g}.csv",
                               ["iteration", "avg_path_length"], r.convergence_rows()))
    return files


def fig_comp_OR(out: Path, b: Budget):
    n = _n(b, 200)
    make = lambda i: _ba(n, i)  # noqa: E731
    protos = [("spr", _routing("spr", 0)),
              ("or", _routing("or", 0, or_iterations=b.or_iterations)),
              ("sapr_alpha6", _routing(SAPR, 0, alpha=6.0))]
    files = _compare(out, b, "comp_OR", make, protos, _rates(b, tuple(range(1, 31))))
    r = baselines.run_or(make(0), b.or_iterations, seed=0)
    files.append(write_csv(out / "comp_OR_b_max.csv", ["iteration", "b_max"],
                           list(enumerate(r.b_max, start=1))))
    return files


def reproduce(figure: str, out_dir, budget: Budget | None = None) -> list[Path]:
    """Write the data series behind ``figure`` into ``out_dir``."""
    if figure not in FIGURES:
        raise ParameterError(f"unknown figure {figure!r}; choose from {', '.join(FIGURES)}")
    budget = budget or Budget()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return globals()[f"fig_{figure}"](out, budget)

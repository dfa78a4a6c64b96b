"""Command-line runner.

Exit codes: 0 ok, 1 usage, 2 data error, 3 rate range exhausted.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiments
from .config import ExperimentConfig, load_config, parse_rates
from .errors import (ConsistencyError, EmptyGraphError, IncompletePathSetError,
                     ParameterError, ParseError, RangeExhaustedError,
                     RoutingIntegrityError, UnreachableNodeError)
from .graph import write_edge_list
from .metrics import estimate_rc, monotonicity_violations, rate_point
from .paths import PathSet
from .routes import build_plan, validate_loop_free
from .sim import run

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RANGE = 0, 1, 2, 3

log = logging.getLogger("saprlab")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_network(p):
    g = p.add_argument_group("network")
    g.add_argument("--type", dest="net_type", choices=["ba", "edgelist"])
    g.add_argument("--n", type=int)
    g.add_argument("--m0", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--path", help="edge-list file for --type edgelist")
    g.add_argument("--net-seed", type=int)
    g.add_argument("--no-lcc", action="store_true", help="keep the full loaded graph")


def _add_routing(p):
    g = p.add_argument_group("routing")
    g.add_argument("--protocol", choices=["spr", "epr", "epr2", "sapr", "or"])
    g.add_argument("--alpha", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--k-c", type=float)
    g.add_argument("--eps", type=float)
    g.add_argument("--iterations", type=int)
    g.add_argument("--tol", type=float)
    g.add_argument("--routing-seed", type=int)
    g.add_argument("--or-iterations", type=int)
    g.add_argument("--or-step", type=float)
    g.add_argument("--or-rule", choices=["additive", "multiplicative"])


def _add_sim(p, rates=True):
    g = p.add_argument_group("traffic")
    if rates:
        g.add_argument("--R", dest="R", help="rate, list '1,2,3' or range 'start:stop:step'")
    g.add_argument("--C", dest="C", type=int)
    g.add_argument("--steps", type=int)
    g.add_argument("--warmup", type=int)
    g.add_argument("--window", type=int)
    g.add_argument("--sim-seed", type=int)
    g.add_argument("--seeds", type=int, help="simulation seeds averaged per rate")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="saprlab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="INI experiment config")
        p.add_argument("--out-dir", help="output directory (default from config: out)")
        p.add_argument("--jobs", type=int, default=1, help="parallel simulation workers")

    p = sub.add_parser("generate", help="write a network as a canonical edge list")
    common(p)
    _add_network(p)
    p.add_argument("--out", help="edge-list file (default OUT_DIR/graph.txt)")

    p = sub.add_parser("build-routes", help="compute a path set with one protocol")
    common(p)
    _add_network(p)
    _add_routing(p)
    p.add_argument("--graph", help="edge-list file (overrides the network section)")
    p.add_argument("--dump-next-hop", action="store_true",
                   help="also write the next-hop table and its loop report")

    p = sub.add_parser("simulate", help="run traffic over stored routes")
    common(p)
    _add_sim(p)
    p.add_argument("--routes", required=True, help="path archive from build-routes")
    p.add_argument("--mode", choices=["source", "next-hop"], default="source")

    p = sub.add_parser("scan-rc", help="locate the critical generation rate")
    common(p)
    _add_sim(p, rates=False)
    p.add_argument("--routes", required=True)
    p.add_argument("--mode", choices=["source", "next-hop"], default="source")
    p.add_argument("--r-min", type=int)
    p.add_argument("--r-max", type=int)
    p.add_argument("--eta-c", type=float)

    p = sub.add_parser("reproduce", help="emit the data series behind one figure")
    common(p)
    p.add_argument("figure", choices=experiments.FIGURES)
    p.add_argument("--n", type=int, help="network size override")
    p.add_argument("--seeds", type=int, help="network/protocol realizations averaged")
    p.add_argument("--rates", help="rate list/range for rate sweeps")
    p.add_argument("--steps", type=int)
    p.add_argument("--warmup", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--r-max", type=int)
    p.add_argument("--or-iterations", type=int)
    p.add_argument("--edgelist", help="AS-733 snapshot for compar_real")
    return parser


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config)
    cfg = cfg.with_overrides("output", directory=args.out_dir)
    if hasattr(args, "net_type"):
        cfg = cfg.with_overrides("network", type=args.net_type, n=args.n, m0=args.m0, m=args.m,
                                 path=args.path, seed=args.net_seed,
                                 lcc=False if args.no_lcc else None)
    if hasattr(args, "protocol"):
        cfg = cfg.with_overrides("routing", protocol=args.protocol, alpha=args.alpha,
                                 beta=args.beta, k_c=args.k_c, eps=args.eps,
                                 iterations=args.iterations, tol=args.tol,
                                 seed=args.routing_seed, or_iterations=args.or_iterations,
                                 or_step=args.or_step, or_rule=args.or_rule)
    if hasattr(args, "sim_seed"):
        cfg = cfg.with_overrides("sim", R=getattr(args, "R", None), C=args.C, steps=args.steps,
                                 warmup=args.warmup, window=args.window, seed=args.sim_seed,
                                 seeds=args.seeds, r_min=getattr(args, "r_min", None),
                                 r_max=getattr(args, "r_max", None),
                                 eta_c=getattr(args, "eta_c", None))
    return cfg


def _out(cfg) -> Path:
    out = Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    cfg = _config(args)
    g = experiments.load_network(cfg.network)
    if cfg.network.type == "edgelist" and g.is_connected():
        # breadth-first ids make the written file reload with identical ids
        g = g.relabel(g.bfs_order())
    target = Path(args.out) if args.out else _out(cfg) / "graph.txt"
    target.parent.mkdir(parents=True, exist_ok=True)
    net = cfg.network
    what = (f"ba n={net.n} m0={net.m0} m={net.m} seed={net.seed}" if net.type == "ba"
            else f"largest connected component of {net.path}")
    write_edge_list(g, target, comment=what)
    print(f"{target}: {g.n} nodes, {g.m_edges} edges ({what})")
    return EXIT_OK


def cmd_build_routes(args) -> int:
    cfg = _config(args)
    if args.graph:
        cfg = cfg.with_overrides("network", type="edgelist", path=args.graph)
    g = experiments.load_network(cfg.network)
    build = experiments.build_routes(g, cfg.routing)
    out = _out(cfg)
    archive = out / "routes.npz"
    build.paths.save(archive, graph=g)
    written = [archive]
    if build.convergence:
        written.append(experiments.write_csv(out / "convergence.csv",
                                             ["iteration", "avg_path_length"], build.convergence))
    if build.b_max:
        written.append(experiments.write_csv(out / "b_max.csv", ["iteration", "b_max"], build.b_max))
    if args.dump_next_hop:
        plan = build_plan(build.paths, "next-hop")
        plan.dump_csv(out / "next_hop.csv")
        report = validate_loop_free(plan, g)
        experiments.write_csv(out / "loop_report.csv", ["current", "dest"], report.looping)
        written += [out / "next_hop.csv", out / "loop_report.csv"]
        print(f"next-hop plan: {'loop-free' if report.ok else f'{len(report.looping)} looping pairs'}")
    L = build.convergence[-1][1] if build.convergence else float("nan")
    print(f"{cfg.routing.protocol}: n={g.n} <L>={L:.4f}")
    for f in written:
        print(f"wrote {f}")
    return EXIT_OK


def _load_routes(path, mode):
    if not Path(path).exists():
        raise FileNotFoundError(f"routes file not found: {path}")
    ps, g = PathSet.load(path)
    if g is None:
        raise IncompletePathSetError(f"{path} carries no graph")
    return g, build_plan(ps, mode)


def cmd_simulate(args) -> int:
    cfg = _config(args)
    g, plan = _load_routes(args.routes, args.mode)
    out = _out(cfg)
    rows = []
    for R in cfg.sim.R:
        sim = cfg.sim.sim_config(R)
        if cfg.sim.seeds > 1:
            eta, T = rate_point(g, plan, sim, R, cfg.sim.seeds, args.jobs)
            res = run(g, plan, sim)
            rows.append((R, eta, T, res.delivered, res.generated))
        else:
            res = run(g, plan, sim)
            rows.append(res.summary_row())
        suffix = "" if len(cfg.sim.R) == 1 else f"_R{R}"
        experiments.write_csv(out / f"timeseries{suffix}.csv", ["t", "n_packets"],
                              res.timeseries_rows())
        print(f"R={R}: eta={rows[-1][1]:.5f} <T>={rows[-1][2]:.4f}")
    experiments.write_csv(out / "summary.csv",
                          ["R", "eta", "avg_travel_time", "delivered", "generated"], rows)
    if len(rows) > 2:
        bad = monotonicity_violations([(r[0], r[1]) for r in rows])
        if bad:
            print(f"warning: eta decreases beyond noise between rates {bad}", file=sys.stderr)
    print(f"wrote {out / 'summary.csv'}")
    return EXIT_OK


def cmd_scan_rc(args) -> int:
    cfg = _config(args)
    g, plan = _load_routes(args.routes, args.mode)
    out = _out(cfg)
    s = cfg.sim
    try:
        est = estimate_rc(g, plan, s.sim_config(s.r_min), eta_c=s.eta_c, r_min=s.r_min,
                          r_max=s.r_max, seeds=max(s.seeds, 1), jobs=args.jobs)
    except RangeExhaustedError as exc:
        experiments.write_csv(out / "rc_curve.csv", ["R", "eta"], exc.curve)
        raise
    experiments.write_csv(out / "rc_curve.csv", ["R", "eta", "avg_travel_time"], est.rows())
    print(f"R_c = {est.r_c} (eta_c={est.eta_c}, {len(est.eta_curve)} rates sampled)")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    cfg = _config(args)
    sim = cfg.sim.sim_config(1)
    sim = sim.replace(**{k: v for k, v in (("steps", args.steps), ("warmup", args.warmup),
                                           ("window", args.window)) if v is not None})
    budget = experiments.Budget(
        n=args.n,
        seeds=args.seeds or 3,
        sim=sim,
        r_max=args.r_max or 200,
        jobs=args.jobs,
        or_iterations=args.or_iterations or 2000,
        edgelist=args.edgelist,
        rates=parse_rates(args.rates) if args.rates else None,
    )
    for f in experiments.reproduce(args.figure, cfg.output.directory, budget):
        print(f"wrote {f}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "build-routes": cmd_build_routes,
    "simulate": cmd_simulate,
    "scan-rc": cmd_scan_rc,
    "reproduce": cmd_reproduce,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"saprlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RangeExhaustedError as exc:
        print(f"saprlab: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (ParseError, EmptyGraphError, UnreachableNodeError, IncompletePathSetError,
            RoutingIntegrityError, ConsistencyError, FileNotFoundError, OSError) as exc:
        print(f"saprlab: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

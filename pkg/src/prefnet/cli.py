"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import io
from .dynamics import DynamicsSpec, Info, Init, Rule
from .equilibrium import enumerate_equilibria
from .errors import ConfigError, ResultsFormatError, UsageError
from .experiments import (
    FIGURES,
    Coordinate,
    aggregate,
    child_seed,
    figure_config,
    realize,
    run_sweep,
)
from .game import GameKind, PayoffParams
from .graph import Graph, TopologySpec, build, dump_edgelist, load_edgelist

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3

log = logging.getLogger("prefnet")


def _parser():
    ap = argparse.ArgumentParser(prog="prefnet",
                                 description="Network games with heterogeneous preferences.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="run a config file and write results")
    sp.add_argument("config", help="YAML config document")
    sp.add_argument("-o", "--output", required=True, help="results CSV path")
    sp.add_argument("--workers", type=int, help="override the config's worker count")

    rp = sub.add_parser("run", help="run a single realization")
    rp.add_argument("--topology", choices=("ER", "BA"), default="ER")
    rp.add_argument("--n", type=int, default=100)
    rp.add_argument("--mean-degree", type=float, default=5.0)
    rp.add_argument("--m-attach", type=int, default=3)
    rp.add_argument("--game", choices=("CG", "AG"), default="CG")
    rp.add_argument("--dynamics", choices=("BR", "PI"), default="BR")
    rp.add_argument("--info", choices=("complete", "incomplete"), default="complete")
    rp.add_argument("--init", choices=[i.value for i in Init], default=Init.ALL_PREFERRED.value)
    rp.add_argument("--alpha", type=float, required=True)
    rp.add_argument("--beta", type=float, required=True)
    rp.add_argument("--rho0", type=float, required=True, help="share of type-0 agents")
    rp.add_argument("--seed", type=int, required=True, help="base seed")
    rp.add_argument("--realization", type=int, default=0)
    rp.add_argument("--max-steps", type=int, default=100)
    rp.add_argument("--update-fraction", type=float, default=1.0)
    rp.add_argument("--window", type=int, default=20, help="imitation convergence window")
    rp.add_argument("--dump-graph", help="also write the realized graph as an edge list")

    ep = sub.add_parser("enumerate", help="list all pure equilibria of a small game")
    g = ep.add_mutually_exclusive_group(required=True)
    g.add_argument("--graph", help="edge-list file")
    g.add_argument("--edges", help="inline edges, e.g. '0-1,1-2' (nodes inferred from --prefs)")
    ep.add_argument("--prefs", required=True, help="comma-separated 0/1 preferences")
    ep.add_argument("--game", choices=("CG", "AG"), required=True)
    ep.add_argument("--alpha", type=float, required=True)
    ep.add_argument("--beta", type=float, required=True)

    fp = sub.add_parser("figure", help="emit the surface data behind a named figure")
    fp.add_argument("name", choices=sorted(FIGURES, key=lambda s: int(s[3:])))
    fp.add_argument("--seed", type=int, required=True, help="base seed")
    fp.add_argument("--realizations", type=int)
    fp.add_argument("--n", type=int, help="override network size")
    fp.add_argument("--workers", type=int, default=1)
    fp.add_argument("-o", "--output", help="aggregate CSV path (stdout if omitted)")
    fp.add_argument("--dump-config", action="store_true",
                    help="print the equivalent sweep config instead of running it")

    sub.add_parser("verify", help="run the built-in oracle and property checks")
    return ap


def cmd_sweep(args):
    cfg = io.load_config(args.config)
    records = run_sweep(cfg, workers=args.workers)
    io.write_results(records, args.output)
    csv_path, json_path = io.aggregate_paths(args.output)
    io.write_aggregate(aggregate(records), csv_path, json_path, cfg)
    total = sum(len(r.records) for r in records)
    print(f"wrote {total} realizations to {args.output}")
    return EXIT_OK


def cmd_run(args):
    if args.topology == "ER":
        topo = TopologySpec("ER", args.n, mean_degree=args.mean_degree)
    else:
        topo = TopologySpec("BA", args.n, m_attach=args.m_attach)
    PayoffParams(args.alpha, args.beta)
    if not 0 <= args.rho0 <= 1:
        raise ConfigError(f"rho0 must lie in [0, 1], got {args.rho0}")
    spec = DynamicsSpec(rule=Rule(args.dynamics), update_fraction=args.update_fraction,
                        max_steps=args.max_steps, convergence_window=args.window)
    if args.dynamics == "PI" and args.info == "incomplete":
        raise ConfigError("proportional imitation needs complete information")
    coord = Coordinate(topo, GameKind(args.game), args.alpha, args.beta, args.rho0)
    seed = child_seed(args.seed, coord, args.realization)
    rec = realize(coord, seed, spec, Info(args.info), Init(args.init), args.realization)
    if args.dump_graph:
        import numpy as np
        graph_seed = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)[0]
        dump_edgelist(build(topo, int(graph_seed)), args.dump_graph)
    print(f"d1={io.fmt(rec.d1)} df={io.fmt(rec.df)} class={rec.eq_class} "
          f"termination={rec.termination.value} steps={rec.steps} seed={rec.seed}")
    return EXIT_OK


def _inline_graph(edges: str, n: int) -> Graph:
    pairs = []
    for item in filter(None, (e.strip() for e in edges.split(","))):
        try:
            i, j = (int(v) for v in item.split("-"))
        except ValueError:
            raise ConfigError(f"bad edge {item!r}; expected 'i-j'") from None
        pairs.append((i, j))
    return Graph.from_edges(n, pairs)


def cmd_enumerate(args):
    try:
        prefs = [int(v) for v in args.prefs.split(",")]
    except ValueError:
        raise ConfigError(f"bad --prefs {args.prefs!r}") from None
    if any(v not in (0, 1) for v in prefs):
        raise ConfigError("preferences must be 0 or 1")
    g = load_edgelist(args.graph) if args.graph else _inline_graph(args.edges, len(prefs))
    if g.n != len(prefs):
        raise ConfigError(f"graph has {g.n} nodes but {len(prefs)} preferences given")
    p = PayoffParams(args.alpha, args.beta)
    found = enumerate_equilibria(g, prefs, p, GameKind(args.game))
    for profile, cls in found:
        print(",".join(map(str, profile)), cls.value)
    print(f"# {len(found)} equilibria", file=sys.stderr)
    return EXIT_OK


def cmd_figure(args):
    cfg = figure_config(args.name, args.seed, args.realizations, args.n)
    if args.dump_config:
        import yaml
        sys.stdout.write(yaml.safe_dump(io.config_to_dict(cfg), sort_keys=False))
        return EXIT_OK
    points = aggregate(run_sweep(cfg, workers=args.workers))
    text = io.aggregate_csv(points)
    if args.output:
        io.atomic_write(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args):
    from .verify import ALL_CHECKS
    failed = 0
    for check in ALL_CHECKS:
        res = check()
        failed += not res.passed
        print(f"{'PASS' if res.passed else 'FAIL'}  {res.name}: {res.detail}")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "run": cmd_run, "enumerate": cmd_enumerate,
            "figure": cmd_figure, "verify": cmd_verify}


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError, ResultsFormatError) as exc:
        print(f"prefnet: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"prefnet: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        log.debug("unhandled", exc_info=True)
        print(f"prefnet: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

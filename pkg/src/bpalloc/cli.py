"""Command-line interface: ``bpalloc {detect,allocate,verify,oracle,outage}``."""

from __future__ import annotations

import argparse
import os
import sys

from .bp import ASYNC, SYNC, BpConfig
from .experiments import (
    ExperimentConfig,
    parse_gen_spec,
    parse_interm,
    read_allocation_csv,
    resolve_topology,
    run_allocate,
    run_outage,
    write_allocation_csv,
    write_outage_csv,
    write_residual_csv,
)
from .factors import build_factor_graph, choose_n_slots
from .network import build_relations, detect_interferers, verify_schedule
from .oracle import InstanceTooLarge, enumerate_valid


def _seed(value):
    env = os.environ.get("SEED")
    return int(env) if env not in (None, "") else int(value)


def _fmt_set(s):
    return "{" + ",".join(str(t) for t in sorted(s)) + "}"


def _add_topology(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--topology", help="topology JSON file")
    g.add_argument("--gen", help="generator spec kind:n[:spacing[:seed]], or fig1 / fig2")
    p.add_argument("--theta-db", type=float, default=None, help="SINR threshold override (dB)")


def _network(args):
    spec = args.topology if args.topology else parse_gen_spec(args.gen)
    return resolve_topology(spec, args.theta_db)


def _slots(value):
    return value if value == "auto" else int(value)


def cmd_detect(args):
    net = _network(args)
    rel = build_relations(net)
    inter = detect_interferers(net)
    print(f"terminals {net.n_terminals} sink {net.sink} theta_db {net.radio.theta_db:g}")
    for i in sorted(net.terminals):
        par = net.parent.get(i, "-")
        print(
            f"{i}: parent {par} children {_fmt_set(rel.children[i])} siblings {_fmt_set(rel.siblings[i])} "
            f"one_hop {_fmt_set(rel.one_hop[i])} two_hop {_fmt_set(rel.two_hop[i])} "
            f"potential {_fmt_set(inter.potential[i])} interferers {_fmt_set(inter.interferers[i])}"
        )
    if args.factor_graph:
        m = choose_n_slots(net) if args.M == "auto" else int(args.M)
        fg = build_factor_graph(net, m, args.K, rel, inter)
        sys.stdout.write(fg.dump())
    return 0


def _bp_config(args):
    return BpConfig(
        n_iter=args.n_iter,
        n_interm=parse_interm(args.n_interm),
        alpha=args.alpha,
        schedule={"sync": SYNC, "async": ASYNC}[args.mode],
        seed=_seed(args.seed),
    )


def cmd_allocate(args):
    net = _network(args)
    result = run_allocate(net, M=_slots(args.M), K=args.K, bp=_bp_config(args), guided=args.guided)
    alloc = result.allocation
    write_allocation_csv(alloc.schedule, args.out)
    status = "valid" if alloc.valid else "no valid allocation"
    print(f"# {status}; slots {result.n_slots} channels {args.K}; attempts {len(result.attempts)}", file=sys.stderr)
    if result.report is not None:
        if args.residual_out:
            write_residual_csv(result.report, args.residual_out)
        print(f"# residual interference on {result.report.n_residual} link(s)", file=sys.stderr)
    return 0 if alloc.valid else 1


def cmd_verify(args):
    net = _network(args)
    schedule = read_allocation_csv(args.schedule)
    report = verify_schedule(net, schedule)
    if args.out:
        write_residual_csv(report, args.out)
    for link in report.links:
        flag = "RESIDUAL" if link.violated else "ok"
        print(f"link {link.child}->{link.parent} sinr_db {link.sinr_db:.2f} {flag}")
    for v in report.violations:
        print(f"violation {v}")
    print(f"residual_links {report.n_residual} constraint_violations {len(report.violations)}")
    return 0 if not report.violations else 1


def cmd_oracle(args):
    net = _network(args)
    m = choose_n_slots(net) if args.M == "auto" else int(args.M)
    try:
        result = enumerate_valid(net, m, args.K)
    except InstanceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"slots {m} channels {args.K} valid_allocations {result.count}")
    terminals = net.non_sink
    mk = m * args.K
    for x in result.valid_allocations[: args.samples]:
        parts = []
        for r, t in enumerate(terminals):
            block = x[r * mk : (r + 1) * mk]
            j = block.index(1)
            parts.append(f"{t}:{j // args.K + 1}:{j % args.K + 1}")
        print(" ".join(parts))
    return 0


def cmd_outage(args):
    config = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    updates = {}
    if args.topology or args.gen:
        updates["topology"] = args.topology if args.topology else parse_gen_spec(args.gen)
    for name, value in (
        ("M", args.M),
        ("K", args.K),
        ("theta_db", args.theta_db),
        ("alpha", args.alpha),
        ("trials", args.trials),
        ("mode", args.mode),
    ):
        if value is not None:
            updates[name] = _slots(value) if name == "M" else value
    if args.n_iter:
        updates["n_iter"] = [int(v) for v in args.n_iter.split(",")]
    if args.n_interm:
        updates["n_interm"] = args.n_interm.split(",")
    seed = args.seed if args.seed is not None else config.seed
    updates["seed"] = _seed(seed)
    config = ExperimentConfig(**{**config.__dict__, **updates})
    curve = run_outage(config)
    write_outage_csv(curve, args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="bpalloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="print relation and interferer sets")
    _add_topology(p)
    p.add_argument("--factor-graph", action="store_true", help="also dump the factor graph")
    p.add_argument("--M", default="auto")
    p.add_argument("--K", type=int, default=2)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("allocate", help="run the allocation pipeline")
    _add_topology(p)
    p.add_argument("--M", default="auto", help="slot count or 'auto'")
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--n-iter", type=int, default=50)
    p.add_argument("--n-interm", default="8", help="restart period, or 'inf'")
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["sync", "async"], default="sync")
    p.add_argument("--guided", action="store_true", help="centre priors on a backtracking solution")
    p.add_argument("--out", help="allocation CSV (default: stdout)")
    p.add_argument("--residual-out", help="residual report CSV")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("verify", help="audit a schedule CSV against a topology")
    _add_topology(p)
    p.add_argument("--schedule", required=True)
    p.add_argument("--out", help="residual report CSV")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="enumerate every valid allocation of a small instance")
    _add_topology(p)
    p.add_argument("--M", default="auto")
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--samples", type=int, default=5)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("outage", help="Monte-Carlo outage sweep")
    _add_topology(p, required=False)
    p.add_argument("--config", help="experiment config JSON")
    p.add_argument("--M", default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--n-iter", default=None, help="comma-separated grid, e.g. 10,30,50")
    p.add_argument("--n-interm", default=None, help="comma-separated, e.g. 8,inf")
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mode", choices=["sync", "async"], default=None)
    p.add_argument("--out", help="outage CSV (default: stdout)")
    p.set_defaults(func=cmd_outage)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


__all__ = ["main", "build_parser"]

"""Command-line interface.

Subcommands: ``explain`` (single instance, JSON to stdout), ``evaluate``
(full experiment from a config file), ``compare`` (two run directories),
and ``validate-dataset`` (loader check against expected counts).
"""

from __future__ import annotations

import argparse
import json
import sys

from .greedy import GreedyConfig, greedy_explain
from .harness import (DatasetDescriptor, ExperimentConfig, compare_runs,
                      load_dataset, load_jodie_csv, run_experiment)
from .mcts import MctsConfig, mcts_explain
from .oracle import make_session
from .policies import POLICY_NAMES, Policy


def _add_search_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=int, default=None,
                        help="hop radius (default: oracle layer count)")
    parser.add_argument("--m-max", type=int, default=64)
    parser.add_argument("--it-max", type=int, default=300)
    parser.add_argument("--alpha", type=float, default=2.0 / 3.0)
    parser.add_argument("--l", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--best-first-stop", action="store_true")
    parser.add_argument("--oracle", default="reference",
                        help="reference | bridge:<host:port> | fixture:<path>")


def cmd_explain(args: argparse.Namespace) -> int:
    graph = load_jodie_csv(args.dataset, bipartite=args.bipartite)
    session = make_session(args.oracle, graph)
    target = graph.event_by_id(args.target)
    policy = Policy(args.policy, seed=args.seed)
    if args.explainer == "greedy":
        result = greedy_explain(session, graph, target, policy,
                                GreedyConfig(l=args.l, k=args.k, m_max=args.m_max))
    else:
        result = mcts_explain(session, graph, target, policy,
                              MctsConfig(it_max=args.it_max, alpha=args.alpha,
                                         m_max=args.m_max, k=args.k,
                                         seed=args.seed,
                                         best_first_stop=args.best_first_stop))
    print(json.dumps(result.to_dict(), indent=2))
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    config = ExperimentConfig.from_file(args.config)
    out = run_experiment(config)
    print(f"run written to {out}")
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    comparison = compare_runs(args.runs[0], args.runs[1])
    print(json.dumps(comparison, indent=2))
    return 0


def cmd_validate_dataset(args: argparse.Namespace) -> int:
    from .harness import DatasetParseError

    descriptor = DatasetDescriptor(
        name=args.dataset, path=args.dataset, bipartite=args.bipartite,
        expected_nodes=args.expect_nodes, expected_edges=args.expect_edges)
    try:
        graph = load_dataset(descriptor)
    except DatasetParseError as exc:
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    print(f"nodes: {graph.node_count}")
    print(f"events: {len(graph)}")
    if args.expect_nodes is not None or args.expect_edges is not None:
        print("OK")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tgcf",
        description="Counterfactual explanations for future-link predictions "
                    "on continuous-time dynamic graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explain", help="explain one prediction")
    p.add_argument("--dataset", required=True)
    p.add_argument("--bipartite", action="store_true")
    p.add_argument("--explainer", choices=("greedy", "cody"), required=True)
    p.add_argument("--policy", choices=POLICY_NAMES, required=True)
    p.add_argument("--target", type=int, required=True, help="target event id")
    _add_search_flags(p)
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("evaluate", help="run an experiment from a config file")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="compare two run directories")
    p.add_argument("--runs", nargs=2, required=True, metavar=("DIR_A", "DIR_B"))
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate-dataset", help="check loader counts")
    p.add_argument("--dataset", required=True)
    p.add_argument("--bipartite", action="store_true")
    p.add_argument("--expect-nodes", type=int, default=None)
    p.add_argument("--expect-edges", type=int, default=None)
    p.set_defaults(func=cmd_validate_dataset)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

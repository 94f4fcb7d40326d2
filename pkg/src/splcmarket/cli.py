"""Command-line interface.

Subcommands: check, solve, verify, reduce, gen, bench, enumerate.
Exit codes for ``solve``: 0 equilibrium, 2 precheck failure (or invalid
market), 3 secondary ray (reachable only with --waive-demand), 4 iteration
limit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import analysis
from .equilibrium import (
    InvalidMarketError,
    normalize_equilibrium,
    parse_equilibrium,
    serialize_equilibrium,
    solve_market,
    verify_equilibrium,
)
from .formulation import build_nhad_lcp, dump_nhad_lcp
from .harness import GenParams, enumerate_equilibria, generate_random_market, run_benchmark
from .model import MarketParseError, parse_market, serialize_market, validate_market
from .reduction import exchange_to_production, serialize_reduction_map

__all__ = ["main"]


def _load_market(path: str):
    try:
        return parse_market(Path(path).read_bytes())
    except FileNotFoundError:
        raise SystemExit(f"error: no such file: {path}")
    except MarketParseError as exc:
        raise SystemExit(f"error: {exc}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _cmd_check(args: argparse.Namespace) -> int:
    market = _load_market(args.market)
    validation = validate_market(market)
    if not validation.ok:
        print(json.dumps({"valid": False, "violations": str(validation).splitlines()}, indent=2))
        return 2
    reports = analysis.run_all_checks(market)
    doc = {"checks": [r.to_obj() for r in reports], "all_pass": all(r.passed for r in reports)}
    print(json.dumps(doc, indent=2))
    return 0 if doc["all_pass"] else 1


def _cmd_solve(args: argparse.Namespace) -> int:
    market = _load_market(args.market)
    if args.dump_lcp:
        _, capped = analysis.compute_production_bound(market)
        floor = analysis.compute_price_floor(capped)
        Path(args.dump_lcp).write_text(dump_nhad_lcp(build_nhad_lcp(capped, floor)) + "\n")
    trace = (lambda line: print(line, file=sys.stderr)) if args.trace else None
    try:
        outcome = solve_market(
            market,
            waive_demand=args.waive_demand,
            max_iterations=args.max_iters,
            trace=trace,
        )
    except InvalidMarketError as exc:
        print(f"invalid market:\n{exc}", file=sys.stderr)
        return 2
    if outcome.kind == "failure":
        print(json.dumps({"failure": outcome.failure.to_obj(), "iterations": outcome.iterations}, indent=2))
        return 2
    if outcome.kind == "ray":
        ray = outcome.ray
        doc = {
            "secondary_ray": {
                "s_goods": list(ray.s_goods),
                "f_firms": list(ray.f_firms),
                "a1_agents": list(ray.a1_agents),
                "classification": ray.classification,
            },
            "iterations": outcome.iterations,
        }
        print(json.dumps(doc, indent=2))
        return 3
    if outcome.kind == "limit":
        print(json.dumps({"iteration_limit": outcome.iterations}, indent=2))
        return 4
    _emit(serialize_equilibrium(outcome.equilibrium), args.out)
    if args.out:
        print(json.dumps({"iterations": outcome.iterations, "restarts": outcome.restarts}, indent=2))
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    market = _load_market(args.market)
    validation = validate_market(market)
    if not validation.ok:
        print(f"invalid market:\n{validation}", file=sys.stderr)
        return 2
    equilibrium = parse_equilibrium(Path(args.equilibrium).read_bytes())
    _, capped = analysis.compute_production_bound(market)
    report = verify_equilibrium(capped, equilibrium)
    doc = {"pass": report.ok}
    if not report.ok:
        doc["violations"] = str(report).splitlines()
    print(json.dumps(doc, indent=2))
    return 0 if report.ok else 1


def _cmd_reduce(args: argparse.Namespace) -> int:
    market = _load_market(args.exchange)
    reduced, rmap = exchange_to_production(market)
    market_text = serialize_market(reduced)
    map_text = serialize_reduction_map(rmap)
    if args.out:
        Path(args.out).write_text(market_text + "\n")
        Path(args.out + ".map.json").write_text(map_text + "\n")
    else:
        print(json.dumps({"market": json.loads(market_text), "map": json.loads(map_text)}, indent=2))
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    params = GenParams(
        agents=args.agents, goods=args.goods, firms=args.firms, segments=args.segs, seed=args.seed
    )
    _emit(serialize_market(generate_random_market(params)), args.out)
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    params = GenParams(
        agents=args.agents, goods=args.goods, firms=args.firms, segments=args.segs, seed=args.seed
    )
    stats = run_benchmark(
        params,
        args.count,
        workers=args.workers,
        csv_path=args.csv,
        max_iterations=args.max_iters,
    )
    print(json.dumps(stats.to_obj(), indent=2))
    return 0


def _cmd_enumerate(args: argparse.Namespace) -> int:
    market = _load_market(args.market)
    result = enumerate_equilibria(market)
    doc = {
        "count": result.count,
        "degenerate": result.degenerate,
        "equilibria": [json.loads(serialize_equilibrium(eq)) for eq in result.equilibria],
    }
    print(json.dumps(doc, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splcmarket",
        description="Exact equilibrium computation for markets with SPLC utilities and production.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run the three sufficiency checks")
    p.add_argument("market")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("solve", help="compute an equilibrium")
    p.add_argument("market")
    p.add_argument("--max-iters", type=int, default=10**6)
    p.add_argument("--trace", action="store_true", help="print one line per pivot to stderr")
    p.add_argument("--out", help="write the equilibrium document here instead of stdout")
    p.add_argument("--waive-demand", action="store_true", help="proceed when enough-demand fails")
    p.add_argument("--dump-lcp", metavar="FILE", help="write the assembled LCP (debug)")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("verify", help="verify an equilibrium document against a market")
    p.add_argument("market")
    p.add_argument("equilibrium")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("reduce", help="reduce an exchange market to a production market")
    p.add_argument("exchange")
    p.add_argument("--out", help="write the reduced market here; the map goes to <out>.map.json")
    p.set_defaults(func=_cmd_reduce)

    p = sub.add_parser("gen", help="generate a random market")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--goods", type=int, required=True)
    p.add_argument("--firms", type=int, required=True)
    p.add_argument("--segs", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench", help="solve a batch of random instances and report statistics")
    p.add_argument("--agents", type=int, required=True)
    p.add_argument("--goods", type=int, required=True)
    p.add_argument("--firms", type=int, required=True)
    p.add_argument("--segs", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="per-instance rows: instance,totalSegments,iterations,outcome")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    p.add_argument("--max-iters", type=int, default=10**6)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("enumerate", help="brute-force all equilibria of a small market")
    p.add_argument("market")
    p.set_defaults(func=_cmd_enumerate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

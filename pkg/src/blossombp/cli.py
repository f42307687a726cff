"""Command line: ``solve``, ``verify`` and ``trace`` subcommands with JSON output."""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .bp import BPConfig
from .driver import MatchingResult, SolveConfig, solve_mwpm, verify_result
from .errors import Infeasible, IterationBudgetExceeded, NonConvergence, NonUnique, ParseError
from .graph import DEFAULT_NOISE_RANGE, WeightedGraph, read_instance

SCHEMA = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_FAILED = 3


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def matching_pairs(g: WeightedGraph, matching) -> list[list[int]]:
    return sorted(sorted((g.edges[e].u + 1, g.edges[e].v + 1)) for e in matching)


def write_trace(path: str, result: MatchingResult) -> None:
    text = "".join(_dump(rec) + "\n" for rec in result.trace)
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def build_report(g: WeightedGraph, cfg: SolveConfig, result: MatchingResult, timings: dict | None) -> dict:
    check = verify_result(g, result)
    report = {
        "schema": SCHEMA,
        "instance": {"vertices": g.vertex_count, "edges": g.edge_count},
        "config": {
            "backend": cfg.backend,
            "seed": cfg.seed,
            "noise_range": cfg.noise_range,
            "max_outer_iterations": cfg.max_outer_iterations,
            "bp_max_rounds": cfg.bp.max_rounds,
        },
        "result": {
            "matching": matching_pairs(g, result.matching),
            "weight": result.weight,
            "outer_iterations": result.outer_iterations,
            "contractions": result.contractions,
            "expansions": result.expansions,
            "bp_rounds_total": result.bp_rounds_total,
            "seed_used": result.seed_used,
            "attempts": result.attempts,
        },
        "verification": {"ok": check.ok, "violations": check.violations, "oracle_weight": check.oracle_weight},
    }
    if timings is not None:
        report["timings"] = timings
    return report


def _config(args) -> SolveConfig:
    return SolveConfig(
        backend=args.backend,
        seed=args.seed,
        noise_range=args.noise_range,
        max_outer_iterations=args.max_outer,
        bp=BPConfig(max_rounds=args.bp_max_rounds),
        threads=args.threads,
    )


def _solve(args) -> tuple[WeightedGraph, SolveConfig, MatchingResult, dict]:
    t0 = time.perf_counter()
    g = read_instance(args.instance)
    t1 = time.perf_counter()
    cfg = _config(args)
    result = solve_mwpm(g, cfg)
    t2 = time.perf_counter()
    return g, cfg, result, {"parse_s": round(t1 - t0, 6), "solve_s": round(t2 - t1, 6)}


def cmd_solve(args) -> int:
    g, cfg, result, timings = _solve(args)
    if args.trace:
        write_trace(args.trace, result)
    report = build_report(g, cfg, result, timings if args.timings else None)
    if args.json:
        print(_dump(report))
    else:
        pairs = " ".join(f"{u}-{v}" for u, v in report["result"]["matching"])
        print(f"weight {result.weight}")
        print(f"matching {pairs}")
        print(f"outer iterations {result.outer_iterations} "
              f"(contractions {result.contractions}, expansions {result.expansions})")
    return EXIT_OK


def read_matching(path: str) -> list[tuple[int, int]]:
    pairs = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        tokens = line.split()
        if not tokens or tokens[0].startswith(("#", "c")):
            continue
        if len(tokens) != 2:
            raise ParseError("expected two vertex numbers", lineno)
        try:
            pairs.append((int(tokens[0]), int(tokens[1])))
        except ValueError:
            raise ParseError(f"bad vertex number in {line.strip()!r}", lineno) from None
    return pairs


def cmd_verify(args) -> int:
    g = read_instance(args.instance)
    ids = set()
    violations = []
    for u, v in read_matching(args.matching):
        e = g.edge_between(u - 1, v - 1) if 1 <= u <= g.vertex_count and 1 <= v <= g.vertex_count else None
        if e is None:
            violations.append(f"edge ({u},{v}) not in graph")
        else:
            ids.add(e.id)
    check = verify_result(g, ids)
    violations += check.violations
    ok = not violations
    report = {"schema": SCHEMA, "ok": ok, "violations": violations, "oracle_weight": check.oracle_weight,
              "weight": sum(g.edges[e].w for e in ids)}
    if args.json:
        print(_dump(report))
    elif ok:
        print("ok")
    else:
        print(violations[0])
    return EXIT_OK if ok else EXIT_USAGE


def cmd_trace(args) -> int:
    _, _, result, _ = _solve(args)
    write_trace(args.output, result)
    return EXIT_OK


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("instance")
    p.add_argument("--backend", choices=("bp", "enumerate"), default="bp")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-range", type=int, default=DEFAULT_NOISE_RANGE)
    p.add_argument("--max-outer", type=int, default=None)
    p.add_argument("--bp-max-rounds", type=int, default=10000)
    p.add_argument("--threads", type=int, default=1)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="blossombp", description="Minimum-weight perfect matching by Blossom-LP with BP.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance")
    _add_solver_flags(p)
    p.add_argument("--trace", metavar="PATH", help="write the per-iteration trace as JSON lines")
    p.add_argument("--json", action="store_true", help="print the full JSON report")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a matching against an instance")
    p.add_argument("instance")
    p.add_argument("matching", help="file with one 'u v' pair per line")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("trace", help="write the per-iteration trace")
    _add_solver_flags(p)
    p.add_argument("-o", "--output", default="-", help="output path, '-' for stdout")
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except Infeasible as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NonConvergence, NonUnique, IterationBudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

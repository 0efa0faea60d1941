"""Command-line entry point.

Exit codes: 0 success / property holds, 1 property fails, 2 input or
contract error. Human-readable output numbers agents from 1 and labels goods
``g1..gm``; JSON documents use 0-based indices.
"""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

from . import io
from .envy import envy_violation
from .errors import ContractError, NonDichotomousError, ParseError
from .model import goods_of
from .oracle import MAX_DICHOTOMY_GOODS, check_dichotomous, check_dichotomous_sampled, ef1_violation
from .report import render_figures, run_bench, write_csv
from .solver import solve

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _label(goods) -> str:
    return "{" + ", ".join(f"g{g + 1}" for g in goods) + "}"


def _print_solution(sol, out) -> None:
    for i, goods in enumerate(sol.allocation.sets()):
        print(f"agent {i + 1}: {_label(goods)}  subsidy {sol.subsidies[i]}", file=out)
    print("subsidies: " + " ".join(str(x) for x in sol.subsidies), file=out)
    print(f"total subsidy: {sol.total}", file=out)


def _parse_order(spec: str | None, m: int):
    if spec is None:
        return None
    if spec.startswith("seed:"):
        order = list(range(m))
        random.Random(int(spec[5:])).shuffle(order)
        return order
    try:
        return [int(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise ParseError(f"--order expects comma-separated good indices or seed:N, got {spec!r}") from None


def cmd_solve(args, out) -> int:
    inst = io.load_instance(args.instance)
    order = _parse_order(args.order, inst.m)
    try:
        sol, trace = solve(inst, order=order, checked=not args.unchecked)
    except NonDichotomousError as exc:
        print(f"error: non-dichotomous valuation: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _print_solution(sol, out)
    if args.trace:
        Path(args.trace).write_text(io.serialize_trace(trace))
    if args.output:
        Path(args.output).write_text(io.serialize_solution(sol))
    return EXIT_OK


def cmd_verify(args, out) -> int:
    inst = io.load_instance(args.instance, strict=False)
    sol = io.parse_solution(Path(args.solution).read_text(), inst)
    bad = envy_violation(inst, sol)
    if bad is None:
        print("envy-free", file=out)
        return EXIT_OK
    i, j, e = bad
    print(f"NOT envy-free: agent {i + 1} envies agent {j + 1} by {e}", file=out)
    return EXIT_FAIL


def cmd_check(args, out) -> int:
    inst = io.load_instance(args.instance, strict=False)
    clean = True
    for i, v in enumerate(inst.valuations):
        if v.dichotomous_by_construction:
            verdict = "dichotomous by construction"
        elif inst.m <= MAX_DICHOTOMY_GOODS:
            report = check_dichotomous(v)
            verdict = "dichotomous (exhaustive check)" if report.ok else f"VIOLATION: {_describe(report)}"
            clean &= report.ok
        else:
            report = check_dichotomous_sampled(v, trials=args.samples, seed=args.seed)
            verdict = f"no violation in {args.samples} samples" if report.ok else f"VIOLATION: {_describe(report)}"
            clean &= report.ok
        print(f"agent {i + 1} ({v.kind}): {verdict}", file=out)
    return EXIT_OK if clean else EXIT_FAIL


def _describe(report) -> str:
    S, g, d = report.counterexample
    if g is None:
        return f"value of the empty set is {d}"
    return f"marginal of g{g + 1} on {_label(goods_of(S))} is {d}"


def cmd_gen(args, out) -> int:
    cfg = io.parse_config(Path(args.config).read_text())
    inst = io.generate_one(cfg, args.index)
    meta = {"name": inst.name, "seed": cfg.seed, "index": args.index}
    text = io.serialize_instance(inst, meta)
    if args.output == "-":
        print(text, file=out)
    else:
        Path(args.output).write_text(text)
    return EXIT_OK


def cmd_ef1(args, out) -> int:
    inst = io.load_instance(args.instance, strict=False)
    sol = io.parse_solution(Path(args.solution).read_text(), inst)
    bad = ef1_violation(inst, sol.allocation)
    if bad is None:
        print("EF1", file=out)
        return EXIT_OK
    i, j = bad
    print(f"NOT EF1: witness ({i + 1},{j + 1}): agent {i + 1} envies agent {j + 1} after removing any single good", file=out)
    return EXIT_FAIL


def cmd_bench(args, out) -> int:
    instances = io.load_corpus(args.corpus)
    rows = run_bench(instances, jobs=args.jobs, checked=args.checked)
    write_csv(rows, out)
    if args.figures:
        for path in render_figures(rows, args.figures):
            print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="efsubsidy", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute an envy-free solution with 0/1 subsidies")
    p.add_argument("instance")
    p.add_argument("--order", help="good order: comma-separated indices, or seed:N for a shuffled order")
    p.add_argument("--trace", help="write the per-step trace (JSON) here")
    p.add_argument("-o", "--output", help="write the solution document (JSON) here")
    p.add_argument("--unchecked", action="store_true", help="skip per-step re-verification")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check that a solution is envy-free")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("check", help="report whether each valuation is dichotomous")
    p.add_argument("instance")
    p.add_argument("--samples", type=int, default=10000, help="random probes when m > 20")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("gen", help="generate an instance from a generator config")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True, help="output path, or - for stdout")
    p.add_argument("--index", type=int, default=0, help="which instance of the config's stream")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("ef1", help="check whether a solution's allocation is EF1")
    p.add_argument("instance")
    p.add_argument("solution")
    p.set_defaults(func=cmd_ef1)

    p = sub.add_parser("bench", help="solve a corpus directory and print CSV rows")
    p.add_argument("corpus", help="directory of instance documents and/or generator configs")
    p.add_argument("--figures", help="also render figures into this directory")
    p.add_argument("--jobs", type=int, help="worker processes (capped by $EFSUBSIDY_JOBS)")
    p.add_argument("--checked", action="store_true", help="re-verify every step while benchmarking")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args, out)
    except (ParseError, ContractError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

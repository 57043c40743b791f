"""Command-line interface.

Exit codes: 0 success / reachable / fair, 1 unreachable / negative verdict,
2 invalid input, 3 resource limit.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from . import corpus
from .core import (
    ENVY_MAX,
    GRANULARITIES,
    Allocation,
    Instance,
    Transfer,
    envy_matrix,
    is_fair,
    is_near_fair,
    validate,
)
from .errors import EF1Error
from .formats import (
    emit_instance,
    emit_trace,
    load_instance,
    parse_pmr,
    parse_trace,
    write_atomic,
)
from .reachability import (
    TRANSFERS,
    TRANSFERS_AND_EXCHANGES,
    SearchConfig,
    Verdict,
    decide_restoration,
    enumerate_valid_ops,
)
from .reduction import build_reduction, pmr_reachable
from .restore_identical import RestorationTrace, check_trace, gen_tight_identical, restore_chores, restore_goods
from .restore_orientation import gen_path_lower_bound, restore_orientation

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_LIMIT = 3



def _load(path: str, need_allocation: bool = True) -> tuple[Instance, Optional[Allocation]]:
    inst, X = load_instance(path)
    if need_allocation and X is None:
        raise EF1Error(f"{path}: the file has no allocation")
    report = validate(inst, X)
    if not report.ok:
        raise EF1Error(f"{path}: {report}")
    return inst, X


def _format_op(op) -> str:
    if isinstance(op, Transfer):
        return f"transfer {op.item}: {op.source} -> {op.target}"
    return f"exchange {op.item_i} ({op.i}) <-> {op.item_j} ({op.j})"


def _print_steps(steps) -> None:
    for k, op in enumerate(steps, start=1):
        print(f"  {k}. {_format_op(op)}")


def cmd_validate(args) -> int:
    inst, X = load_instance(args.file)
    report = validate(inst, X)
    print(report)
    return EXIT_OK if report.ok else EXIT_NEGATIVE


def cmd_check(args) -> int:
    inst, X = _load(args.file)
    E = envy_matrix(inst, X, args.fairness)
    name = args.fairness.upper()
    print(f"envy amounts ({name}, row i -> column j):")
    width = max(3, max(len(str(int(x))) for x in E.flat))
    for i, row in enumerate(E):
        print(f"  {i:>3}: " + " ".join(f"{int(x):>{width}}" for x in row))
    fair = is_fair(inst, X, args.fairness)
    print(f"{name}: {'yes' if fair else 'no'}")
    print(f"near-{name} (distinguished {X.distinguished}): {'yes' if is_near_fair(inst, X, args.fairness) else 'no'}")
    return EXIT_OK if fair else EXIT_NEGATIVE


def cmd_restore(args) -> int:
    inst, X = _load(args.file)
    method = {"identical": restore_goods, "identical-chores": restore_chores, "orientation": restore_orientation}
    trace: RestorationTrace = method[args.method](inst, X)
    problems = check_trace(inst, trace)
    print(f"{len(trace)} transfers")
    _print_steps(trace.steps)
    if args.trace:
        write_atomic(args.trace, emit_trace(inst, X, list(trace.steps)))
    if problems:
        for p in problems:
            print(f"replay check failed: {p}", file=sys.stderr)
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_reach(args) -> int:
    inst, X = _load(args.file)
    config = SearchConfig(
        ops=args.ops,
        max_states=args.max_states,
        max_depth=args.max_depth,
        fairness=args.fairness,
        granularity=args.granularity,
    )
    ops = enumerate_valid_ops(inst, X, config)
    print(f"{len(ops)} valid operations")
    result = decide_restoration(inst, X, config)
    print(f"verdict: {result.verdict.value}")
    print(f"states explored: {result.states_explored}")
    if result.reachable:
        print(f"shortest trace: {len(result.trace)} operations")
        _print_steps(result.trace)
        if args.trace:
            write_atomic(args.trace, emit_trace(inst, X, result.trace, args.fairness))
    return {Verdict.REACHABLE: EXIT_OK, Verdict.UNREACHABLE: EXIT_NEGATIVE, Verdict.RESOURCE_LIMIT: EXIT_LIMIT}[
        result.verdict
    ]


def cmd_replay(args) -> int:
    inst, X = _load(args.file)
    with open(args.trace, encoding="utf-8") as fh:
        header, steps = parse_trace(fh.read(), inst, X)
    final = RestorationTrace(steps, X, X).allocations()[-1]
    problems = check_trace(inst, RestorationTrace(steps, X, final), header.get("fairness", "ef1"))
    print(f"{len(steps)} steps replayed")
    for p in problems:
        print(f"fail: {p}")
    if not problems:
        print("pass")
    return EXIT_OK if not problems else EXIT_NEGATIVE


def cmd_reduce_pmr(args) -> int:
    with open(args.pmr, encoding="utf-8") as fh:
        P = parse_pmr(fh.read())
    R = build_reduction(P)
    write_atomic(args.output, emit_instance(R.instance, R.start))
    print(f"{R.instance.n} agents, {R.instance.m} items written to {args.output}")
    return EXIT_OK


def cmd_pmr_reach(args) -> int:
    with open(args.pmr, encoding="utf-8") as fh:
        P = parse_pmr(fh.read())
    ok = pmr_reachable(P)
    print("reachable" if ok else "unreachable")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_gen(args) -> int:
    if args.family == "tight-identical":
        _need(args, "n", "m")
        inst, X = gen_tight_identical(args.n, args.m)
    elif args.family == "path-orientation":
        _need(args, "n")
        M, X = gen_path_lower_bound(args.n)
        inst = M.instance()
    elif args.family == "mixed-counterexample":
        inst, X = corpus.gen_mixed_counterexample()
    elif args.family == "efx-counterexample":
        inst, X = corpus.gen_efx_counterexample()
    else:
        _need(args, "n", "m")
        inst, X = corpus.gen_efx_family(args.n, args.m)
    text = emit_instance(inst, X)
    if args.output:
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _need(args, *names: str) -> None:
    missing = [f"--{k}" for k in names if getattr(args, k) is None]
    if missing:
        raise EF1Error(f"gen {args.family} needs {' '.join(missing)}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ef1restore", description="EF1 restoration toolkit")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check instance and allocation invariants")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="print envy amounts and fairness verdicts")
    p.add_argument("file")
    p.add_argument("--fairness", choices=("ef1", "efx"), default="ef1")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("restore", help="run a restoration algorithm")
    p.add_argument("file")
    p.add_argument("--method", required=True, choices=("identical", "identical-chores", "orientation"))
    p.add_argument("--trace", help="write the trace here (JSON lines)")
    p.set_defaults(func=cmd_restore)

    p = sub.add_parser("reach", help="decide restoration by breadth-first search")
    p.add_argument("file")
    p.add_argument("--ops", choices=(TRANSFERS, TRANSFERS_AND_EXCHANGES), default=TRANSFERS)
    p.add_argument("--max-states", type=int, default=5_000_000)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--fairness", choices=("ef1", "efx"), default="ef1")
    p.add_argument("--granularity", choices=GRANULARITIES, default=ENVY_MAX)
    p.add_argument("--trace", help="write the shortest trace here (JSON lines)")
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("replay", help="replay a trace against its instance")
    p.add_argument("file")
    p.add_argument("trace")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("reduce-pmr", help="build the restoration instance of a PMR file")
    p.add_argument("pmr")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_reduce_pmr)

    p = sub.add_parser("pmr-reach", help="decide perfect matching reconfiguration")
    p.add_argument("pmr")
    p.set_defaults(func=cmd_pmr_reach)

    p = sub.add_parser("gen", help="generate a named instance family")
    p.add_argument(
        "family",
        choices=("tight-identical", "path-orientation", "mixed-counterexample", "efx-counterexample", "efx-family"),
    )
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (EF1Error, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

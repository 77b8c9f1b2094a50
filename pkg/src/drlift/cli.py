"""Command-line harness.

    drlift run [--solver NAME] [--seed N] [--epsilon E] [--mode M] instance.json
    drlift run --compare-reductions [--budgets 16,256,4096] [--plot fig.png]
    drlift verify instance.json

Exit codes: 0 success, 1 failed verification, 2 parse error,
3 precondition violation, 4 size-guard rejection.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from .continuous import maximize_polymatroid
from .decomposition import as_fraction, verify_completeness
from .errors import InstanceFormatError, PreconditionError, SizeGuardError
from .instances import Instance, load_instance
from .lattice import GroundCoordinates, check_dr, check_lattice_submodular, check_monotone
from .records import ExperimentRecord, write_records
from .reduction import (
    Cardinality,
    LiftedKnapsack,
    Polymatroid,
    build,
    lift_constraint,
)
from .solvers import (
    brute_force,
    brute_force_lattice,
    density_greedy,
    double_greedy_deterministic,
    double_greedy_randomized,
    lazy_greedy,
    solve_cardinality,
)
from .submodular_check import check_lifted_submodular
from .zoo import make_concave_linear

SOLVERS = (
    "double-greedy",
    "double-greedy-det",
    "density-greedy",
    "lazy-greedy",
    "brute-force",
    "continuous-greedy",
)

EXIT_VERIFY_FAILED = 1
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_SIZE_GUARD = 4

DEFAULT_BUDGETS = ",".join(str(2**k) for k in range(4, 17))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InstanceFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except SizeGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIZE_GUARD


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="drlift",
        description="Maximize DR-submodular lattice functions via the set-function lift.",
    )
    sub = parser.add_subparsers(required=True)

    run = sub.add_parser("run", help="solve an instance or run the scaling study")
    run.add_argument("instance", nargs="?", help="instance JSON file")
    run.add_argument("--solver", choices=SOLVERS, default="double-greedy")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--epsilon", default="1/10", help="rational like 1/8 or 0.1")
    run.add_argument(
        "--mode", choices=("exact", "refined", "naive"), default="exact"
    )
    run.add_argument(
        "--compare-reductions",
        action="store_true",
        help="oracle-call scaling study across reduction modes",
    )
    run.add_argument("--budgets", default=DEFAULT_BUDGETS, help="comma-separated")
    run.add_argument("--out", type=Path, help="also write records to this file")
    run.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    run.add_argument(
        "--plot", type=Path, help="render the scaling figure to this file"
    )
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="run desk-scale validators on an instance")
    verify.add_argument("instance")
    verify.add_argument("--epsilon", default="1/10")
    verify.add_argument(
        "--mode", choices=("exact", "refined", "naive"), default="exact"
    )
    verify.set_defaults(func=cmd_verify)
    return parser


def cmd_run(args) -> int:
    if args.compare_reductions:
        records = scaling_study(args)
    else:
        if not args.instance:
            raise InstanceFormatError("an instance file is required without --compare-reductions")
        inst = load_instance(args.instance)
        records = [solve_instance(inst, args)]
    write_records(records, sys.stdout, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            write_records(records, fh, args.format)
    if args.plot:
        from .plotting import scaling_figure

        scaling_figure(records, args.plot)
        print(f"figure written to {args.plot}", file=sys.stderr)
    return 0


def solve_instance(inst: Instance, args) -> ExperimentRecord:
    t0 = time.perf_counter()
    seed: int | None = None
    if args.solver == "continuous-greedy":
        if not isinstance(inst.constraint, Polymatroid):
            raise PreconditionError("continuous-greedy needs a polymatroid constraint")
        ri = build(inst.fn, inst.gc, args.mode, epsilon=_eps(args))
        start = ri.oracle_calls
        x, value, _ = maximize_polymatroid(ri, inst.constraint.oracle, seed=args.seed)
        calls = ri.oracle_calls - start
        point = x
        seed = args.seed
        mode = ri.mode
    elif args.solver in ("density-greedy", "lazy-greedy") and isinstance(
        inst.constraint, Cardinality
    ):
        result, ri = solve_cardinality(
            inst.fn,
            inst.gc,
            inst.constraint.k,
            _eps(args),
            algorithm="density" if args.solver == "density-greedy" else "lazy",
        )
        value, calls, point, mode = result.value, result.oracle_calls, result.point, ri.mode
    else:
        ri = build(inst.fn, inst.gc, args.mode, epsilon=_eps(args))
        mode = ri.mode
        lifted = None
        if inst.constraint is not None:
            lifted = lift_constraint(inst.constraint, ri)
        if args.solver == "double-greedy":
            _require_unconstrained(lifted)
            result = double_greedy_randomized(ri, args.seed)
            seed = args.seed
        elif args.solver == "double-greedy-det":
            _require_unconstrained(lifted)
            result = double_greedy_deterministic(ri)
        elif args.solver == "density-greedy":
            result = density_greedy(ri, _knap(lifted), _eps(args))
        elif args.solver == "lazy-greedy":
            result = lazy_greedy(ri, _knap(lifted))
        elif args.solver == "brute-force":
            result = brute_force(ri, lifted)
        else:  # pragma: no cover
            raise PreconditionError(f"unhandled solver {args.solver}")
        value, calls, point = result.value, result.oracle_calls, result.point
    wall_ms = (time.perf_counter() - t0) * 1000.0
    opt = _try_opt(inst)
    return ExperimentRecord(
        instance=inst.name,
        mode=mode,
        solver=args.solver,
        value=value,
        opt=opt,
        ratio=None,
        oracle_calls=calls,
        wall_ms=wall_ms,
        seed=seed,
    )


def _require_unconstrained(lifted) -> None:
    if lifted is not None:
        raise PreconditionError("double greedy handles unconstrained instances only")


def _knap(lifted) -> LiftedKnapsack:
    if not isinstance(lifted, LiftedKnapsack):
        raise PreconditionError("this solver needs a cardinality or knapsack constraint")
    return lifted


def _eps(args):
    return as_fraction(args.epsilon)


def _try_opt(inst: Instance) -> float | None:
    if inst.gc.domain_size > 200_000:
        return None
    _, opt = brute_force_lattice(inst.fn, inst.gc, inst.constraint)
    return opt


def scaling_study(args) -> list[ExperimentRecord]:
    """Oracle calls of the unconstrained pipeline across reduction modes."""
    try:
        budgets = [int(b) for b in args.budgets.split(",") if b.strip()]
    except ValueError as exc:
        raise InstanceFormatError(f"bad --budgets: {exc}") from exc
    if not budgets or any(b < 1 for b in budgets):
        raise PreconditionError("budgets must be positive integers")
    records = []
    for budget in budgets:
        for mode in ("exact-log", "naive-copies"):
            fn = make_concave_linear([1.0], [(1,)], "sqrt")
            gc = GroundCoordinates((budget,))
            ri = build(fn, gc, "exact" if mode == "exact-log" else "naive")
            t0 = time.perf_counter()
            start = ri.oracle_calls
            result = double_greedy_deterministic(ri)
            wall_ms = (time.perf_counter() - t0) * 1000.0
            records.append(
                ExperimentRecord(
                    instance=f"scaling-B{budget}",
                    mode=mode,
                    solver="double-greedy-det",
                    value=result.value,
                    opt=None,
                    ratio=None,
                    oracle_calls=ri.oracle_calls - start,
                    wall_ms=wall_ms,
                    seed=None,
                )
            )
    return records


def cmd_verify(args) -> int:
    inst = load_instance(args.instance)
    lines: list[tuple[str, bool, str]] = []

    dr = check_dr(inst.fn, inst.gc)
    lines.append(("diminishing-returns", dr.ok, dr.detail))
    if dr.ok:
        ls = check_lattice_submodular(inst.fn, inst.gc)
        lines.append(("lattice-submodular", ls.ok, ls.detail))
    mono = check_monotone(inst.fn, inst.gc)
    flag_ok = mono.ok == inst.monotone
    lines.append(
        (
            "monotone-flag",
            flag_ok,
            f"declared {inst.monotone}, measured {mono.ok}",
        )
    )

    ri = build(inst.fn, inst.gc, args.mode, epsilon=_eps(args))
    for i, d in enumerate(ri.decomps):
        report = verify_completeness(d)
        lines.append(
            (
                f"decomposition-complete[{inst.gc.labels[i]}]",
                report.ok,
                "" if report.ok else f"q={report.failing_q} unreachable",
            )
        )
    if ri.size <= 14 and dr.ok:
        sub = check_lifted_submodular(ri)
        lines.append(("lifted-submodular", sub.ok, sub.detail))

    failed = [name for name, ok, _ in lines if not ok]
    for name, ok, detail in lines:
        status = "PASS" if ok else "FAIL"
        suffix = f"  ({detail})" if detail and not ok else ""
        print(f"{status}  {name}{suffix}")
    print(f"{len(lines) - len(failed)}/{len(lines)} checks passed")
    return 0 if not failed else EXIT_VERIFY_FAILED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line surface: instance generation, solving, verification, benchmarks.

Exit codes: 0 ok, 1 usage error, 2 validation/precondition failure,
3 internal invariant breach.  All fraction flags are ``p/q`` strings; no
floats cross this boundary.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import List, Optional, Sequence

from . import jsonio, solvers, verify
from .mms import mms_approx, mms_exact
from .model import (
    Instance,
    InternalInvariantError,
    PreconditionError,
    ValidationError,
    parse_ratio,
)

BENCH_COLUMNS = [
    "instanceId",
    "goal",
    "epsilon",
    "delta",
    "mmsRatio",
    "efxPass",
    "ef1Pass",
    "poolSize",
    "iterations",
    "wallMillis",
]

GOALS = ("mms", "efx-mms", "ef1-mms")


@dataclass(frozen=True)
class GenSpec:
    """Deterministic random-instance recipe."""

    n: int
    m: int
    distribution: str  # uniform:lo:hi | bivalued:a:b:p/q | identical:lo:hi
    seed: int


def _sample_row(rng: random.Random, m: int, kind: str, params: Sequence[str]) -> List[int]:
    if kind in ("uniform", "identical"):
        lo, hi = int(params[0]), int(params[1])
        if lo > hi:
            raise ValidationError(f"uniform bounds out of order: {lo} > {hi}")
        return [rng.randint(lo, hi) for _ in range(m)]
    if kind == "bivalued":
        a, b = int(params[0]), int(params[1])
        if a == b:
            raise ValidationError("bivalued distribution needs two distinct values")
        p = parse_ratio(params[2])
        if p > 1:
            raise ValidationError("bivalued probability must be at most 1")
        return [
            a if rng.randrange(p.denominator) < p.numerator else b for _ in range(m)
        ]
    raise ValidationError(f"unknown distribution {kind!r}")


def generate_instance(spec: GenSpec) -> Instance:
    """Deterministic for a fixed spec; identical distributions copy one row."""
    if spec.n < 1 or spec.m < 0:
        raise ValidationError("need n >= 1 agents and m >= 0 goods")
    kind, _, rest = spec.distribution.partition(":")
    params = rest.split(":") if rest else []
    rng = random.Random(spec.seed)
    if kind == "identical":
        row = _sample_row(rng, spec.m, kind, params)
        matrix = [list(row) for _ in range(spec.n)]
    else:
        matrix = [_sample_row(rng, spec.m, kind, params) for _ in range(spec.n)]
    from .model import new_instance

    return new_instance(matrix)


def cmd_gen(args) -> int:
    spec = GenSpec(n=args.agents, m=args.goods, distribution=args.dist, seed=args.seed)
    inst = generate_instance(spec)
    text = jsonio.instance_to_json(inst)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _records_for(inst: Instance, epsilon: Fraction, exact_cap: int):
    if epsilon == 0:
        return [mms_exact(inst, i, inst.n, cap=exact_cap) for i in range(inst.n)]
    return [mms_approx(inst, i, inst.n, epsilon) for i in range(inst.n)]


def cmd_mms(args) -> int:
    inst = jsonio.instance_from_json(Path(args.instance).read_text())
    epsilon = parse_ratio(args.epsilon)
    records = _records_for(inst, epsilon, args.exact_cap)
    payload = [
        {
            "agent": r.agent,
            "parts": r.parts,
            "value": r.value,
            "quality": str(r.quality),
            "witness": [sorted(b) for b in r.witness],
        }
        for r in records
    ]
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _solve(inst: Instance, goal: str, cfg: solvers.SolverConfig) -> solvers.SolveReport:
    if goal == "mms":
        return solvers.approx_mms(inst, cfg)
    if goal == "efx-mms":
        return solvers.approx_mms_efx(inst, cfg)
    if goal == "ef1-mms":
        return solvers.approx_mms_ef1(inst, cfg)
    raise ValidationError(f"unknown goal {goal!r}")


def _report_payload(report: solvers.SolveReport) -> dict:
    return {
        "bundles": [sorted(b) for b in report.allocation.bundles],
        "pool": sorted(report.allocation.pool),
        "mms": list(report.mms),
        "minMmsRatio": (
            "unbounded" if report.min_mms_ratio is None else str(report.min_mms_ratio)
        ),
        "efxHolds": report.efx_holds,
        "ef1Holds": report.ef1_holds,
        "efxViolation": report.efx_violation,
        "ef1Violation": report.ef1_violation,
        "iterations": report.iterations,
        "poolSize": len(report.allocation.pool),
    }


def cmd_solve(args) -> int:
    inst = jsonio.instance_from_json(Path(args.instance).read_text())
    cfg = solvers.SolverConfig(
        epsilon=parse_ratio(args.epsilon),
        delta=parse_ratio(args.delta),
        exact_cap=args.exact_cap,
        trace_enabled=args.trace is not None,
    )
    report = _solve(inst, args.goal, cfg)
    if args.trace:
        events = [
            {
                "iteration": e.iteration,
                "kind": e.kind,
                "allocated": sorted(e.allocated),
                "potential": list(e.potential),
                "detail": e.detail,
            }
            for e in report.trace
        ]
        Path(args.trace).write_text(json.dumps(events, indent=2) + "\n")
    json.dump(_report_payload(report), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_verify(args) -> int:
    inst = jsonio.instance_from_json(Path(args.instance).read_text())
    x = jsonio.allocation_from_json(Path(args.allocation).read_text())
    from .model import require_valid

    require_valid(inst, x)
    alpha = parse_ratio(args.alpha)
    payload: dict = {}
    notions = [args.notion] if args.notion else ["efx", "ef1", "mms"]
    if "efx" in notions:
        witness = verify.check_efx(inst, x, alpha)
        payload["efx"] = {
            "alpha": str(alpha),
            "pass": witness is None,
            "violation": witness,
            "maxFactor": _fmt_ratio(verify.efx_factor(inst, x)),
        }
    if "ef1" in notions:
        witness = verify.check_ef1(inst, x, alpha)
        payload["ef1"] = {
            "alpha": str(alpha),
            "pass": witness is None,
            "violation": witness,
            "maxFactor": _fmt_ratio(verify.ef1_factor(inst, x)),
        }
    if "mms" in notions:
        records = _records_for(inst, parse_ratio(args.epsilon), args.exact_cap)
        payload["mms"] = {
            "ratio": _fmt_ratio(verify.check_mms_ratio(inst, x, records)),
            "shareValues": [r.value for r in records],
        }
    json.dump(payload, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _fmt_ratio(value: Optional[Fraction]) -> str:
    return "unbounded" if value is None else str(value)


def _bench_one(job) -> dict:
    path, goal, epsilon_text, delta_text, exact_cap = job
    row = {
        "instanceId": Path(path).stem,
        "goal": goal,
        "epsilon": epsilon_text,
        "delta": delta_text,
    }
    try:
        inst = jsonio.instance_from_json(Path(path).read_text())
        cfg = solvers.SolverConfig(
            epsilon=parse_ratio(epsilon_text),
            delta=parse_ratio(delta_text),
            exact_cap=exact_cap,
        )
        start = time.perf_counter()
        report = _solve(inst, goal, cfg)
        elapsed = int(1000 * (time.perf_counter() - start))
        records = _records_for(inst, parse_ratio(epsilon_text), exact_cap)
        ratio = verify.check_mms_ratio(inst, report.allocation, records)
        alpha = Fraction(1) - parse_ratio(delta_text)
        row.update(
            mmsRatio=_fmt_ratio(ratio),
            efxPass=verify.check_efx(inst, report.allocation, alpha) is None,
            ef1Pass=verify.check_ef1(inst, report.allocation, alpha) is None,
            poolSize=len(report.allocation.pool),
            iterations=report.iterations,
            wallMillis=elapsed,
        )
    except Exception as exc:  # noqa: BLE001 - a bad instance must not kill the run
        row.update(
            mmsRatio=f"failed: {exc}",
            efxPass=False,
            ef1Pass=False,
            poolSize="",
            iterations="",
            wallMillis="",
        )
    return row


def cmd_bench(args) -> int:
    corpus = sorted(Path(args.corpus).glob("*.json"))
    goals = [g.strip() for g in args.goals.split(",") if g.strip()]
    for goal in goals:
        if goal not in GOALS:
            raise ValidationError(f"unknown goal {goal!r}")
    jobs = [
        (str(path), goal, args.epsilon, args.delta, args.exact_cap)
        for path in corpus
        for goal in goals
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_bench_one, jobs))
    else:
        rows = [_bench_one(job) for job in jobs]
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            out.close()
    return 0


def cmd_scale(args) -> int:
    payload = json.loads(Path(args.instance).read_text())
    if "valuations" not in payload:
        raise ValidationError("instance JSON must carry a 'valuations' matrix")
    rows = payload["valuations"]
    fractions: List[List[Fraction]] = []
    denominators: List[int] = [1]
    for i, row in enumerate(rows):
        parsed = []
        for g, entry in enumerate(row):
            try:
                value = Fraction(str(entry))
            except (ValueError, ZeroDivisionError) as exc:
                raise ValidationError(f"bad value at row {i}, column {g}: {exc}") from exc
            if value < 0:
                raise ValidationError(f"negative value at row {i}, column {g}")
            if value.denominator > args.denominator_bound:
                raise ValidationError(
                    f"value at row {i}, column {g} needs denominator "
                    f"{value.denominator} > bound {args.denominator_bound}"
                )
            parsed.append(value)
            denominators.append(value.denominator)
        fractions.append(parsed)
    factor = lcm(*denominators)
    matrix = [[int(v * factor) for v in row] for row in fractions]
    from .model import new_instance

    inst = new_instance(matrix)
    out_payload = json.loads(jsonio.instance_to_json(inst))
    out_payload["metadata"] = {"scaleFactor": factor}
    text = json.dumps(out_payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fairalloc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a random instance file")
    gen.add_argument("--agents", type=int, required=True)
    gen.add_argument("--goods", type=int, required=True)
    gen.add_argument(
        "--dist",
        default="uniform:0:50",
        help="uniform:lo:hi | bivalued:a:b:p/q | identical:lo:hi",
    )
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out")
    gen.set_defaults(func=cmd_gen)

    mms = sub.add_parser("mms", help="per-agent share values and witness partitions")
    mms.add_argument("--instance", required=True)
    mms.add_argument("--epsilon", default="0")
    mms.add_argument("--exact-cap", type=int, default=24)
    mms.set_defaults(func=cmd_mms)

    solve = sub.add_parser("solve", help="run a solver and print its report")
    solve.add_argument("--instance", required=True)
    solve.add_argument("--goal", choices=GOALS, required=True)
    solve.add_argument("--epsilon", default="0")
    solve.add_argument("--delta", default="0")
    solve.add_argument("--exact-cap", type=int, default=24)
    solve.add_argument("--trace", help="write iteration trace JSON to this path")
    solve.set_defaults(func=cmd_solve)

    ver = sub.add_parser("verify", help="judge an allocation file")
    ver.add_argument("--instance", required=True)
    ver.add_argument("--allocation", required=True)
    ver.add_argument("--alpha", default="1")
    ver.add_argument("--notion", choices=["efx", "ef1", "mms"])
    ver.add_argument("--epsilon", default="0")
    ver.add_argument("--exact-cap", type=int, default=24)
    ver.set_defaults(func=cmd_verify)

    bench = sub.add_parser("bench", help="run goals over a corpus, emit CSV")
    bench.add_argument("--corpus", required=True)
    bench.add_argument("--goals", default="ef1-mms")
    bench.add_argument("--epsilon", default="0")
    bench.add_argument("--delta", default="0")
    bench.add_argument("--jobs", type=int, default=1)
    bench.add_argument("--exact-cap", type=int, default=24)
    bench.add_argument("--out")
    bench.set_defaults(func=cmd_bench)

    scale = sub.add_parser("scale", help="turn rational valuations into integers")
    scale.add_argument("--instance", required=True)
    scale.add_argument("--denominator-bound", type=int, default=10**6)
    scale.add_argument("--out")
    scale.set_defaults(func=cmd_scale)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InternalInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

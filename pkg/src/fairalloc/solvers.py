"""Top-level allocation solvers with epsilon/delta knobs and iteration traces.

* :func:`approx_mms` — complete allocation giving every agent at least
  ``2/3 - eps`` of her maximin share.
* :func:`approx_mms_efx` — partial allocation that additionally leaves no
  ``(1 - delta)``-strong envy between agents.
* :func:`approx_mms_ef1` — complete allocation, envy-free up to one good,
  obtained by running envy-cycle elimination on the previous solver's output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import verify as verify_mod
from .envy import envy_cycle_elimination, most_envious_refine, strongly_envies
from .matching import build_threshold_graph, closed_matching, is_closed
from .mms import MMSRecord, mms_approx, mms_exact, reduce_partition
from .model import (
    Bundle,
    Instance,
    InternalInvariantError,
    PartialAllocation,
    PreconditionError,
    TraceEvent,
)

ZERO = Fraction(0)
TWO_THIRDS = Fraction(2, 3)


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by all solvers.

    ``epsilon`` relaxes the maximin-share factor from 2/3, switching the share
    engine to the scaled approximate one; ``delta`` relaxes the strong-envy
    predicate.  Both zero is the existence-grade exact mode.
    """

    epsilon: Fraction = ZERO
    delta: Fraction = ZERO
    exact_cap: int = 24
    trace_enabled: bool = False
    tie_break: str = "lowest-index"

    def __post_init__(self):
        if not 0 <= self.epsilon < 1 or not 0 <= self.delta < 1:
            raise PreconditionError("epsilon and delta must lie in [0, 1)")
        if TWO_THIRDS - self.epsilon <= 0:
            raise PreconditionError("effective share factor 2/3 - epsilon must be positive")

    @property
    def factor(self) -> Fraction:
        return TWO_THIRDS - self.epsilon


@dataclass(frozen=True)
class SolveReport:
    """Solver output plus fairness fields recomputed from scratch by `verify`."""

    allocation: PartialAllocation
    mms: tuple  # per-agent share values used for thresholds
    min_mms_ratio: Optional[Fraction]  # None means every agent's share is 0
    efx_holds: bool
    ef1_holds: bool
    efx_violation: Optional[tuple]
    ef1_violation: Optional[tuple]
    iterations: int
    trace: tuple


def compute_records(inst: Instance, cfg: SolverConfig) -> List[MMSRecord]:
    """Per-agent full-set share records, computed once and reused by thresholds."""
    if cfg.epsilon == 0:
        return [mms_exact(inst, i, inst.n, cap=cfg.exact_cap) for i in range(inst.n)]
    return [mms_approx(inst, i, inst.n, cfg.epsilon) for i in range(inst.n)]


def _report(
    inst: Instance,
    x: PartialAllocation,
    records: Sequence[MMSRecord],
    cfg: SolverConfig,
    iterations: int,
    trace: List[TraceEvent],
) -> SolveReport:
    alpha = Fraction(1) - cfg.delta
    efx = verify_mod.check_efx(inst, x, alpha)
    ef1 = verify_mod.check_ef1(inst, x, alpha)
    ratio = verify_mod.check_mms_ratio(inst, x, records)
    return SolveReport(
        allocation=x,
        mms=tuple(r.value for r in records),
        min_mms_ratio=ratio,
        efx_holds=efx is None,
        ef1_holds=ef1 is None,
        efx_violation=efx,
        ef1_violation=ef1,
        iterations=iterations,
        trace=tuple(trace),
    )


def _potential(inst: Instance, bundles: Sequence[Bundle], allocated: set) -> tuple:
    return (sum(inst.value(a, bundles[a]) for a in allocated), len(allocated))


def _assert_remaining_invariant(
    inst: Instance,
    bundles: Sequence[Bundle],
    allocated: set,
    remaining: set,
    records: Sequence[MMSRecord],
    factor: Fraction,
) -> None:
    for i in remaining:
        threshold = factor * records[i].value
        for a in allocated:
            if not inst.value(i, bundles[a]) < threshold:
                raise InternalInvariantError(
                    f"remaining agent {i} values committed bundle of {a} "
                    "at or above her threshold"
                )


def approx_mms(inst: Instance, cfg: SolverConfig = SolverConfig()) -> SolveReport:
    """Complete allocation where every agent gets >= (2/3 - eps) of her share.

    Loop: the lowest remaining agent repartitions the pool from her full-set
    witness, a threshold graph is built over the remaining agents, and a
    closed matching commits bundles; matched agents leave the pool of agents.
    """
    records = compute_records(inst, cfg)
    factor = cfg.factor
    bundles: List[Bundle] = [frozenset()] * inst.n
    remaining = set(range(inst.n))
    trace: List[TraceEvent] = []
    iterations = 0
    while remaining:
        iterations += 1
        if iterations > inst.n + 1:
            raise InternalInvariantError("matching loop failed to shrink the agent set")
        allocated = set(range(inst.n)) - remaining
        rem_sorted = sorted(remaining)
        divider = rem_sorted[0]
        if cfg.trace_enabled:
            _assert_remaining_invariant(inst, bundles, allocated, remaining, records, factor)
        removed = [bundles[a] for a in sorted(allocated)]
        target = factor * records[divider].value
        partition = reduce_partition(
            inst, divider, records[divider], removed, len(remaining), target
        )
        if cfg.trace_enabled:
            trace.append(
                TraceEvent(
                    iterations,
                    "partition-built",
                    frozenset(allocated),
                    _potential(inst, bundles, allocated),
                    {"divider": divider, "bundles": [sorted(b) for b in partition]},
                )
            )
        graph = build_threshold_graph(
            inst, partition, rem_sorted, [records[a].value for a in rem_sorted], factor
        )
        cm = closed_matching(graph, mode="row-full")
        if not is_closed(graph, cm):
            raise InternalInvariantError("matching lost the closure property")
        for agent, j in cm.pairs:
            bundles[agent] = partition[j]
            remaining.discard(agent)
        allocated = set(range(inst.n)) - remaining
        trace.append(
            TraceEvent(
                iterations,
                "matching-committed",
                frozenset(allocated),
                _potential(inst, bundles, allocated),
                {"pairs": list(cm.pairs)},
            )
        )
    x = PartialAllocation(bundles=tuple(bundles), pool=frozenset())
    covered = frozenset().union(*bundles) if bundles else frozenset()
    if covered != inst.all_goods():
        raise InternalInvariantError("output allocation is not complete")
    return _report(inst, x, records, cfg, iterations, trace)


def _shrink_bundle(
    inst: Instance,
    bundle: Bundle,
    remaining: Sequence[int],
    records: Sequence[MMSRecord],
    factor: Fraction,
) -> Bundle:
    """Inclusion-minimal subset still meeting some remaining agent's threshold."""

    def satisfied(b: Bundle) -> bool:
        return any(
            inst.value(i, b) >= factor * records[i].value for i in remaining
        )

    if not satisfied(bundle):
        raise InternalInvariantError("partition bundle misses every remaining threshold")
    keep = set(bundle)
    for g in sorted(bundle):
        if satisfied(frozenset(keep - {g})):
            keep.discard(g)
    return frozenset(keep)


def _assert_allocated_efx(
    inst: Instance,
    x: PartialAllocation,
    allocated: set,
    delta: Fraction,
) -> None:
    for a in allocated:
        for b in allocated:
            if a != b and strongly_envies(inst, x, a, x.bundles[b], delta):
                raise InternalInvariantError(
                    f"allocated agent {a} strongly envies {b}; induction broken"
                )


def approx_mms_efx(
    inst: Instance,
    cfg: SolverConfig = SolverConfig(),
    strict_strong_envy: bool = False,
) -> SolveReport:
    """Partial allocation that is (2/3 - eps)-MMS and (1 - delta)-EFX.

    Each round the lowest remaining agent partitions the pool, bundles are
    shrunk to inclusion-minimal threshold-meeting subsets, and any strong envy
    from an already-allocated agent triggers a reallocation and a restart;
    otherwise a closed matching commits bundles to remaining agents.

    ``strict_strong_envy`` widens the reallocation check to all agents rather
    than just allocated ones; experimental, off by default.
    """
    records = compute_records(inst, cfg)
    factor = cfg.factor
    delta = cfg.delta
    bundles: List[Bundle] = [frozenset()] * inst.n
    remaining = set(range(inst.n))
    trace: List[TraceEvent] = []
    iterations = 0
    guard = 2 * (inst.n + 2) * (1 + sum(sum(row) for row in inst.v))

    def pool() -> Bundle:
        committed = frozenset().union(*bundles) if bundles else frozenset()
        return inst.all_goods() - committed

    def snapshot() -> PartialAllocation:
        return PartialAllocation(bundles=tuple(bundles), pool=pool())

    while remaining:
        iterations += 1
        if iterations > guard:
            raise InternalInvariantError("solver exceeded its termination bound")
        allocated = set(range(inst.n)) - remaining
        rem_sorted = sorted(remaining)
        divider = rem_sorted[0]
        if cfg.trace_enabled:
            _assert_remaining_invariant(inst, bundles, allocated, remaining, records, factor)
            _assert_allocated_efx(inst, snapshot(), allocated, delta)
        removed = [bundles[a] for a in sorted(allocated)]
        target = factor * records[divider].value
        partition = reduce_partition(
            inst, divider, records[divider], removed, len(remaining), target
        )
        if cfg.trace_enabled:
            trace.append(
                TraceEvent(
                    iterations,
                    "partition-built",
                    frozenset(allocated),
                    _potential(inst, bundles, allocated),
                    {"divider": divider, "bundles": [sorted(b) for b in partition]},
                )
            )

        restart = False
        shrunk: List[Bundle] = []
        for j, raw in enumerate(partition):
            tight = _shrink_bundle(inst, raw, rem_sorted, records, factor)
            shrunk.append(tight)
            if cfg.trace_enabled:
                trace.append(
                    TraceEvent(
                        iterations,
                        "bundle-shrunk",
                        frozenset(allocated),
                        _potential(inst, bundles, allocated),
                        {"index": j, "before": sorted(raw), "after": sorted(tight)},
                    )
                )
            candidates = sorted(range(inst.n)) if strict_strong_envy else sorted(allocated)
            current = snapshot()
            enviers = [
                a for a in candidates if strongly_envies(inst, current, a, tight, delta)
            ]
            if enviers:
                winner, subset = most_envious_refine(inst, current, tight, candidates, delta)
                bundles[winner] = subset
                allocated_now = set(range(inst.n)) - remaining
                trace.append(
                    TraceEvent(
                        iterations,
                        "reallocation",
                        frozenset(allocated_now),
                        _potential(inst, bundles, allocated_now),
                        {"agent": winner, "bundle": sorted(subset)},
                    )
                )
                restart = True
                break
        if restart:
            continue

        graph = build_threshold_graph(
            inst, shrunk, rem_sorted, [records[a].value for a in rem_sorted], factor
        )
        cm = closed_matching(graph, mode="column-covered")
        if not is_closed(graph, cm):
            raise InternalInvariantError("matching lost the closure property")
        for agent, j in cm.pairs:
            bundles[agent] = shrunk[j]
            remaining.discard(agent)
        allocated = set(range(inst.n)) - remaining
        trace.append(
            TraceEvent(
                iterations,
                "matching-committed",
                frozenset(allocated),
                _potential(inst, bundles, allocated),
                {"pairs": list(cm.pairs)},
            )
        )

    x = snapshot()
    if cfg.trace_enabled:
        _assert_allocated_efx(inst, x, set(range(inst.n)), delta)
    return _report(inst, x, records, cfg, iterations, trace)


def approx_mms_ef1(
    inst: Instance, cfg: SolverConfig = SolverConfig()
) -> SolveReport:
    """Complete allocation that is (1 - delta)-EF1 and (2/3 - eps)-MMS.

    Runs the partial EFX solver, then envy-cycle elimination on its pool; no
    agent's value ever drops below her partial-stage value.
    """
    partial = approx_mms_efx(inst, cfg)
    trace: List[TraceEvent] = list(partial.trace)
    on_event = trace.append if cfg.trace_enabled else None
    complete = envy_cycle_elimination(inst, partial.allocation, on_event)
    for i in range(inst.n):
        before = inst.value(i, partial.allocation.bundles[i])
        after = inst.value(i, complete.bundles[i])
        if after < before:
            raise InternalInvariantError(f"agent {i} lost value during completion")
    if not complete.complete:
        raise InternalInvariantError("envy-cycle elimination left goods unallocated")
    records = compute_records(inst, cfg)
    return _report(inst, complete, records, cfg, partial.iterations, trace)


def audit_potential(trace: Sequence[TraceEvent]):
    """Check that (allocated value sum, allocated count) rises lexicographically.

    Reallocations must strictly raise the sum; committed matchings must
    strictly raise the count without lowering the sum.  Returns None if the
    trace is consistent, else the index of the offending event.
    """
    prev = (0, 0)
    for idx, event in enumerate(trace):
        if event.kind == "reallocation":
            if not event.potential[0] > prev[0]:
                return idx
            prev = event.potential
        elif event.kind == "matching-committed":
            if not (event.potential[1] > prev[1] and event.potential[0] >= prev[0]):
                return idx
            prev = event.potential
    return None

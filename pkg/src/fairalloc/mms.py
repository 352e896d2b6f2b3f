"""Maximin share computation and the partition-reduction constructor.

Three engines compute an agent's maximin share over a set of goods:

* :func:`mms_bruteforce` — exhaustive search over set partitions with sound
  branch-and-bound pruning; the independent oracle.
* :func:`mms_exact` — binary search on the share value with a bin-covering
  feasibility decision (:func:`feasible_cover`).
* :func:`mms_approx` — value-scaled exact search giving a certified
  ``(1 - eps)`` lower bound; usable beyond the exact good-count cap.

:func:`reduce_partition` rebuilds, from a full-set witness partition, a
partition of the goods that survive after removing low-value bundles, keeping
every output bundle above a rational target.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

from .model import (
    Bundle,
    Instance,
    InternalInvariantError,
    PreconditionError,
)

BRUTEFORCE_CAP = 12
EXACT_CAP = 24


@dataclass(frozen=True)
class MMSRecord:
    """An agent's maximin share value with a witness partition.

    ``witness`` partitions all goods into exactly ``parts`` bundles, each
    worth at least ``quality * value`` to the agent (``quality`` is 1 for the
    exact engines, ``1 - eps`` for the approximate one).
    """

    agent: int
    parts: int
    value: int
    witness: tuple  # tuple of `parts` frozensets
    quality: Fraction


@dataclass(frozen=True)
class ReductionBuckets:
    """Witness-bundle indices classified by how much value removal took away."""

    c0: tuple
    c1: tuple
    c2: tuple


def _greedy_min_fill(values: Sequence[int], parts: int) -> Tuple[int, List[List[int]]]:
    """Longest-processing-time seed: a feasible partition and its min bundle sum."""
    bins: List[List[int]] = [[] for _ in range(parts)]
    fills = [0] * parts
    for g in sorted(range(len(values)), key=lambda g: (-values[g], g)):
        b = min(range(parts), key=lambda b: (fills[b], b))
        bins[b].append(g)
        fills[b] += values[g]
    return min(fills), bins


@lru_cache(maxsize=None)
def _bruteforce_core(values: Tuple[int, ...], parts: int) -> Tuple[int, tuple]:
    """Exhaustive max-min partition search.

    Enumerates set partitions into at most ``parts`` blocks via recursive
    assignment in descending value order.  Prunes only with bounds that can
    never cut off a strictly improving partition: equal-fill symmetry, the
    empty-block count, and the remaining-value deficit against the incumbent.
    """
    m = len(values)
    if parts == 1:
        return sum(values), (tuple(range(m)),)
    order = sorted(range(m), key=lambda g: (-values[g], g))
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + values[order[i]]
    best, seed = _greedy_min_fill(values, parts)
    best_assign = [0] * m
    for b, bin_goods in enumerate(seed):
        for g in bin_goods:
            best_assign[g] = b
    fills = [0] * parts
    assign = [0] * m

    def rec(i: int) -> None:
        nonlocal best, best_assign
        if i == m:
            cand = min(fills)
            if cand > best:
                best = cand
                best_assign = [assign[g] for g in range(m)]
            return
        # A block left empty can never beat a non-negative incumbent.
        empties = fills.count(0)
        if m - i < empties and best >= 0:
            return
        # Deficit bound: every block must still be liftable above the incumbent.
        need = sum(best + 1 - f for f in fills if f <= best)
        if need > suffix[i]:
            return
        g = order[i]
        seen = set()
        for b in range(parts):
            if fills[b] in seen:
                continue
            seen.add(fills[b])
            fills[b] += values[g]
            assign[g] = b
            rec(i + 1)
            fills[b] -= values[g]
        return

    rec(0)
    witness = [[] for _ in range(parts)]
    for g in range(m):
        witness[best_assign[g]].append(g)
    return max(best, 0), tuple(tuple(b) for b in witness)


def mms_bruteforce(
    inst: Instance, agent: int, parts: int, cap: int = BRUTEFORCE_CAP
) -> MMSRecord:
    """Exact maximin share by exhaustive partition enumeration (the oracle)."""
    if parts < 1:
        raise PreconditionError("parts must be >= 1")
    if inst.m > cap:
        raise PreconditionError(f"brute-force oracle capped at {cap} goods, got {inst.m}")
    value, witness = _bruteforce_core(tuple(inst.v[agent]), parts)
    return MMSRecord(
        agent=agent,
        parts=parts,
        value=value,
        witness=tuple(frozenset(b) for b in witness),
        quality=Fraction(1),
    )


def feasible_cover(
    values: Sequence[int], parts: int, target: int, cap: int = EXACT_CAP
) -> Optional[List[List[int]]]:
    """Partition ALL items into ``parts`` bundles each summing to >= ``target``.

    Returns the bundles (lists of item indices) or None if no such partition
    exists.  Deterministic branch-and-bound: items in descending value order,
    bins tried emptiest-first, equal (capped) fills deduplicated, infeasible
    states memoized.
    """
    if parts < 1:
        raise PreconditionError("parts must be >= 1")
    if len(values) > cap:
        raise PreconditionError(f"cover decision capped at {cap} items, got {len(values)}")
    result = _cover_core(tuple(values), parts, target)
    if result is None:
        return None
    bins: List[List[int]] = [[] for _ in range(parts)]
    for g, b in enumerate(result):
        bins[b].append(g)
    return bins


def _cover_core(
    values: Tuple[int, ...], parts: int, target: int
) -> Optional[Tuple[int, ...]]:
    m = len(values)
    if target <= 0:
        return tuple(0 for _ in range(m))
    order = sorted(range(m), key=lambda g: (-values[g], g))
    suffix = [0] * (m + 1)
    for i in range(m - 1, -1, -1):
        suffix[i] = suffix[i + 1] + values[order[i]]
    if suffix[0] < parts * target:
        return None
    fills = [0] * parts
    assign = [0] * m
    failed = set()

    def rec(i: int) -> bool:
        deficit = sum(target - f for f in fills if f < target)
        if deficit == 0:
            # All bins covered; dump the rest anywhere.
            for k in range(i, m):
                assign[order[k]] = 0
            return True
        if i == m or deficit > suffix[i]:
            return False
        key = (i, tuple(sorted(min(f, target) for f in fills)))
        if key in failed:
            return False
        g = order[i]
        seen = set()
        for b in sorted(range(parts), key=lambda b: (fills[b], b)):
            capped = min(fills[b], target)
            if capped in seen:
                continue
            seen.add(capped)
            fills[b] += values[g]
            assign[g] = b
            if rec(i + 1):
                return True
            fills[b] -= values[g]
        failed.add(key)
        return False

    if not rec(0):
        return None
    return tuple(assign)


@lru_cache(maxsize=None)
def _cover_search(values: Tuple[int, ...], parts: int) -> Tuple[int, tuple]:
    """Largest integer target with a feasible cover, plus its witness."""
    lo, hi = 0, (sum(values) // parts if parts else 0)
    witness = _cover_core(values, parts, 0)
    while lo < hi:
        mid = (lo + hi + 1) // 2
        attempt = _cover_core(values, parts, mid)
        if attempt is None:
            hi = mid - 1
        else:
            lo = mid
            witness = attempt
    bins: List[List[int]] = [[] for _ in range(parts)]
    for g, b in enumerate(witness):
        bins[b].append(g)
    return lo, tuple(tuple(b) for b in bins)


def mms_exact(inst: Instance, agent: int, parts: int, cap: int = EXACT_CAP) -> MMSRecord:
    """Exact maximin share via binary search on the bin-covering decision."""
    if parts < 1:
        raise PreconditionError("parts must be >= 1")
    if inst.m > cap:
        raise PreconditionError(f"exact engine capped at {cap} goods, got {inst.m}")
    value, witness = _cover_search(tuple(inst.v[agent]), parts)
    return MMSRecord(
        agent=agent,
        parts=parts,
        value=value,
        witness=tuple(frozenset(b) for b in witness),
        quality=Fraction(1),
    )


def mms_approx(inst: Instance, agent: int, parts: int, eps: Fraction) -> MMSRecord:
    """Certified ``(1 - eps)`` lower bound on the maximin share.

    Values are floored to multiples of a unit ``u <= eps * L / m`` where ``L``
    is a greedy lower bound on the share; the exact engine then runs on the
    scaled values.  A witness bundle loses less than ``u`` per good against
    the true valuation, so the minimum true witness value — which is what we
    return — is at least ``MMS - u*m >= (1 - eps) * MMS``.  With ``u = 1``
    the computation is identical to :func:`mms_exact`.
    """
    if parts < 1:
        raise PreconditionError("parts must be >= 1")
    if not 0 < eps < 1:
        raise PreconditionError(f"eps must lie in (0,1), got {eps}")
    row = tuple(inst.v[agent])
    m = inst.m
    if m == 0 or sum(row) == 0:
        witness = [frozenset(range(m))] + [frozenset()] * (parts - 1)
        return MMSRecord(agent, parts, 0, tuple(witness), Fraction(1) - eps)
    lower, _ = _greedy_min_fill(row, parts)
    unit = max(1, (eps.numerator * lower) // (eps.denominator * m))
    scaled = tuple(v // unit for v in row)
    _, witness_idx = _cover_search(scaled, parts)
    witness = tuple(frozenset(b) for b in witness_idx)
    value = min(inst.value(agent, b) for b in witness)
    return MMSRecord(agent=agent, parts=parts, value=value, witness=witness,
                     quality=Fraction(1) - eps)


def witness_minimum(inst: Instance, record: MMSRecord) -> int:
    """Minimum true value of the record's witness bundles for its agent."""
    return min(inst.value(record.agent, b) for b in record.witness)


def classify_buckets(
    inst: Instance, agent: int, witness: Sequence[Bundle], removed_union: Bundle, w: int, t: Fraction
) -> ReductionBuckets:
    """Split witness-bundle indices by the value the removal took from each."""
    c0, c1, c2 = [], [], []
    for j, bundle in enumerate(witness):
        d = inst.value(agent, bundle & removed_union)
        if d <= w - t:
            c0.append(j)
        elif d <= w - t / 2:
            c1.append(j)
        else:
            c2.append(j)
    return ReductionBuckets(c0=tuple(c0), c1=tuple(c1), c2=tuple(c2))


def reduce_partition(
    inst: Instance,
    agent: int,
    record: MMSRecord,
    removed: Sequence[Bundle],
    r: int,
    t,
) -> List[Bundle]:
    """Partition the goods outside ``removed`` into ``r`` bundles, each >= ``t``.

    ``record`` must be a witness over the full good set with minimum bundle
    value ``w`` satisfying ``2w >= 3t``, and every removed bundle must be
    worth strictly less than ``t`` to the agent.  Survivors of witness
    bundles that lost little value are used directly; those that lost a
    middling amount are paired up; leftovers merge into the last bundle.
    """
    t = Fraction(t)
    if t < 0:
        raise PreconditionError("target t must be non-negative")
    witness = record.witness
    covered = frozenset().union(*witness) if witness else frozenset()
    if covered != inst.all_goods():
        raise PreconditionError("record witness must cover the full good set")
    if r != record.parts - len(removed):
        raise PreconditionError(
            f"r must equal parts - |removed| = {record.parts - len(removed)}, got {r}"
        )
    if r < 1:
        raise PreconditionError("all parts removed; nothing to partition")
    seen: set = set()
    for idx, bundle in enumerate(removed):
        if bundle & seen:
            raise PreconditionError(f"removed bundle {idx} overlaps an earlier one")
        seen |= bundle
        if inst.value(agent, bundle) >= t:
            raise PreconditionError(
                f"removed bundle {idx} is worth {inst.value(agent, bundle)} "
                f">= target {t} to agent {agent}"
            )
    w = witness_minimum(inst, record)
    if 2 * w < 3 * t:
        raise PreconditionError(
            f"witness too weak: minimum {w} violates 2w >= 3t for t = {t}"
        )
    removed_union = frozenset(seen)
    buckets = classify_buckets(inst, agent, witness, removed_union, w, t)
    survivors = {j: witness[j] - removed_union for j in range(record.parts)}

    qualifying: List[Bundle] = [survivors[j] for j in buckets.c0]
    leftovers: List[Bundle] = [survivors[j] for j in buckets.c2]
    pairs = list(buckets.c1)
    for a, b in zip(pairs[0::2], pairs[1::2]):
        qualifying.append(survivors[a] | survivors[b])
    if len(pairs) % 2:
        leftovers.append(survivors[pairs[-1]])

    if len(qualifying) < r:
        raise InternalInvariantError(
            f"only {len(qualifying)} qualifying bundles for r = {r}; "
            "a precondition must have been breached"
        )
    out = list(qualifying[:r])
    extras = qualifying[r:] + leftovers
    if extras:
        out[-1] = out[-1].union(*extras)

    produced = frozenset().union(*out) if out else frozenset()
    if produced != inst.all_goods() - removed_union:
        raise InternalInvariantError("reduction output does not partition the remainder")
    for j, bundle in enumerate(out):
        if inst.value(agent, bundle) < t:
            raise InternalInvariantError(f"reduction bundle {j} fell below target {t}")
    return out

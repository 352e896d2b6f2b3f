"""Core domain types for discrete fair division with additive integer valuations.

Valuations are non-negative integers and every fairness comparison in the
library is carried out in exact integer (or `fractions.Fraction`) arithmetic.
Rational-valued inputs must be pre-scaled to integers (see the ``scale`` CLI
subcommand).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

#: A bundle is a frozen set of good indices.  External JSON formats list the
#: indices in increasing order.
Bundle = frozenset

#: Per-agent valuation totals must stay below this bound so that tripled and
#: cross-multiplied comparisons fit comfortably in 128-bit intermediates.
VALUE_BOUND = 1 << 60


class ValidationError(ValueError):
    """Malformed input data (ragged matrix, bad index, broken allocation)."""


class PreconditionError(ValueError):
    """An operation was called outside its documented precondition."""


class InternalInvariantError(RuntimeError):
    """A solver invariant was breached; indicates a bug, never masked."""


@dataclass(frozen=True)
class Instance:
    """A fair division instance: ``n`` agents, ``m`` goods, integer matrix ``v``."""

    n: int
    m: int
    v: tuple  # tuple of n tuples, each of length m

    def value(self, agent: int, goods: Iterable[int]) -> int:
        """Additive value of ``goods`` for ``agent``."""
        row = self.v[agent]
        return sum(row[g] for g in goods)

    def row_total(self, agent: int) -> int:
        return sum(self.v[agent])

    def all_goods(self) -> Bundle:
        return frozenset(range(self.m))


def new_instance(matrix: Sequence[Sequence[int]]) -> Instance:
    """Validate a valuation matrix and wrap it in an :class:`Instance`.

    Raises :class:`ValidationError` for an empty or ragged matrix, a negative
    entry, or a per-agent total exceeding the overflow bound; the message
    pinpoints the offending row/column.
    """
    rows = [tuple(row) for row in matrix]
    if not rows:
        raise ValidationError("valuation matrix must have at least one row")
    m = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != m:
            raise ValidationError(
                f"ragged matrix: row {i} has {len(row)} entries, expected {m}"
            )
        for g, val in enumerate(row):
            if not isinstance(val, int) or isinstance(val, bool):
                raise ValidationError(f"entry at row {i}, column {g} is not an integer")
            if val < 0:
                raise ValidationError(f"negative entry at row {i}, column {g}")
        if sum(row) > VALUE_BOUND:
            raise ValidationError(f"row {i} total exceeds bound 2**60")
    return Instance(n=len(rows), m=m, v=tuple(rows))


def bundle_value(inst: Instance, agent: int, b: Iterable[int]) -> int:
    """Exact additive value of bundle ``b`` for ``agent``."""
    if not 0 <= agent < inst.n:
        raise ValidationError(f"agent index {agent} out of range")
    goods = list(b)
    for g in goods:
        if not 0 <= g < inst.m:
            raise ValidationError(f"good index {g} out of range")
    return inst.value(agent, goods)


@dataclass(frozen=True)
class PartialAllocation:
    """Per-agent disjoint bundles plus a pool of unallocated goods.

    The bundles and the pool are pairwise disjoint and together cover all
    goods; the allocation is *complete* when the pool is empty.
    """

    bundles: tuple  # tuple of n frozensets
    pool: Bundle

    @property
    def complete(self) -> bool:
        return not self.pool

    def replace(self, agent: int, new_bundle: Bundle, new_pool: Bundle) -> "PartialAllocation":
        bundles = list(self.bundles)
        bundles[agent] = frozenset(new_bundle)
        return PartialAllocation(bundles=tuple(bundles), pool=frozenset(new_pool))


def allocation(bundles: Iterable[Iterable[int]], pool: Iterable[int] = ()) -> PartialAllocation:
    """Convenience constructor from plain iterables."""
    return PartialAllocation(
        bundles=tuple(frozenset(b) for b in bundles), pool=frozenset(pool)
    )


def validate_allocation(inst: Instance, x: PartialAllocation) -> Optional[str]:
    """Check disjointness and coverage; return None if ok, else the first violation."""
    if len(x.bundles) != inst.n:
        return f"expected {inst.n} bundles, got {len(x.bundles)}"
    seen = {}
    parts = list(enumerate(x.bundles)) + [("pool", x.pool)]
    for owner, bundle in parts:
        for g in sorted(bundle):
            if not 0 <= g < inst.m:
                return f"good index {g} out of range"
            if g in seen:
                return f"good {g} duplicated (held by {seen[g]} and {owner})"
            seen[g] = owner
    for g in range(inst.m):
        if g not in seen:
            return f"good {g} unplaced"
    return None


def require_valid(inst: Instance, x: PartialAllocation) -> None:
    problem = validate_allocation(inst, x)
    if problem is not None:
        raise ValidationError(problem)


@dataclass(frozen=True)
class TraceEvent:
    """One solver state snapshot, emitted in execution order.

    ``potential`` is the exact integer pair (sum of allocated agents' own
    values, number of allocated agents) used by the termination audit.
    """

    iteration: int
    kind: str  # partition-built | bundle-shrunk | reallocation |
    #            matching-committed | cycle-rotated | good-placed
    allocated: frozenset
    potential: tuple  # (int, int)
    detail: dict = field(default_factory=dict)


def parse_ratio(text: str) -> Fraction:
    """Parse a ``p/q`` (or plain integer) flag into an exact Fraction."""
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValidationError(f"bad ratio {text!r}: {exc}") from exc
    if value < 0:
        raise ValidationError(f"ratio {text!r} must be non-negative")
    return value

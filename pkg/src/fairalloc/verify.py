"""Independent fairness checkers and the exact separation fixtures.

Solver outputs are judged only by this module; the checkers are deliberately
plain triple loops over the raw definitions so they double as brute force.
The pool of a partial allocation is never treated as a rival bundle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from .mms import MMSRecord
from .model import (
    Instance,
    PartialAllocation,
    PreconditionError,
    allocation,
    new_instance,
)

ONE = Fraction(1)


@dataclass(frozen=True)
class FairnessReport:
    """Largest exactly-passing envy factors plus the worst share ratio.

    ``efx_factor``/``ef1_factor``/``mms_ratio`` of None mean the notion is
    unbounded for this allocation (no binding comparison exists).
    """

    efx_factor: Optional[Fraction]
    ef1_factor: Optional[Fraction]
    mms_ratio: Optional[Fraction]
    efx_violation: Optional[tuple]
    ef1_violation: Optional[tuple]


def check_efx(
    inst: Instance, x: PartialAllocation, alpha: Fraction = ONE
) -> Optional[Tuple[int, int, int]]:
    """None if no agent alpha-strongly envies another, else a witness (i, j, g)."""
    for i in range(inst.n):
        own = inst.value(i, x.bundles[i])
        for j in range(inst.n):
            if i == j:
                continue
            rival = inst.value(i, x.bundles[j])
            for g in sorted(x.bundles[j]):
                if own < alpha * (rival - inst.v[i][g]):
                    return (i, j, g)
    return None


def check_ef1(
    inst: Instance, x: PartialAllocation, alpha: Fraction = ONE
) -> Optional[Tuple[int, int]]:
    """None if every envy dies after removing some single good, else (i, j)."""
    for i in range(inst.n):
        own = inst.value(i, x.bundles[i])
        for j in range(inst.n):
            if i == j or not x.bundles[j]:
                continue
            rival = inst.value(i, x.bundles[j])
            best_after_removal = min(
                rival - inst.v[i][g] for g in x.bundles[j]
            )
            if own < alpha * best_after_removal:
                return (i, j)
    return None


def efx_factor(inst: Instance, x: PartialAllocation) -> Optional[Fraction]:
    """Largest alpha at which check_efx passes, as an exact fraction (None: any)."""
    worst: Optional[Fraction] = None
    for i in range(inst.n):
        own = inst.value(i, x.bundles[i])
        for j in range(inst.n):
            if i == j:
                continue
            rival = inst.value(i, x.bundles[j])
            for g in x.bundles[j]:
                reduced = rival - inst.v[i][g]
                if reduced > 0:
                    ratio = Fraction(own, reduced)
                    if worst is None or ratio < worst:
                        worst = ratio
    return worst


def ef1_factor(inst: Instance, x: PartialAllocation) -> Optional[Fraction]:
    """Largest alpha at which check_ef1 passes (None: passes for every alpha)."""
    worst: Optional[Fraction] = None
    for i in range(inst.n):
        own = inst.value(i, x.bundles[i])
        for j in range(inst.n):
            if i == j or not x.bundles[j]:
                continue
            rival = inst.value(i, x.bundles[j])
            reduced = min(rival - inst.v[i][g] for g in x.bundles[j])
            if reduced > 0:
                ratio = Fraction(own, reduced)
                if worst is None or ratio < worst:
                    worst = ratio
    return worst


def check_mms_ratio(
    inst: Instance, x: PartialAllocation, records: Sequence[MMSRecord]
) -> Optional[Fraction]:
    """Worst v_i(X_i) / MMS_i over agents with a positive share.

    Agents whose share value is 0 are satisfied by any allocation and are
    excluded; if every agent's share is 0 the ratio is unbounded (None).
    """
    if len(records) != inst.n:
        raise PreconditionError("need one share record per agent")
    worst: Optional[Fraction] = None
    for i, record in enumerate(records):
        if record.agent != i:
            raise PreconditionError("records must be ordered by agent index")
        if record.value == 0:
            continue
        ratio = Fraction(inst.value(i, x.bundles[i]), record.value)
        if worst is None or ratio < worst:
            worst = ratio
    return worst


def fairness_report(
    inst: Instance,
    x: PartialAllocation,
    records: Sequence[MMSRecord],
    alpha: Fraction = ONE,
) -> FairnessReport:
    return FairnessReport(
        efx_factor=efx_factor(inst, x),
        ef1_factor=ef1_factor(inst, x),
        mms_ratio=check_mms_ratio(inst, x, records),
        efx_violation=check_efx(inst, x, alpha),
        ef1_violation=check_ef1(inst, x, alpha),
    )


def fixture_prop1(n: int) -> Tuple[Instance, PartialAllocation]:
    """Identical agents where an EF1 allocation is only 1/n of the share.

    2n-1 goods: the first n-1 are worth ``n`` each, the rest 1 each (values
    pre-scaled to integers).  Agent i < n-1 holds {g_i, g_{n-1+i}}; the last
    agent holds only the final unit good.
    """
    if n < 2:
        raise PreconditionError("fixture needs n >= 2")
    row = [n] * (n - 1) + [1] * n
    inst = new_instance([row] * n)
    bundles = [{i, (n - 1) + i} for i in range(n - 1)] + [{2 * n - 2}]
    return inst, allocation(bundles)


def fixture_prop2(n: int) -> Tuple[Instance, PartialAllocation]:
    """Identical agents, two unit goods, both handed to the last agent.

    Every agent's share is 0, so any allocation is alpha-MMS, yet the
    allocation fails alpha-EF1 for every positive alpha.
    """
    if n < 3:
        raise PreconditionError("fixture needs n >= 3")
    inst = new_instance([[1, 1]] * n)
    bundles = [set() for _ in range(n - 1)] + [{0, 1}]
    return inst, allocation(bundles)

"""Envy-graph machinery: strong envy, most-envious refinement, cycle elimination."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

from .model import (
    Bundle,
    Instance,
    InternalInvariantError,
    PartialAllocation,
    PreconditionError,
    TraceEvent,
    require_valid,
)

ZERO = Fraction(0)


@dataclass(frozen=True)
class EnvyGraph:
    """Directed graph with an edge i -> j iff agent i strictly prefers j's bundle."""

    nodes: tuple
    edges: dict  # node -> frozenset of envied nodes


def build_envy_graph(inst: Instance, x: PartialAllocation) -> EnvyGraph:
    edges = {}
    for i in range(inst.n):
        own = inst.value(i, x.bundles[i])
        edges[i] = frozenset(
            j
            for j in range(inst.n)
            if j != i and inst.value(i, x.bundles[j]) > own
        )
    return EnvyGraph(nodes=tuple(range(inst.n)), edges=edges)


def sources(g: EnvyGraph) -> List[int]:
    """Nodes with no incoming edge, ascending."""
    envied: Set[int] = set()
    for targets in g.edges.values():
        envied |= targets
    return [i for i in g.nodes if i not in envied]


def strongly_envies(
    inst: Instance,
    x: PartialAllocation,
    a: int,
    b: Bundle,
    delta: Fraction = ZERO,
) -> bool:
    """True iff some single-good removal from ``b`` still beats a's own bundle.

    With ``delta > 0`` the rival value is discounted by ``1 - delta``;
    ``delta = 0`` is the exact predicate.
    """
    own = inst.value(a, x.bundles[a])
    rival = inst.value(a, b)
    one_minus = Fraction(1) - delta
    for g in b:
        if one_minus * (rival - inst.v[a][g]) > own:
            return True
    return False


def min_envied_subset(inst: Instance, a: int, b: Bundle, target: int) -> Bundle:
    """Inclusion-minimal subset of ``b`` still worth more than ``target`` to ``a``.

    Scans goods in ascending index order, dropping each good whose removal
    keeps the remaining value strictly above ``target``.
    """
    if inst.value(a, b) <= target:
        raise PreconditionError(
            f"bundle is worth {inst.value(a, b)} <= target {target} to agent {a}"
        )
    keep = set(b)
    for g in sorted(b):
        if inst.value(a, keep - {g}) > target:
            keep.discard(g)
    return frozenset(keep)


def most_envious_refine(
    inst: Instance,
    x: PartialAllocation,
    b: Bundle,
    candidates: Sequence[int],
    delta: Fraction = ZERO,
) -> Tuple[int, Bundle]:
    """A most envious candidate of ``b`` with a subset nobody strongly envies.

    Iterative refinement: while some candidate strongly envies the current
    subset, hand it to her and shrink it to an inclusion-minimal envied
    subset.  Each refinement strictly shrinks the subset, so this terminates.
    """
    ordered = sorted(candidates)
    z = frozenset(b)
    winner: Optional[int] = None
    while True:
        envier = next(
            (c for c in ordered if strongly_envies(inst, x, c, z, delta)), None
        )
        if envier is None:
            break
        winner = envier
        z = min_envied_subset(inst, envier, z, inst.value(envier, x.bundles[envier]))
    if winner is None:
        raise PreconditionError("no candidate strongly envies the bundle")
    return winner, z


def find_cycle(g: EnvyGraph) -> Optional[List[int]]:
    """Lowest-indexed node's lexicographically-first cycle, or None if acyclic."""
    color: Dict[int, int] = {}  # 0 unseen, 1 on stack, 2 done

    def dfs(node: int, stack: List[int]) -> Optional[List[int]]:
        color[node] = 1
        stack.append(node)
        for nxt in sorted(g.edges[node]):
            state = color.get(nxt, 0)
            if state == 1:
                return stack[stack.index(nxt):]
            if state == 0:
                found = dfs(nxt, stack)
                if found is not None:
                    return found
        stack.pop()
        color[node] = 2
        return None

    for start in g.nodes:
        if color.get(start, 0) == 0:
            cycle = dfs(start, [])
            if cycle is not None:
                return cycle
    return None


def _envy_edge_count(g: EnvyGraph) -> int:
    return sum(len(t) for t in g.edges.values())


def eliminate_cycles(
    inst: Instance,
    x: PartialAllocation,
    on_rotate: Optional[Callable[[List[int], PartialAllocation, PartialAllocation], None]] = None,
) -> PartialAllocation:
    """Rotate bundles backwards along envy cycles until the envy graph is acyclic.

    Each rotation strictly improves every agent on the cycle and strictly
    decreases the number of envy edges; the pool is untouched.
    """
    current = x
    while True:
        graph = build_envy_graph(inst, current)
        cycle = find_cycle(graph)
        if cycle is None:
            return current
        bundles = list(current.bundles)
        k = len(cycle)
        rotated = list(bundles)
        for idx in range(k - 1):
            rotated[cycle[idx]] = bundles[cycle[idx + 1]]
        rotated[cycle[-1]] = bundles[cycle[0]]
        nxt = PartialAllocation(bundles=tuple(rotated), pool=current.pool)
        for idx, agent in enumerate(cycle):
            if inst.value(agent, nxt.bundles[agent]) <= inst.value(agent, current.bundles[agent]):
                raise InternalInvariantError("cycle rotation failed to improve an agent")
        if _envy_edge_count(build_envy_graph(inst, nxt)) >= _envy_edge_count(graph):
            raise InternalInvariantError("cycle rotation did not reduce envy edges")
        if on_rotate is not None:
            on_rotate(cycle, current, nxt)
        current = nxt


def envy_cycle_elimination(
    inst: Instance,
    x: PartialAllocation,
    on_event: Optional[Callable[[TraceEvent], None]] = None,
) -> PartialAllocation:
    """Complete the allocation: clear cycles, then feed pool goods to sources.

    The lowest-indexed pool good always goes to the lowest-indexed source.
    Every agent's own value is non-decreasing across the run, and a partial
    EF1 input yields a complete EF1 output.
    """
    require_valid(inst, x)
    step = 0

    def emit(kind: str, alloc: PartialAllocation, detail: dict) -> None:
        nonlocal step
        step += 1
        if on_event is None:
            return
        allocated = frozenset(i for i in range(inst.n) if alloc.bundles[i])
        potential = (
            sum(inst.value(i, alloc.bundles[i]) for i in allocated),
            len(allocated),
        )
        on_event(TraceEvent(step, kind, allocated, potential, detail))

    def on_rotate(cycle: List[int], before: PartialAllocation, after: PartialAllocation) -> None:
        emit(
            "cycle-rotated",
            after,
            {
                "cycle": list(cycle),
                "before": [sorted(b) for b in before.bundles],
                "after": [sorted(b) for b in after.bundles],
            },
        )

    current = eliminate_cycles(inst, x, on_rotate)
    while current.pool:
        graph = build_envy_graph(inst, current)
        src = sources(graph)[0]
        good = min(current.pool)
        current = current.replace(
            src, current.bundles[src] | {good}, current.pool - {good}
        )
        emit("good-placed", current, {"agent": src, "good": good})
        current = eliminate_cycles(inst, current, on_rotate)
    return current

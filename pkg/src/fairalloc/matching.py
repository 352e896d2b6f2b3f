"""Threshold graphs, maximum bipartite matching, and closed matchings.

A *closed* matching is one where every neighbor of a matched bundle is a
matched agent, so committing the matched pairs leaves no unmatched agent with
a claim on a committed bundle.  When the maximum matching is not perfect, a
closed matching is extracted from a minimal Hall violator on the bundle side.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .model import Bundle, Instance, InternalInvariantError, PreconditionError


@dataclass(frozen=True)
class ThresholdGraph:
    """Bipartite agent/bundle graph under per-agent rational share thresholds.

    ``agents[p]`` is the agent id at position ``p``; ``adjacency[p]`` is the
    set of bundle indices whose value for that agent meets her threshold.
    """

    agents: tuple  # agent ids
    bundles: tuple  # frozensets of goods
    thresholds: tuple  # Fractions, aligned with `agents`
    adjacency: tuple  # frozensets of bundle indices, aligned with `agents`

    def neighbors_of_bundle(self, j: int) -> frozenset:
        """Agent positions adjacent to bundle ``j``."""
        return frozenset(p for p, adj in enumerate(self.adjacency) if j in adj)


@dataclass(frozen=True)
class ClosedMatching:
    """A non-empty matching whose matched bundles have only matched neighbors."""

    pairs: tuple  # (agent id, bundle index) pairs


def build_threshold_graph(
    inst: Instance,
    bundles: Sequence[Bundle],
    agent_set: Sequence[int],
    mms: Sequence[int],
    factor: Fraction,
) -> ThresholdGraph:
    """Edge (i, j) present iff ``v_i(bundle_j) >= factor * mms_i`` (exact)."""
    agents = tuple(sorted(agent_set))
    if len(bundles) != len(agents):
        raise PreconditionError(
            f"need as many bundles as agents: {len(bundles)} vs {len(agents)}"
        )
    if len(mms) != len(agents):
        raise PreconditionError("need one share value per agent")
    thresholds = tuple(factor * Fraction(s) for s in mms)
    adjacency = []
    for p, agent in enumerate(agents):
        t = thresholds[p]
        adjacency.append(
            frozenset(j for j, b in enumerate(bundles) if inst.value(agent, b) >= t)
        )
    return ThresholdGraph(
        agents=agents,
        bundles=tuple(frozenset(b) for b in bundles),
        thresholds=thresholds,
        adjacency=tuple(adjacency),
    )


def _augment(
    g: ThresholdGraph,
    p: int,
    match_bundle: Dict[int, int],
    visited: Set[int],
    allowed_bundles: Optional[frozenset] = None,
) -> bool:
    """Kuhn augmenting step from agent position ``p`` (ascending bundle scan)."""
    for j in sorted(g.adjacency[p]):
        if allowed_bundles is not None and j not in allowed_bundles:
            continue
        if j in visited:
            continue
        visited.add(j)
        if j not in match_bundle or _augment(
            g, match_bundle[j], match_bundle, visited, allowed_bundles
        ):
            match_bundle[j] = p
            return True
    return False


def max_matching(g: ThresholdGraph) -> Tuple[Tuple[int, int], ...]:
    """Maximum-cardinality matching as sorted (agent id, bundle index) pairs."""
    match_bundle: Dict[int, int] = {}
    for p in range(len(g.agents)):
        _augment(g, p, match_bundle, set())
    pairs = sorted((g.agents[p], j) for j, p in match_bundle.items())
    return tuple(pairs)


def _bundle_to_agent(g: ThresholdGraph, mm: Sequence[Tuple[int, int]]) -> Dict[int, int]:
    pos_of = {agent: p for p, agent in enumerate(g.agents)}
    return {j: pos_of[agent] for agent, j in mm}


def minimal_hall_violator(
    g: ThresholdGraph, mm: Sequence[Tuple[int, int]]
) -> frozenset:
    """A minimal bundle-index set S with ``|N(S)| < |S|``.

    Built by alternating-path reachability from the lowest-indexed unmatched
    bundle, then shrunk by repeated single-element removal in ascending index
    order while the violation persists.
    """
    n_bundles = len(g.bundles)
    matched = _bundle_to_agent(g, mm)
    unmatched = [j for j in range(n_bundles) if j not in matched]
    if not unmatched:
        raise PreconditionError("matching is perfect; no Hall violator exists")
    agent_to_bundle = {p: j for j, p in matched.items()}

    s: Set[int] = {unmatched[0]}
    frontier = [unmatched[0]]
    reached_agents: Set[int] = set()
    while frontier:
        j = frontier.pop()
        for p in g.neighbors_of_bundle(j):
            if p in reached_agents:
                continue
            reached_agents.add(p)
            if p not in agent_to_bundle:
                raise PreconditionError("matching is not maximum: augmenting path found")
            nxt = agent_to_bundle[p]
            if nxt not in s:
                s.add(nxt)
                frontier.append(nxt)

    def neighborhood(subset: Set[int]) -> Set[int]:
        out: Set[int] = set()
        for j in subset:
            out |= set(g.neighbors_of_bundle(j))
        return out

    changed = True
    while changed:
        changed = False
        for j in sorted(s):
            trial = s - {j}
            if trial and len(neighborhood(trial)) < len(trial):
                s = trial
                changed = True
                break
    return frozenset(s)


def closed_matching(g: ThresholdGraph, mode: str) -> ClosedMatching:
    """A non-empty matching whose matched bundles see only matched agents.

    ``mode`` names the structural precondition to check: ``row-full`` (some
    agent adjacent to every bundle) or ``column-covered`` (every bundle has a
    neighbor).  If the maximum matching is perfect it is returned; otherwise
    the highest index is dropped from a minimal Hall violator S and the
    agents N(S) are matched into the remainder.
    """
    n = len(g.bundles)
    if mode == "row-full":
        if not any(len(adj) == n for adj in g.adjacency):
            raise PreconditionError("row-full mode: no agent is adjacent to all bundles")
    elif mode == "column-covered":
        for j in range(n):
            if not g.neighbors_of_bundle(j):
                raise PreconditionError(
                    f"column-covered mode: bundle {j} has no neighbor"
                )
    else:
        raise PreconditionError(f"unknown mode {mode!r}")

    mm = max_matching(g)
    if len(mm) == n:
        return ClosedMatching(pairs=mm)

    s = minimal_hall_violator(g, mm)
    if len(s) < 2:
        raise InternalInvariantError("degenerate Hall violator despite mode precondition")
    t = frozenset(sorted(s)[:-1])
    agents_needed = set()
    for j in s:
        agents_needed |= set(g.neighbors_of_bundle(j))

    match_bundle: Dict[int, int] = {}
    for p in sorted(agents_needed):
        if not _augment(g, p, match_bundle, set(), allowed_bundles=t):
            raise InternalInvariantError(
                "could not saturate the violator's neighborhood"
            )
    pairs = tuple(sorted((g.agents[p], j) for j, p in match_bundle.items()))
    if not pairs:
        raise InternalInvariantError("closed matching came out empty")
    return ClosedMatching(pairs=pairs)


def is_closed(g: ThresholdGraph, cm: ClosedMatching) -> bool:
    """Re-verify the closure property by exhaustive edge scan."""
    matched_agents = {agent for agent, _ in cm.pairs}
    matched_bundles = {j for _, j in cm.pairs}
    if len(matched_agents) != len(cm.pairs) or len(matched_bundles) != len(cm.pairs):
        return False
    for p, agent in enumerate(g.agents):
        if agent in matched_agents:
            continue
        if g.adjacency[p] & matched_bundles:
            return False
    return True

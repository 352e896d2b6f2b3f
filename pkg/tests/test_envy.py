import random
from fractions import Fraction
from itertools import chain, combinations

import pytest

from fairalloc import (
    PartialAllocation,
    PreconditionError,
    allocation,
    build_envy_graph,
    eliminate_cycles,
    envy_cycle_elimination,
    min_envied_subset,
    most_envious_refine,
    new_instance,
    strongly_envies,
)
from fairalloc.envy import find_cycle, sources
from fairalloc.verify import check_ef1

from conftest import random_instance


def random_partial(rng, inst):
    bundles = [set() for _ in range(inst.n)]
    pool = set()
    for g in range(inst.m):
        owner = rng.randint(0, inst.n)
        if owner == inst.n:
            pool.add(g)
        else:
            bundles[owner].add(g)
    return allocation(bundles, pool)


def test_strong_envy_singleton_never():
    inst = new_instance([[9, 1], [1, 1]])
    x = allocation([{1}, {0}])
    assert not strongly_envies(inst, x, 0, x.bundles[1])


def test_strong_envy_two_goods():
    inst = new_instance([[3, 2, 2], [1, 1, 1]])
    rich = allocation([{0}, {1, 2}])
    assert not strongly_envies(inst, rich, 0, rich.bundles[1])
    poor_inst = new_instance([[1, 2, 2], [1, 1, 1]])
    assert strongly_envies(poor_inst, rich, 0, rich.bundles[1])


def test_strong_envy_delta_relaxation():
    # own 3 vs reduced rival 4: strong at delta=0, waived at delta=1/3
    inst = new_instance([[3, 4, 4], [1, 1, 1]])
    x = allocation([{0}, {1, 2}])
    assert strongly_envies(inst, x, 0, x.bundles[1])
    assert not strongly_envies(inst, x, 0, x.bundles[1], Fraction(1, 3))


def test_strong_envy_matches_bruteforce():
    rng = random.Random(11)
    for _ in range(300):
        inst = random_instance(rng, n_max=4, m_max=8)
        x = random_partial(rng, inst)
        a = rng.randrange(inst.n)
        b = x.bundles[rng.randrange(inst.n)]
        own = inst.value(a, x.bundles[a])
        naive = any(inst.value(a, b - {g}) > own for g in b)
        assert strongly_envies(inst, x, a, b) == naive
        assert len(b) > 1 or not naive


def test_min_envied_subset_singleton():
    inst = new_instance([[5]])
    assert min_envied_subset(inst, 0, frozenset({0}), 3) == frozenset({0})


def test_min_envied_subset_keeps_later_good():
    inst = new_instance([[3, 3]])
    assert min_envied_subset(inst, 0, frozenset({0, 1}), 2) == frozenset({1})


def test_min_envied_subset_needs_all():
    inst = new_instance([[1, 1, 1]])
    assert min_envied_subset(inst, 0, frozenset({0, 1, 2}), 2) == frozenset({0, 1, 2})


def test_min_envied_subset_precondition():
    inst = new_instance([[1, 1]])
    with pytest.raises(PreconditionError):
        min_envied_subset(inst, 0, frozenset({0, 1}), 5)


def test_most_envious_refine_requires_envier():
    inst = new_instance([[9, 1, 1], [9, 1, 1]])
    x = allocation([{0}, {1, 2}])
    with pytest.raises(PreconditionError):
        most_envious_refine(inst, x, x.bundles[0], [1])


def powerset(bundle):
    items = sorted(bundle)
    return chain.from_iterable(combinations(items, k) for k in range(len(items) + 1))


def test_most_envious_refine_postcondition_bruteforce():
    rng = random.Random(23)
    tested = 0
    while tested < 200:
        inst = random_instance(rng, n_max=4, m_max=8)
        x = random_partial(rng, inst)
        b = x.bundles[rng.randrange(inst.n)] | frozenset(x.pool)
        candidates = list(range(inst.n))
        if not any(strongly_envies(inst, x, c, b) for c in candidates):
            continue
        winner, z = most_envious_refine(inst, x, b, candidates)
        assert z <= b
        assert inst.value(winner, z) > inst.value(winner, x.bundles[winner])
        for c in candidates:
            assert not strongly_envies(inst, x, c, z)
            # full-subset oracle: no proper subset of z worth strictly more
            # than c's bundle survives any single-good removal
            own = inst.value(c, x.bundles[c])
            for sub in powerset(z):
                sub = frozenset(sub)
                if sub == z:
                    continue
                assert not any(
                    inst.value(c, sub - {g}) > own for g in sub
                )
        tested += 1


def test_eliminate_cycles_two_cycle():
    inst = new_instance([[1, 2], [2, 1]])
    x = allocation([{0}, {1}])
    out = eliminate_cycles(inst, x)
    assert out.bundles == (frozenset({1}), frozenset({0}))


def test_eliminate_cycles_identity_when_envy_free():
    inst = new_instance([[5, 1], [1, 5]])
    x = allocation([{0}, {1}])
    assert eliminate_cycles(inst, x) is x


def test_eliminate_cycles_three_cycle():
    inst = new_instance([[1, 2, 0], [0, 1, 2], [2, 0, 1]])
    x = allocation([{0}, {1}, {2}])
    rotations = []
    out = eliminate_cycles(inst, x, lambda cycle, a, b: rotations.append(cycle))
    assert rotations == [[0, 1, 2]]
    for i in range(3):
        assert inst.value(i, out.bundles[i]) == 2
    assert find_cycle(build_envy_graph(inst, out)) is None


def test_ece_single_agent_takes_everything():
    inst = new_instance([[4, 5, 6]])
    out = envy_cycle_elimination(inst, allocation([set()], {0, 1, 2}))
    assert out.bundles == (frozenset({0, 1, 2}),)
    assert not out.pool


def test_ece_from_empty_is_ef1():
    inst = new_instance([[3, 2, 1]] * 2)
    out = envy_cycle_elimination(
        inst, allocation([set(), set()], {0, 1, 2})
    )
    assert out.complete
    assert check_ef1(inst, out) is None


def test_ece_complete_input_untouched_when_acyclic():
    inst = new_instance([[5, 1], [1, 5]])
    x = allocation([{0}, {1}])
    assert envy_cycle_elimination(inst, x) is x


def test_ece_monotone_and_complete_random():
    rng = random.Random(31)
    for _ in range(200):
        inst = random_instance(rng, n_max=4, m_max=8)
        x = random_partial(rng, inst)
        out = envy_cycle_elimination(inst, x)
        assert out.complete
        for i in range(inst.n):
            assert inst.value(i, out.bundles[i]) >= inst.value(i, x.bundles[i])
        if check_ef1(inst, x) is None:
            assert check_ef1(inst, out) is None


def test_sources_exist_in_acyclic_graph():
    rng = random.Random(57)
    for _ in range(100):
        inst = random_instance(rng, n_max=4, m_max=8)
        x = eliminate_cycles(inst, random_partial(rng, inst))
        g = build_envy_graph(inst, x)
        assert find_cycle(g) is None
        assert sources(g)

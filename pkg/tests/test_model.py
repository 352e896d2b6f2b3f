import pytest
from hypothesis import given
from hypothesis import strategies as st

from fairalloc import (
    PartialAllocation,
    ValidationError,
    allocation,
    bundle_value,
    new_instance,
    validate_allocation,
)
from fairalloc.model import parse_ratio


def test_minimal_instance():
    inst = new_instance([[1]])
    assert (inst.n, inst.m) == (1, 1)


def test_scaled_unit_profile():
    inst = new_instance([[3, 3, 1, 1, 1]] * 3)
    assert (inst.n, inst.m) == (3, 5)


def test_ragged_matrix_rejected():
    with pytest.raises(ValidationError, match="ragged"):
        new_instance([[1, 2], [3]])


def test_negative_entry_rejected():
    with pytest.raises(ValidationError, match="row 1, column 0"):
        new_instance([[1, 2], [-3, 4]])


def test_overflow_bound_rejected():
    with pytest.raises(ValidationError, match="bound"):
        new_instance([[1 << 61]])


def test_bundle_value_examples():
    inst = new_instance([[5, 4, 3]])
    assert bundle_value(inst, 0, {0, 2}) == 8
    assert bundle_value(inst, 0, set()) == 0
    inst2 = new_instance([[1, 1, 1]])
    assert bundle_value(inst2, 0, {0, 1, 2}) == 3


def test_bundle_value_index_errors():
    inst = new_instance([[5, 4, 3]])
    with pytest.raises(ValidationError):
        bundle_value(inst, 1, {0})
    with pytest.raises(ValidationError):
        bundle_value(inst, 0, {3})


def test_validate_allocation_examples():
    inst = new_instance([[1, 1], [1, 1]])
    assert validate_allocation(inst, allocation([{0}, {1}])) is None
    assert "duplicated" in validate_allocation(inst, allocation([{0}, {0}]))
    assert "unplaced" in validate_allocation(inst, allocation([{0}, set()]))


matrices = st.integers(1, 4).flatmap(
    lambda m: st.lists(
        st.lists(st.integers(0, 100), min_size=m, max_size=m), min_size=1, max_size=4
    )
)


@given(matrices, st.randoms(use_true_random=False))
def test_additivity_over_partitions(matrix, rng):
    inst = new_instance(matrix)
    goods = list(range(inst.m))
    rng.shuffle(goods)
    cut = rng.randint(0, inst.m)
    left, right = set(goods[:cut]), set(goods[cut:])
    for i in range(inst.n):
        assert bundle_value(inst, i, left) + bundle_value(inst, i, right) == sum(
            inst.v[i]
        )


@given(
    st.integers(2, 4),
    st.lists(st.integers(0, 3), min_size=0, max_size=6),
)
def test_validation_iff_exact_coverage(n, owners):
    m = len(owners)
    inst = new_instance([[1] * m] * n if m else [[]] * n)
    bundles = [set() for _ in range(n)]
    pool = set()
    for g, owner in enumerate(owners):
        if owner < n:
            bundles[owner].add(g)
        else:
            pool.add(g)
    assert validate_allocation(inst, allocation(bundles, pool)) is None
    if m:
        # duplicate good 0 somewhere it is not already
        if 0 in pool:
            broken = allocation([bundles[0] | {0}] + bundles[1:], pool)
        else:
            broken = allocation(bundles, pool | {0})
        assert validate_allocation(inst, broken) is not None


def test_parse_ratio():
    assert parse_ratio("2/3").numerator == 2
    assert parse_ratio("1") == 1
    with pytest.raises(ValidationError):
        parse_ratio("-1/2")
    with pytest.raises(ValidationError):
        parse_ratio("x")

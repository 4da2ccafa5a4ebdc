from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from itertools import product
from math import comb
from math import floor
from math import log10

import numpy as np
import pytest

from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st

from src.errors import InfeasibleSample
from src.errors import InvalidArguments
from src.errors import QuotaExceedsCluster
from src.sampler import allocate
from src.sampler import count_sample_space
from src.sampler import hard_assign
from src.sampler import rebalance
from src.sampler import select_representatives


@pytest.mark.parametrize(
    ("responsibilities", "expected"),
    (
        ([[0.2, 0.8]], [1]),
        ([[0.5, 0.5]], [0]),
        ([[1.0], [1.0], [1.0]], [0, 0, 0]),
    ),
)
def test_hard_assign(responsibilities, expected):
    assert hard_assign(np.array(responsibilities)).tolist() == expected


@pytest.mark.parametrize(
    ("size", "cluster_sizes", "expected"),
    (
        (50, [140, 84, 56], [25, 15, 10]),
        (10, [3, 97], [1, 10]),
        (7, [30], [7]),
        # Exact half-integer shares round up: 49 * 3 / 6 = 24.5.
        (49, [3, 3], [25, 25]),
    ),
)
def test_allocate(size, cluster_sizes, expected):
    assert allocate(size, cluster_sizes) == expected


@pytest.mark.parametrize(
    ("size", "cluster_sizes"), ((0, [3, 4]), (5, []), (5, [3, 0]))
)
def test_allocate_rejects(size, cluster_sizes):
    with pytest.raises(InvalidArguments):
        allocate(size, cluster_sizes)


@pytest.mark.parametrize(
    ("raw", "sizes", "size", "expected"),
    (
        ([1, 10], [3, 97], 10, [1, 9]),
        ([25, 15, 10], [140, 84, 56], 50, [25, 15, 10]),
        ([1, 1, 1], [1, 1, 5], 6, [1, 1, 4]),
        ([3, 3], [2, 10], 6, [2, 4]),
    ),
)
def test_rebalance(raw, sizes, size, expected):
    assert rebalance(raw, sizes, size) == expected


@pytest.mark.parametrize(
    ("sizes", "size"), (([5, 5, 5], 2), ([1, 2], 4))
)
def test_rebalance_infeasible(sizes, size):
    with pytest.raises(InfeasibleSample):
        rebalance(allocate(size, sizes), sizes, size)


def check_quotas(sizes: list[int], size: int) -> None:
    raw = allocate(size, sizes)
    total = sum(sizes)
    # floor(s * n / N + 1/2) on integers: (2 * s * n + N) // (2 * N).
    assert raw == [max((2 * size * n + total) // (2 * total), 1) for n in sizes]
    final = rebalance(raw, sizes, size)
    assert sum(final) == size
    assert all(1 <= quota <= cluster for quota, cluster in zip(final, sizes))
    shares = [Fraction(size * cluster, total) for cluster in sizes]
    # Rebalancing moves a quota by at most one step per cluster.
    for quota, share, cluster in zip(final, shares, sizes):
        rounded = max(floor(share + Fraction(1, 2)), 1)
        assert quota >= min(rounded, cluster) - len(sizes)
        assert quota <= max(rounded, 1) + len(sizes)


@settings(max_examples=200, deadline=None)
@given(
    sizes=st.lists(st.integers(1, 60), min_size=1, max_size=8),
    data=st.data(),
)
def test_rebalance_properties(sizes, data):
    size = data.draw(st.integers(len(sizes), sum(sizes)))
    check_quotas(sizes, size)


def test_rebalance_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n_clusters = int(rng.integers(1, 10))
        sizes = rng.integers(1, 100, size=n_clusters).tolist()
        size = int(rng.integers(n_clusters, sum(sizes) + 1))
        check_quotas(sizes, size)


def test_rebalance_matches_allocation_when_sum_fits():
    sizes = [140, 84, 56]
    raw = allocate(50, sizes)
    assert rebalance(raw, sizes, 50) == raw


def test_select_top_members():
    responsibilities = np.array([[0.99], [0.60], [0.95]])
    result = select_representatives(
        responsibilities, np.zeros(3, dtype=int), [2], ["a", "c", "b"]
    )
    assert result.object_ids == ["a", "b"]
    assert [entry.rank for entry in result.entries] == [1, 2]


def test_select_breaks_ties_by_id():
    responsibilities = np.array([[0.9], [0.9]])
    result = select_representatives(
        responsibilities, np.zeros(2, dtype=int), [1], ["zeta", "alpha"]
    )
    assert result.object_ids == ["alpha"]


def test_select_orders_by_cluster_then_rank():
    responsibilities = np.array(
        [[0.9, 0.1], [0.2, 0.8], [0.7, 0.3], [0.4, 0.6]]
    )
    assignment = hard_assign(responsibilities)
    result = select_representatives(
        responsibilities, assignment, [1, 2], ["w", "x", "y", "z"]
    )
    assert [(e.object_id, e.cluster, e.rank) for e in result.entries] == [
        ("w", 0, 1),
        ("x", 1, 1),
        ("z", 1, 2),
    ]
    assert result.to_frame().columns.tolist() == [
        "object_id",
        "cluster",
        "responsibility",
        "rank",
    ]


def test_select_allows_zero_quota_for_empty_cluster():
    responsibilities = np.array([[0.6, 0.4], [0.7, 0.3]])
    result = select_representatives(
        responsibilities, np.zeros(2, dtype=int), [2, 0], ["a", "b"]
    )
    assert len(result) == 2


def test_select_rejects_oversized_quota():
    with pytest.raises(QuotaExceedsCluster):
        select_representatives(
            np.array([[1.0], [1.0]]), np.zeros(2, dtype=int), [3], ["a", "b"]
        )


def brute_force_best(
    responsibilities: np.ndarray,
    assignment: np.ndarray,
    quotas: list[int],
) -> float:
    best = 0.0
    for cluster, quota in enumerate(quotas):
        members = np.flatnonzero(assignment == cluster)
        best += max(
            sum(responsibilities[n, cluster] for n in subset)
            for subset in combinations(members, quota)
        )
    return best


@pytest.mark.parametrize("seed", range(40))
def test_selection_maximizes_total_responsibility(seed: int):
    rng = np.random.default_rng(seed)
    n_objects = int(rng.integers(2, 13))
    n_components = int(rng.integers(1, min(n_objects, 3) + 1))
    responsibilities = rng.dirichlet(np.ones(n_components), size=n_objects)
    assignment = hard_assign(responsibilities)
    sizes = np.bincount(assignment, minlength=n_components)
    quotas = [int(rng.integers(0, size + 1)) for size in sizes]
    ids = [f"o{n:02d}" for n in range(n_objects)]

    result = select_representatives(responsibilities, assignment, quotas, ids)
    chosen = sum(entry.responsibility for entry in result.entries)
    assert chosen == pytest.approx(
        brute_force_best(responsibilities, assignment, quotas)
    )
    assert len(result) == sum(quotas)
    assert len(set(result.object_ids)) == len(result)


def test_selection_on_six_objects_matches_enumeration():
    responsibilities = np.array(
        [
            [0.90, 0.10],
            [0.55, 0.45],
            [0.80, 0.20],
            [0.30, 0.70],
            [0.05, 0.95],
            [0.40, 0.60],
        ]
    )
    assignment = hard_assign(responsibilities)
    for quotas in product(range(1, 4), repeat=2):
        result = select_representatives(
            responsibilities, assignment, list(quotas), list("abcdef")
        )
        chosen = sum(entry.responsibility for entry in result.entries)
        assert chosen == pytest.approx(
            brute_force_best(responsibilities, assignment, list(quotas))
        )


@pytest.mark.parametrize(
    ("n_objects", "size"), ((10, 0), (4, 2), (30, 7), (280, 50), (1000, 500))
)
def test_count_sample_space_matches_exact_binomial(n_objects, size):
    assert count_sample_space(n_objects, size) == pytest.approx(
        log10(comb(n_objects, size)), abs=1e-9
    )


def test_count_sample_space_known_values():
    assert count_sample_space(7, 0) == 0.0
    assert count_sample_space(4, 2) == pytest.approx(0.778151, abs=1e-6)
    value = count_sample_space(280, 50)
    assert 6.5 <= 10 ** (value - 55) <= 7.5


@pytest.mark.parametrize(("n_objects", "size"), ((3, 4), (3, -1), (2.5, 1)))
def test_count_sample_space_rejects(n_objects, size):
    with pytest.raises(InvalidArguments):
        count_sample_space(n_objects, size)

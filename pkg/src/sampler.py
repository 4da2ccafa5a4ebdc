"""sampler turns clustering output into the final object sample.

Each cluster i contributes n_i representatives, where

    n_i = max(floor(size * |cluster i| / N + 0.5), 1)

keeps the clusters proportionally represented while guaranteeing that
even the smallest cluster appears. Because the floor of 1 and the
rounding can make the n_i miss the requested size, the quotas are then
rebalanced to sum exactly to it. Within a cluster, the members with the
highest posterior probability of belonging to it are selected.
"""

from __future__ import annotations

from fractions import Fraction
from math import floor
from math import log
from typing import TYPE_CHECKING

import numpy as np

from scipy.special import gammaln

from src.errors import InfeasibleSample
from src.errors import InvalidArguments
from src.errors import QuotaExceedsCluster
from src.log import log_debug
from src.log import logger
from src.reports import SampleEntry
from src.reports import SampleResult


if TYPE_CHECKING:
    from collections.abc import Sequence

HALF = Fraction(1, 2)


def hard_assign(responsibilities: np.ndarray) -> np.ndarray:
    """
    Assigns each object to its most probable cluster.

    Ties go to the smallest cluster index.

    >>> hard_assign(np.array([[0.2, 0.8], [0.5, 0.5]]))
    array([1, 0])
    """
    return np.argmax(np.asarray(responsibilities), axis=1)


def _proportional_share(size: int, cluster_size: int, total: int) -> Fraction:
    return Fraction(size * cluster_size, total)


@log_debug
def allocate(
    sample_expected_size: int, cluster_sizes: Sequence[int]
) -> list[int]:
    """
    Raw per-cluster quotas, max(floor(s * n_i / N + 1/2), 1).

    The rounding term is evaluated on exact rationals, so a share of
    exactly k + 1/2 always rounds up to k + 1.

    Parameters
    ----------
    sample_expected_size : int
        Requested sample size s >= 1.
    cluster_sizes : Sequence[int]
        Object count of every cluster, each >= 1.

    Returns
    -------
    list[int]
        One quota per cluster. Their sum may differ from s; see
        `rebalance`.

    -------
    Example
    -------
    >>> allocate(50, [140, 84, 56])
    [25, 15, 10]
    >>> allocate(10, [3, 97])
    [1, 10]
    """
    _check_sizes(sample_expected_size, cluster_sizes)
    total = sum(cluster_sizes)
    return [
        max(
            floor(
                _proportional_share(sample_expected_size, size, total) + HALF
            ),
            1,
        )
        for size in cluster_sizes
    ]


def _check_sizes(sample_expected_size: int, cluster_sizes: Sequence[int]) -> None:
    if sample_expected_size < 1:
        raise InvalidArguments(
            f"sample size must be at least 1, got {sample_expected_size}"
        )
    if not cluster_sizes or any(size < 1 for size in cluster_sizes):
        raise InvalidArguments("every cluster must hold at least one object")


def rebalance(
    raw_quotas: Sequence[int],
    cluster_sizes: Sequence[int],
    sample_expected_size: int,
) -> list[int]:
    """
    Adjusts raw quotas so they sum exactly to `sample_expected_size`.

    Quotas are first clamped to their cluster sizes. While the sum is too
    large, the quota with the largest over-representation (quota minus
    exact proportional share) is decremented, larger cluster index first
    on ties, never below 1. While it is too small, the quota with the
    largest under-representation among clusters with unselected members
    is incremented, smaller cluster index first on ties.

    :raises InfeasibleSample: The size is below the number of clusters
        or above the number of objects.
    """
    _check_sizes(sample_expected_size, cluster_sizes)
    if len(raw_quotas) != len(cluster_sizes):
        raise InvalidArguments("need one raw quota per cluster")
    if any(quota < 1 for quota in raw_quotas):
        raise InvalidArguments("raw quotas must be at least 1")
    total = sum(cluster_sizes)
    n_clusters = len(cluster_sizes)
    if not n_clusters <= sample_expected_size <= total:
        raise InfeasibleSample(sample_expected_size, n_clusters, total)

    quotas = [min(quota, size) for quota, size in zip(raw_quotas, cluster_sizes)]
    shares = [
        _proportional_share(sample_expected_size, size, total)
        for size in cluster_sizes
    ]
    while sum(quotas) > sample_expected_size:
        candidates = [i for i in range(n_clusters) if quotas[i] > 1]
        chosen = max(candidates, key=lambda i: (quotas[i] - shares[i], i))
        quotas[chosen] -= 1
    while sum(quotas) < sample_expected_size:
        candidates = [
            i for i in range(n_clusters) if quotas[i] < cluster_sizes[i]
        ]
        chosen = max(candidates, key=lambda i: (shares[i] - quotas[i], -i))
        quotas[chosen] += 1
    return quotas


def select_representatives(
    responsibilities: np.ndarray,
    assignment: np.ndarray,
    final_quotas: Sequence[int],
    object_ids: Sequence[str],
) -> SampleResult:
    """
    Selects each cluster's most probable members.

    Members of cluster k are ranked by their responsibility for k,
    descending, with ties broken by ascending object id; the first
    `final_quotas[k]` are selected with ranks 1..n_k. A quota of 0 is
    allowed for clusters with no members.

    Parameters
    ----------
    responsibilities : np.ndarray
        (N, K) posterior membership probabilities.
    assignment : np.ndarray
        (N,) hard cluster index of every object.
    final_quotas : Sequence[int]
        One quota per mixture component.
    object_ids : Sequence[str]
        The N object ids, in row order.

    Returns
    -------
    SampleResult
        Entries ordered by cluster, then rank.
    """
    responsibilities = np.asarray(responsibilities)
    assignment = np.asarray(assignment)
    n_objects, n_components = responsibilities.shape
    if len(final_quotas) != n_components:
        raise InvalidArguments("need one quota per mixture component")
    if len(object_ids) != n_objects or assignment.shape != (n_objects,):
        raise InvalidArguments("ids and assignment must cover every object")

    entries: list[SampleEntry] = []
    for cluster, quota in enumerate(final_quotas):
        members = np.flatnonzero(assignment == cluster)
        if quota > members.size:
            raise QuotaExceedsCluster(cluster, quota, int(members.size))
        ranked = sorted(
            members,
            key=lambda n: (-responsibilities[n, cluster], str(object_ids[n])),
        )
        entries.extend(
            SampleEntry(
                object_id=str(object_ids[n]),
                cluster=cluster,
                responsibility=float(responsibilities[n, cluster]),
                rank=rank,
            )
            for rank, n in enumerate(ranked[:quota], start=1)
        )
    return SampleResult(entries=tuple(entries))


def count_sample_space(n_objects: int, sample_size: int) -> float:
    """
    log10 of C(N, s), the number of distinct samples of size s.

    Uses the log-gamma function, so it stays finite for any N.

    >>> round(count_sample_space(4, 2), 6)
    0.778151
    """
    for name, value in (("N", n_objects), ("s", sample_size)):
        if isinstance(value, bool) or not isinstance(value, int | np.integer):
            raise InvalidArguments(f"{name} must be an integer, got {value!r}")
    if not 0 <= sample_size <= n_objects:
        raise InvalidArguments(
            f"need 0 <= s <= N, got N={n_objects}, s={sample_size}"
        )
    log_count = (
        gammaln(n_objects + 1)
        - gammaln(sample_size + 1)
        - gammaln(n_objects - sample_size + 1)
    )
    result = float(log_count) / log(10)
    logger.debug("log10 C(%d, %d) = %.12f", n_objects, sample_size, result)
    return result

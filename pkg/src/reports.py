"""Frozen result and report records passed between the pipeline steps
and written out by the command line."""

from __future__ import annotations

from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from typing import Any

import pandas as pd


@dataclass(frozen=True)
class NormalizationReport:
    """Per-measure statistics used to z-score a characterised object set.

    Attributes
    ----------
    measure_names : tuple[str, ...]
        One entry per measure of the input set, in input order.
    means : tuple[float, ...]
        Column means.
    stddevs : tuple[float, ...]
        Population standard deviations (divide by N). Exactly 0 for
        constant measures.
    constant_measures : tuple[str, ...]
        Measures whose values are all equal; they normalize to zeros.
    """

    measure_names: tuple[str, ...]
    means: tuple[float, ...]
    stddevs: tuple[float, ...]
    constant_measures: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class DroppedMeasure:
    """A measure removed as redundant with an earlier kept measure."""

    name: str
    duplicates: str
    correlation: float


@dataclass(frozen=True)
class FilterReport:
    threshold: float
    kept: tuple[str, ...]
    dropped: tuple[DroppedMeasure, ...] = ()

    @property
    def dropped_names(self) -> list[str]:
        return [measure.name for measure in self.dropped]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class FitReport:
    """Convergence bookkeeping of one EM fit.

    `trace` holds the log-likelihood after every iteration, so
    `len(trace) == iterations` and `trace[-1] == log_likelihood`.
    """

    k: int
    seed: int
    iterations: int
    log_likelihood: float
    trace: tuple[float, ...]
    converged: bool

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class BicEntry:
    k: int
    log_likelihood: float
    n_parameters: int
    bic: float


@dataclass(frozen=True)
class Allocation:
    """
    Per-cluster quotas of a sample.

    Quotas are listed for the occupied clusters only, in ascending
    cluster order; `cluster_indices` gives the mixture component each
    position refers to.
    """

    cluster_indices: tuple[int, ...]
    cluster_sizes: tuple[int, ...]
    raw_quotas: tuple[int, ...]
    final_quotas: tuple[int, ...]
    sample_expected_size: int
    total: int

    def __post_init__(self) -> None:
        if sum(self.final_quotas) != self.sample_expected_size:
            raise ValueError("final quotas must sum to the sample size")
        if any(
            not 1 <= quota <= size
            for quota, size in zip(self.final_quotas, self.cluster_sizes)
        ):
            raise ValueError("every final quota must lie in [1, size]")

    def quota_vector(self, n_components: int) -> list[int]:
        """Final quotas indexed by mixture component, 0 for empty ones."""
        quotas = [0] * n_components
        for index, quota in zip(self.cluster_indices, self.final_quotas):
            quotas[index] = quota
        return quotas


@dataclass(frozen=True)
class SampleEntry:
    object_id: str
    cluster: int
    responsibility: float
    rank: int


@dataclass(frozen=True)
class SampleResult:
    """The selected representatives, ordered by cluster then rank."""

    entries: tuple[SampleEntry, ...]
    allocation: Allocation | None = None

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def object_ids(self) -> list[str]:
        return [entry.object_id for entry in self.entries]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [asdict(entry) for entry in self.entries],
            columns=["object_id", "cluster", "responsibility", "rank"],
        )


@dataclass(frozen=True)
class StrategySummary:
    """
    Coverage statistics of one sampling strategy over all runs.

    `miss_rates[i]` is the fraction of runs whose sample contained no
    member of true cluster `i`.
    """

    name: str
    runs: int
    mean_coverage: float
    full_coverage_fraction: float
    miss_rates: tuple[float, ...] = field(default_factory=tuple)


@dataclass(frozen=True)
class ComparisonReport:
    population: dict[str, Any]
    sample_size: int
    runs: int
    seed: int
    strategies: tuple[StrategySummary, ...]
    analytic_miss_probabilities: tuple[float, ...] = ()

    def strategy(self, name: str) -> StrategySummary:
        return next(s for s in self.strategies if s.name == name)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {
                "strategy": summary.name,
                "runs": summary.runs,
                "mean_coverage": summary.mean_coverage,
                "full_coverage": summary.full_coverage_fraction,
                **{
                    f"miss_c{index}": rate
                    for index, rate in enumerate(summary.miss_rates)
                },
            }
            for summary in self.strategies
        ]
        return pd.DataFrame(rows)

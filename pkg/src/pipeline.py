"""pipeline composes the three sampling steps: the characterised object
set is normalized and filtered, clustered with EM, and each cluster
contributes its most probable members to the sample."""

from __future__ import annotations

import logging

from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import Any

import numpy as np

from src.clustering import GaussianMixtureModel
from src.clustering import ModelSelection
from src.clustering import em_fit
from src.clustering import select_k
from src.config import config
from src.errors import InfeasibleSample
from src.errors import InvalidArguments
from src.featuretable import CharacterisedObjectSet
from src.featuretable import filter_measures
from src.featuretable import normalize
from src.log import logger
from src.reports import Allocation
from src.reports import FilterReport
from src.reports import FitReport
from src.reports import NormalizationReport
from src.reports import SampleResult
from src.sampler import allocate
from src.sampler import count_sample_space
from src.sampler import hard_assign
from src.sampler import rebalance
from src.sampler import select_representatives


@dataclass(frozen=True)
class PipelineOptions:
    """
    Everything the pipeline needs besides the data and the sample size.

    `k=None` selects the component count by BIC over [k_min, k_max];
    `filter_threshold=None` disables the redundancy filter.
    """

    normalize: bool = True
    filter_threshold: float | None = None
    k: int | None = None
    k_min: int = config.k_min
    k_max: int = config.k_max
    seed: int = config.seed
    max_iter: int = config.max_iter
    tol: float = config.tol
    restarts: int = config.restarts
    variance_floor: float = config.variance_floor

    def with_seed(self, seed: int) -> PipelineOptions:
        return replace(self, seed=seed)


@dataclass(frozen=True, eq=False)
class ClusteringOutcome:
    """The preprocessed set and the mixture fitted to it."""

    object_set: CharacterisedObjectSet
    model: GaussianMixtureModel
    responsibilities: np.ndarray
    report: FitReport
    normalization: NormalizationReport | None
    filtering: FilterReport | None
    selection: ModelSelection | None

    @property
    def assignment(self) -> np.ndarray:
        return hard_assign(self.responsibilities)

    @property
    def dropped_measures(self) -> list[str]:
        return self.filtering.dropped_names if self.filtering else []


@dataclass(frozen=True, eq=False)
class PipelineResult:
    sample: SampleResult
    clustering: ClusteringOutcome
    options: PipelineOptions

    @property
    def allocation(self) -> Allocation:
        assert self.sample.allocation is not None
        return self.sample.allocation

    def run_report(self) -> dict[str, Any]:
        """The JSON run report, minus the resolved command line."""
        clustering = self.clustering
        return {
            "seed": self.options.seed,
            "fit_seed": clustering.report.seed,
            "k": clustering.model.k,
            "k_effective": len(self.allocation.cluster_indices),
            "quotas_raw": list(self.allocation.raw_quotas),
            "quotas_final": list(self.allocation.final_quotas),
            "cluster_indices": list(self.allocation.cluster_indices),
            "cluster_sizes": list(self.allocation.cluster_sizes),
            "log10_sample_space": count_sample_space(
                self.allocation.total, self.allocation.sample_expected_size
            ),
            "bic_table": (
                clustering.selection.bic_table()
                if clustering.selection
                else None
            ),
            "loglik": clustering.report.log_likelihood,
            "iterations": clustering.report.iterations,
            "converged": clustering.report.converged,
            "dropped_measures": clustering.dropped_measures,
            "constant_measures": (
                list(clustering.normalization.constant_measures)
                if clustering.normalization
                else []
            ),
        }


@dataclass
class SamplePipeline:
    """
    SamplePipeline is the base class for all sampling runs: it
    preprocesses a characterised object set, clusters it, allocates
    per-cluster quotas and selects the representatives.
    """

    options: PipelineOptions = field(default_factory=PipelineOptions)
    verbose: bool = True
    logger = logger

    def __call__(
        self,
        object_set: CharacterisedObjectSet,
        sample_expected_size: int,
    ) -> PipelineResult:
        if not 1 <= sample_expected_size <= object_set.n_objects:
            raise InfeasibleSample(
                sample_expected_size, 1, object_set.n_objects
            )
        self._milestone(
            "Commencing sampling of %d objects out of %d...",
            sample_expected_size,
            object_set.n_objects,
        )
        clustering = self.cluster(object_set)
        allocation = self.allocate(clustering.assignment, sample_expected_size)
        sample = select_representatives(
            clustering.responsibilities,
            clustering.assignment,
            allocation.quota_vector(clustering.model.k),
            object_set.object_ids,
        )
        return PipelineResult(
            sample=replace(sample, allocation=allocation),
            clustering=clustering,
            options=self.options,
        )

    def _milestone(self, message: str, *args: Any) -> None:
        """Logs at info level, or at debug level when not verbose."""
        self.logger.log(
            logging.INFO if self.verbose else logging.DEBUG, message, *args
        )

    def preprocess(
        self, object_set: CharacterisedObjectSet
    ) -> tuple[
        CharacterisedObjectSet, NormalizationReport | None, FilterReport | None
    ]:
        """Applies normalization then the redundancy filter, as configured."""
        normalization = filtering = None
        if self.options.normalize:
            object_set, normalization = normalize(object_set)
        if self.options.filter_threshold is not None:
            object_set, filtering = filter_measures(
                object_set, self.options.filter_threshold
            )
        return object_set, normalization, filtering

    def cluster(self, object_set: CharacterisedObjectSet) -> ClusteringOutcome:
        options = self.options
        prepared, normalization, filtering = self.preprocess(object_set)
        selection = None
        if options.k is None:
            selection = select_k(
                prepared,
                k_min=options.k_min,
                k_max=options.k_max,
                seed=options.seed,
                restarts=options.restarts,
                max_iter=options.max_iter,
                tol=options.tol,
                variance_floor=options.variance_floor,
            )
            model = selection.model
            responsibilities = selection.responsibilities
            report = selection.report
        else:
            model, responsibilities, report = em_fit(
                prepared,
                options.k,
                seed=options.seed,
                max_iter=options.max_iter,
                tol=options.tol,
                variance_floor=options.variance_floor,
            )
        self._milestone(
            "Fitted %d components in %d iterations (log-likelihood %.6f).",
            model.k,
            report.iterations,
            report.log_likelihood,
        )
        return ClusteringOutcome(
            object_set=prepared,
            model=model,
            responsibilities=responsibilities,
            report=report,
            normalization=normalization,
            filtering=filtering,
            selection=selection,
        )

    def allocate(
        self, assignment: np.ndarray, sample_expected_size: int
    ) -> Allocation:
        """
        Quotas over the occupied clusters.

        A component that no object is hard-assigned to takes no part in
        the allocation; it simply contributes nothing.
        """
        counts = np.bincount(assignment)
        occupied = tuple(int(i) for i in np.flatnonzero(counts))
        sizes = tuple(int(counts[i]) for i in occupied)
        if len(occupied) < len(counts):
            self.logger.warning(
                "%d mixture components received no object.",
                len(counts) - len(occupied),
            )
        raw = allocate(sample_expected_size, sizes)
        final = rebalance(raw, sizes, sample_expected_size)
        self._milestone(
            "Cluster sizes %s; raw quotas %s; final quotas %s.",
            list(sizes),
            raw,
            final,
        )
        return Allocation(
            cluster_indices=occupied,
            cluster_sizes=sizes,
            raw_quotas=tuple(raw),
            final_quotas=tuple(final),
            sample_expected_size=sample_expected_size,
            total=int(assignment.size),
        )


def sample_pipeline(
    object_set: CharacterisedObjectSet,
    sample_expected_size: int,
    options: PipelineOptions | None = None,
) -> PipelineResult:
    """
    normalize -> filter_measures -> (em_fit | select_k) -> hard_assign ->
    allocate -> rebalance -> select_representatives.

    Fully deterministic given the inputs and `options.seed`.
    """
    if isinstance(sample_expected_size, bool) or not isinstance(
        sample_expected_size, int
    ):
        raise InvalidArguments("the sample size must be an integer")
    return SamplePipeline(options or PipelineOptions())(
        object_set, sample_expected_size
    )

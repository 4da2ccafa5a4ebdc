"""evaluation compares cluster-representative sampling with uniform random
sampling on synthetic populations whose true cluster labels are known.

The measure of representativeness is cluster coverage: the fraction of
true clusters with at least one member in the sample. Uniform sampling
can miss small clusters entirely, which is exactly the failure the
per-cluster quota floor rules out.
"""

from __future__ import annotations

from fractions import Fraction
from math import comb
from math import fsum
from typing import TYPE_CHECKING
from typing import Annotated

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import model_validator
from tqdm import tqdm

from src.config import UINT64_MAX
from src.errors import InvalidArguments
from src.errors import SizeTooLarge
from src.errors import UnknownId
from src.featuretable import CharacterisedObjectSet
from src.log import logger
from src.pipeline import PipelineOptions
from src.pipeline import SamplePipeline
from src.reports import ComparisonReport
from src.reports import StrategySummary
from src.seeding import derive_seed
from src.seeding import make_rng


if TYPE_CHECKING:
    from collections.abc import Iterable
    from collections.abc import Mapping
    from collections.abc import Sequence

FiniteFloat = Annotated[float, Field(allow_inf_nan=False)]
PositiveFiniteFloat = Annotated[float, Field(gt=0, allow_inf_nan=False)]

METHOD = "cluster_representative"
RANDOM = "uniform_random"


class ClusterSpec(BaseModel):
    """One axis-aligned Gaussian blob of a synthetic population."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    count: int = Field(ge=1)
    mean: list[FiniteFloat]
    stddev: list[PositiveFiniteFloat]


class PopulationSpec(BaseModel):
    """
    A synthetic population: `clusters[i].count` points drawn around
    `clusters[i].mean` with per-dimension `clusters[i].stddev`.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dimension: int = Field(ge=1)
    seed: int = Field(default=0, ge=0, le=UINT64_MAX)
    clusters: list[ClusterSpec] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_dimensions(self) -> PopulationSpec:
        for index, cluster in enumerate(self.clusters):
            for name in ("mean", "stddev"):
                length = len(getattr(cluster, name))
                if length != self.dimension:
                    raise ValueError(
                        f"clusters[{index}].{name} has {length} entries, "
                        f"expected dimension {self.dimension}"
                    )
        return self

    @property
    def counts(self) -> list[int]:
        return [cluster.count for cluster in self.clusters]


def generate_population(
    spec: PopulationSpec,
) -> tuple[CharacterisedObjectSet, np.ndarray]:
    """
    Draws the population described by `spec`.

    Object ids are "c{i}_{j}" for the j-th point of cluster i, and the
    measures are named m0 .. m{D-1}. Deterministic given `spec`.

    Returns
    -------
    tuple[CharacterisedObjectSet, np.ndarray]
        The population and the true cluster label of every object.
    """
    rng = make_rng(spec.seed)
    blocks, ids, labels = [], [], []
    for index, cluster in enumerate(spec.clusters):
        blocks.append(
            rng.normal(
                loc=cluster.mean,
                scale=cluster.stddev,
                size=(cluster.count, spec.dimension),
            )
        )
        ids.extend(f"c{index}_{j}" for j in range(cluster.count))
        labels.extend([index] * cluster.count)
    population = CharacterisedObjectSet(
        object_ids=tuple(ids),
        measure_names=tuple(f"m{d}" for d in range(spec.dimension)),
        values=np.vstack(blocks),
    )
    return population, np.array(labels)


def cluster_coverage(
    selected_ids: Iterable[str], true_labels: Mapping[str, int]
) -> float:
    """
    Fraction of true clusters with at least one selected member.

    >>> cluster_coverage({"a"}, {"a": 0, "b": 1, "c": 2, "d": 3})
    0.25
    """
    clusters = set(true_labels.values())
    hit = set()
    for object_id in selected_ids:
        if object_id not in true_labels:
            raise UnknownId(object_id)
        hit.add(true_labels[object_id])
    return len(hit) / len(clusters) if clusters else 0.0


def uniform_random_sample(
    ids: Sequence[str], size: int, seed: int
) -> frozenset[str]:
    """
    A uniform sample without replacement, by a seeded partial
    Fisher-Yates shuffle of the first `size` positions.
    """
    if isinstance(size, bool) or not isinstance(size, int) or size < 0:
        raise InvalidArguments(f"size must be a non-negative integer, got {size!r}")
    n_objects = len(ids)
    if size > n_objects:
        raise SizeTooLarge(size, n_objects)
    rng = make_rng(seed)
    pool = list(ids)
    for i in range(size):
        j = int(rng.integers(i, n_objects))
        pool[i], pool[j] = pool[j], pool[i]
    return frozenset(pool[:size])


def miss_probability(population: int, members: int, sample_size: int) -> float:
    """
    Probability that a uniform sample of `sample_size` out of
    `population` contains none of `members` designated objects,
    C(N - m, s) / C(N, s), computed on exact integers.

    >>> round(miss_probability(280, 5, 50), 4)
    0.3711
    """
    if not 0 <= members <= population or not 0 <= sample_size <= population:
        raise InvalidArguments(
            "need 0 <= members <= population and 0 <= sample_size <= population"
        )
    return float(
        Fraction(
            comb(population - members, sample_size),
            comb(population, sample_size),
        )
    )


def _summarize(
    name: str, coverages: list[float], misses: list[list[bool]]
) -> StrategySummary:
    runs = len(coverages)
    n_clusters = len(misses[0])
    return StrategySummary(
        name=name,
        runs=runs,
        mean_coverage=fsum(coverages) / runs,
        full_coverage_fraction=sum(c == 1.0 for c in coverages) / runs,
        miss_rates=tuple(
            sum(run[i] for run in misses) / runs for i in range(n_clusters)
        ),
    )


def run_comparison(
    spec: PopulationSpec,
    sample_size: int,
    runs: int,
    options: PipelineOptions | None = None,
) -> ComparisonReport:
    """
    Scores both strategies over `runs` seeded runs on the population of
    `spec`.

    Run r samples the population with the pipeline seeded by
    derive_seed(options.seed, r, 0) and uniformly seeded by
    derive_seed(options.seed, r, 1), then scores both samples' cluster
    coverage against the true labels. Runs are independent, and the
    summaries do not depend on the order they are aggregated in.

    Parameters
    ----------
    spec : PopulationSpec
        The synthetic population.
    sample_size : int
        Objects per sample.
    runs : int
        Number of runs, at least 1.
    options : PipelineOptions | None
        Pipeline options; `options.seed` is the master seed.

    Returns
    -------
    ComparisonReport
        Per-strategy coverage and per-cluster miss rates, along with the
        exact miss probability of uniform sampling for every cluster.
    """
    options = options or PipelineOptions()
    if runs < 1:
        raise InvalidArguments(f"runs must be at least 1, got {runs}")
    population, labels = generate_population(spec)
    if not 1 <= sample_size <= population.n_objects:
        raise SizeTooLarge(sample_size, population.n_objects)
    true_labels = dict(zip(population.object_ids, labels.tolist()))
    n_clusters = len(spec.clusters)

    coverages: dict[str, list[float]] = {METHOD: [], RANDOM: []}
    misses: dict[str, list[list[bool]]] = {METHOD: [], RANDOM: []}
    for run in tqdm(range(runs), desc="[repsample]: ", unit="runs"):
        pipeline = SamplePipeline(
            options.with_seed(derive_seed(options.seed, run, 0)),
            verbose=False,
        )
        samples = {
            METHOD: pipeline(population, sample_size).sample.object_ids,
            RANDOM: uniform_random_sample(
                population.object_ids,
                sample_size,
                derive_seed(options.seed, run, 1),
            ),
        }
        for name, selected in samples.items():
            coverages[name].append(cluster_coverage(selected, true_labels))
            hit = {true_labels[object_id] for object_id in selected}
            misses[name].append([i not in hit for i in range(n_clusters)])

    report = ComparisonReport(
        population=spec.model_dump(),
        sample_size=sample_size,
        runs=runs,
        seed=options.seed,
        strategies=tuple(
            _summarize(name, coverages[name], misses[name])
            for name in (METHOD, RANDOM)
        ),
        analytic_miss_probabilities=tuple(
            miss_probability(population.n_objects, count, sample_size)
            for count in spec.counts
        ),
    )
    for summary in report.strategies:
        logger.info(
            "%s: mean coverage %.4f, full coverage in %.2f%% of runs.",
            summary.name,
            summary.mean_coverage,
            100 * summary.full_coverage_fraction,
        )
    return report


def format_comparison(report: ComparisonReport) -> str:
    """The report as an aligned plain-text table."""
    table = report.to_frame().to_string(
        index=False, float_format="{:.4f}".format
    )
    return table + "\n"

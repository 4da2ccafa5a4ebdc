"""featuretable holds the characterised object set, the table of measure
values that every later step consumes, together with the normalization
and redundancy filtering applied before clustering.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from dataclasses import replace
from typing import TYPE_CHECKING
from typing import Any

import numpy as np
import pandas as pd

from src.config import config
from src.errors import DuplicateId
from src.errors import DuplicateMeasureName
from src.errors import EmptyInput
from src.errors import InvalidThreshold
from src.errors import MalformedTable
from src.errors import NonFiniteCell
from src.log import logger
from src.reports import DroppedMeasure
from src.reports import FilterReport
from src.reports import NormalizationReport


if TYPE_CHECKING:
    from collections.abc import Iterable
    from collections.abc import Sequence


@dataclass(frozen=True, eq=False)
class CharacterisedObjectSet:
    """
    N objects described by D real-valued measures.

    Attributes
    ----------
    object_ids : tuple[str, ...]
        Pairwise distinct object identifiers, in row order.
    measure_names : tuple[str, ...]
        Pairwise distinct, non-empty measure names, in column order.
    values : np.ndarray
        A read-only N×D float array; every cell is finite.
    id_column : str
        Header of the identifier column, kept for serialization.
    """

    object_ids: tuple[str, ...]
    measure_names: tuple[str, ...]
    values: np.ndarray
    id_column: str = "id"

    def __post_init__(self) -> None:
        object_ids = tuple(str(object_id) for object_id in self.object_ids)
        measure_names = tuple(str(name) for name in self.measure_names)
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 2:
            raise MalformedTable("values must form a two-dimensional table")
        if values.shape != (len(object_ids), len(measure_names)):
            raise MalformedTable(
                f"values have shape {values.shape}, expected "
                f"({len(object_ids)}, {len(measure_names)})"
            )
        if not object_ids:
            raise EmptyInput("the object set has no objects")
        if not measure_names:
            raise EmptyInput("the object set has no measures")
        if any(not name for name in measure_names):
            raise MalformedTable("measure names must be non-empty")
        if duplicate := first_duplicate(object_ids):
            raise DuplicateId(duplicate)
        if duplicate := first_duplicate(measure_names):
            raise DuplicateMeasureName(duplicate)
        finite = np.isfinite(values)
        if not finite.all():
            row, column = np.argwhere(~finite)[0]
            raise NonFiniteCell(
                int(row) + 1,
                measure_names[column],
                repr(float(values[row, column])),
            )
        values.setflags(write=False)
        object.__setattr__(self, "object_ids", object_ids)
        object.__setattr__(self, "measure_names", measure_names)
        object.__setattr__(self, "values", values)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, CharacterisedObjectSet):
            return NotImplemented
        return (
            self.object_ids == other.object_ids
            and self.measure_names == other.measure_names
            and self.id_column == other.id_column
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def n_objects(self) -> int:
        return len(self.object_ids)

    @property
    def n_measures(self) -> int:
        return len(self.measure_names)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.measure_names.index(name)]

    def with_values(self, values: np.ndarray) -> CharacterisedObjectSet:
        """Same objects and measures, new cell values."""
        return replace(self, values=values)

    def select_measures(
        self, names: Iterable[str]
    ) -> CharacterisedObjectSet:
        """Keeps only `names`, in the order given."""
        names = tuple(names)
        indices = [self.measure_names.index(name) for name in names]
        return replace(
            self, measure_names=names, values=self.values[:, indices]
        )

    def to_frame(self) -> pd.DataFrame:
        """The set as a dataframe indexed by object id."""
        return pd.DataFrame(
            self.values,
            index=pd.Index(self.object_ids, name=self.id_column),
            columns=list(self.measure_names),
        )

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> CharacterisedObjectSet:
        """Builds a set from a numeric dataframe indexed by object id."""
        return cls(
            object_ids=tuple(str(index) for index in frame.index),
            measure_names=tuple(str(column) for column in frame.columns),
            values=frame.to_numpy(dtype=np.float64),
            id_column=str(frame.index.name or "id"),
        )


def first_duplicate(items: Sequence[str]) -> str | None:
    counts = Counter(items)
    return next((item for item in items if counts[item] > 1), None)


def _constant_columns(values: np.ndarray) -> np.ndarray:
    return np.ptp(values, axis=0) == 0


def normalize(
    object_set: CharacterisedObjectSet,
) -> tuple[CharacterisedObjectSet, NormalizationReport]:
    """
    Z-scores every measure using the population standard deviation.

    Constant measures map to all-zero columns and are listed in the
    report instead of raising.

    Parameters
    ----------
    object_set : CharacterisedObjectSet
        The set to normalize.

    Returns
    -------
    tuple[CharacterisedObjectSet, NormalizationReport]
        The normalized set (same ids and names) and the statistics used.

    Example
    -------
    >>> column [1, 2, 3]  ->  [-1.2247..., 0.0, 1.2247...]
    >>> column [5, 5, 5]  ->  [0.0, 0.0, 0.0], listed as constant
    """
    values = object_set.values
    means = values.mean(axis=0)
    constant = _constant_columns(values)
    # A constant column is reported with its exact value as mean.
    means = np.where(constant, values[0], means)
    stddevs = np.where(constant, 0.0, values.std(axis=0))
    scale = np.where(constant, 1.0, stddevs)
    normalized = np.where(constant, 0.0, (values - means) / scale)

    constant_measures = tuple(
        name
        for name, is_constant in zip(object_set.measure_names, constant)
        if is_constant
    )
    if constant_measures:
        logger.warning(
            "Constant measures normalized to zero: %s",
            ", ".join(constant_measures),
        )
    report = NormalizationReport(
        measure_names=object_set.measure_names,
        means=tuple(float(mean) for mean in means),
        stddevs=tuple(float(stddev) for stddev in stddevs),
        constant_measures=constant_measures,
    )
    return object_set.with_values(normalized), report


def absolute_correlation(
    centered_x: np.ndarray,
    centered_y: np.ndarray,
    slack: float = config.correlation_slack,
) -> float:
    """
    |Pearson r| of two already-centered, non-constant columns.

    Values within `slack` of 1 are reported as exactly 1.0.
    """
    norm = float(np.linalg.norm(centered_x)) * float(
        np.linalg.norm(centered_y)
    )
    if norm == 0.0:
        # Spreads too small to square (subnormal) count as constant.
        return 0.0
    r = abs(float(np.dot(centered_x, centered_y)) / norm)
    return 1.0 if 1.0 - r <= slack else r


def filter_measures(
    object_set: CharacterisedObjectSet,
    threshold: float,
) -> tuple[CharacterisedObjectSet, FilterReport]:
    """
    Drops measures that are redundant with an earlier kept measure.

    Measures are scanned in input order. A measure is dropped iff its
    absolute Pearson correlation with some earlier *kept* measure is at
    least `threshold`; it is recorded against the kept measure it
    correlates with most strongly (earliest on ties). Constant measures
    correlate as 0 with everything, so they are never dropped, and the
    first measure is always kept.

    Parameters
    ----------
    object_set : CharacterisedObjectSet
        The set to filter.
    threshold : float
        Correlation threshold in (0, 1].

    Returns
    -------
    tuple[CharacterisedObjectSet, FilterReport]
        The set restricted to the kept measures, and the report.
    """
    if not 0.0 < threshold <= 1.0:
        raise InvalidThreshold(threshold)

    values = object_set.values
    centered = values - values.mean(axis=0)
    constant = _constant_columns(values)
    names = object_set.measure_names

    kept: list[int] = []
    dropped: list[DroppedMeasure] = []
    for j in range(object_set.n_measures):
        match: tuple[int, float] | None = None
        if not constant[j]:
            for i in kept:
                if constant[i]:
                    continue
                r = absolute_correlation(centered[:, i], centered[:, j])
                if r >= threshold and (match is None or r > match[1]):
                    match = (i, r)
        if match is None:
            kept.append(j)
        else:
            dropped.append(
                DroppedMeasure(names[j], names[match[0]], match[1])
            )
            logger.info(
                "Dropped measure %r: |r| = %.4f with %r",
                names[j],
                match[1],
                names[match[0]],
            )

    report = FilterReport(
        threshold=threshold,
        kept=tuple(names[i] for i in kept),
        dropped=tuple(dropped),
    )
    return object_set.select_measures(report.kept), report

"""errors holds every exception raised by repsample.

Data and feasibility problems derive from `SamplingError`; configuration
problems raise `UsageError`. The command line maps the former to exit
status 1 and the latter to exit status 2.
"""

from __future__ import annotations


class SamplingError(ValueError):
    """Base class of every data, clustering or feasibility error."""


class UsageError(ValueError):
    """An invalid flag or flag combination, detected before any work."""

    def __init__(self, flag: str, message: str) -> None:
        self.flag = flag
        super().__init__(f"{flag}: {message}")


# Feature table


class TableError(SamplingError):
    """The characterised object set could not be read or is invalid."""


class EmptyInput(TableError):
    pass


class MalformedTable(TableError):
    pass


class DuplicateId(TableError):
    def __init__(self, object_id: str) -> None:
        self.object_id = object_id
        super().__init__(f"duplicate object id {object_id!r}")


class DuplicateMeasureName(TableError):
    def __init__(self, name: str) -> None:
        self.name = name
        super().__init__(f"duplicate measure name {name!r}")


class NonNumericCell(TableError):
    """A cell that does not parse as a real; `row` is 1-based, header excluded."""

    def __init__(self, row: int, column: str, value: str) -> None:
        self.row = row
        self.column = column
        self.value = value
        super().__init__(
            f"row {row}, column {column!r}: {value!r} is not a number"
        )


class NonFiniteCell(TableError):
    def __init__(self, row: int, column: str, value: str) -> None:
        self.row = row
        self.column = column
        self.value = value
        super().__init__(
            f"row {row}, column {column!r}: {value!r} is not finite"
        )


class InvalidThreshold(SamplingError):
    def __init__(self, threshold: float) -> None:
        self.threshold = threshold
        super().__init__(
            f"correlation threshold must lie in (0, 1], got {threshold!r}"
        )


# Clustering


class EmptySet(SamplingError):
    pass


class KTooLarge(SamplingError):
    def __init__(self, k: int, n_objects: int) -> None:
        self.k = k
        self.n_objects = n_objects
        super().__init__(
            f"cannot fit {k} components to {n_objects} objects"
        )


class DimensionMismatch(SamplingError):
    def __init__(self, expected: int, got: int) -> None:
        self.expected = expected
        self.got = got
        super().__init__(f"expected {expected} measures, got {got}")


# Sampler


class InfeasibleSample(SamplingError):
    def __init__(self, size: int, n_clusters: int, n_objects: int) -> None:
        self.size = size
        self.n_clusters = n_clusters
        self.n_objects = n_objects
        super().__init__(
            f"sample size {size} must lie between the number of clusters "
            f"({n_clusters}) and the number of objects ({n_objects})"
        )


class QuotaExceedsCluster(SamplingError):
    def __init__(self, cluster: int, quota: int, size: int) -> None:
        self.cluster = cluster
        self.quota = quota
        self.size = size
        super().__init__(
            f"cluster {cluster} has {size} members but a quota of {quota}"
        )


class InvalidArguments(SamplingError):
    pass


# Evaluation


class UnknownId(SamplingError):
    def __init__(self, object_id: str) -> None:
        self.object_id = object_id
        super().__init__(f"unknown object id {object_id!r}")


class SizeTooLarge(SamplingError):
    def __init__(self, size: int, n_objects: int) -> None:
        self.size = size
        self.n_objects = n_objects
        super().__init__(
            f"cannot draw {size} objects from a population of {n_objects}"
        )

"""clustering fits a diagonal-covariance Gaussian mixture to a
characterised object set with EM, and exposes every object's posterior
probability of belonging to every component.
"""

from __future__ import annotations

import json
import re

from dataclasses import dataclass
from math import log
from typing import TYPE_CHECKING
from typing import Any

import numpy as np

from scipy.special import logsumexp

from src.config import SIGNIFICANT_DIGITS
from src.config import config
from src.errors import DimensionMismatch
from src.errors import EmptySet
from src.errors import InvalidArguments
from src.errors import KTooLarge
from src.log import logger
from src.reports import BicEntry
from src.reports import FitReport
from src.seeding import check_seed
from src.seeding import derive_seed
from src.seeding import make_rng


if TYPE_CHECKING:
    from collections.abc import Sequence

    from src.featuretable import CharacterisedObjectSet

LOG_2PI = log(2.0 * np.pi)
# Added to every component's soft count so no weight ever reaches zero.
COUNT_EPSILON = 10.0 * np.finfo(np.float64).eps
EMPTY_COMPONENT_FRACTION = 1e-10
# Reals are dumped as quoted text first, then unquoted.
QUOTED_REAL = re.compile(r'"(-?\d[^"]*)"')

Fit = tuple["GaussianMixtureModel", np.ndarray, FitReport]


@dataclass(frozen=True, eq=False)
class GaussianMixtureModel:
    """
    A K-component mixture of axis-aligned Gaussians.

    Attributes
    ----------
    weights : np.ndarray
        (K,) mixing proportions in (0, 1], summing to 1.
    means : np.ndarray
        (K, D) component means.
    variances : np.ndarray
        (K, D) per-dimension variances, each at least `variance_floor`.
    variance_floor : float
        Lower bound on every variance.
    seed : int
        The seed the model was fitted with.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    variance_floor: float = config.variance_floor
    seed: int = 0

    def __post_init__(self) -> None:
        weights = np.array(self.weights, dtype=np.float64, copy=True)
        means = np.array(self.means, dtype=np.float64, copy=True)
        variances = np.array(self.variances, dtype=np.float64, copy=True)
        if weights.ndim != 1 or weights.size < 1:
            raise InvalidArguments("weights must be a non-empty vector")
        k = weights.size
        if means.ndim != 2 or means.shape[0] != k or means.shape[1] < 1:
            raise InvalidArguments(f"means must have shape ({k}, D)")
        if variances.shape != means.shape:
            raise InvalidArguments("variances must match the means' shape")
        if not self.variance_floor > 0:
            raise InvalidArguments("variance_floor must be positive")
        arrays = (weights, means, variances)
        if not all(np.isfinite(array).all() for array in arrays):
            raise InvalidArguments("model parameters must be finite")
        if (weights <= 0).any() or (weights > 1).any():
            raise InvalidArguments("weights must lie in (0, 1]")
        if abs(weights.sum() - 1.0) > 1e-9:
            raise InvalidArguments("weights must sum to 1")
        if (variances < self.variance_floor).any():
            raise InvalidArguments("variances must not fall below the floor")
        for array in arrays:
            array.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "variance_floor", float(self.variance_floor))
        object.__setattr__(self, "seed", check_seed(self.seed))

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, GaussianMixtureModel):
            return NotImplemented
        return (
            np.array_equal(self.weights, other.weights)
            and np.array_equal(self.means, other.means)
            and np.array_equal(self.variances, other.variances)
            and self.variance_floor == other.variance_floor
            and self.seed == other.seed
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def k(self) -> int:
        return int(self.weights.size)

    @property
    def n_measures(self) -> int:
        return int(self.means.shape[1])

    @property
    def n_parameters(self) -> int:
        """Free parameters: K-1 weights, K·D means and K·D variances."""
        return (self.k - 1) + 2 * self.k * self.n_measures

    def weighted_log_densities(self, values: np.ndarray) -> np.ndarray:
        """(N, K) matrix of ln π_k + ln N(x_n; μ_k, σ²_k)."""
        return _weighted_log_densities(
            values, np.log(self.weights), self.means, self.variances
        )

    def predict_proba(self, values: np.ndarray) -> np.ndarray:
        """Responsibilities of the rows of `values` under this model."""
        values = self._check_values(values)
        responsibilities, _ = _posteriors(self.weighted_log_densities(values))
        return responsibilities

    def _check_values(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(np.asarray(values, dtype=np.float64))
        if values.shape[1] != self.n_measures:
            raise DimensionMismatch(self.n_measures, values.shape[1])
        if not np.isfinite(values).all():
            raise InvalidArguments("values must be finite")
        return values

    def to_dict(self) -> dict[str, Any]:
        return {
            "K": self.k,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "variance_floor": self.variance_floor,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        """The model as JSON, every real at 17 significant digits."""
        data = {
            key: _real_text(value) for key, value in self.to_dict().items()
        }
        return QUOTED_REAL.sub(r"\1", json.dumps(data, indent=2)) + "\n"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> GaussianMixtureModel:
        model = cls(
            weights=np.asarray(data["weights"], dtype=np.float64),
            means=np.asarray(data["means"], dtype=np.float64),
            variances=np.asarray(data["variances"], dtype=np.float64),
            variance_floor=float(data["variance_floor"]),
            seed=int(data["seed"]),
        )
        if int(data.get("K", model.k)) != model.k:
            raise InvalidArguments("K does not match the number of weights")
        return model

    @classmethod
    def from_json(cls, text: str) -> GaussianMixtureModel:
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class ModelSelection:
    """The BIC-selected fit over a range of component counts."""

    best_k: int
    model: GaussianMixtureModel
    responsibilities: np.ndarray
    report: FitReport
    table: tuple[BicEntry, ...]

    def bic_table(self) -> list[dict[str, Any]]:
        return [
            {
                "k": entry.k,
                "log_likelihood": entry.log_likelihood,
                "n_parameters": entry.n_parameters,
                "bic": entry.bic,
            }
            for entry in self.table
        ]


def _real_text(value: Any) -> Any:
    if isinstance(value, float):
        return f"{value:.{SIGNIFICANT_DIGITS}g}"
    if isinstance(value, list):
        return [_real_text(item) for item in value]
    return value


def _weighted_log_densities(
    values: np.ndarray,
    log_weights: np.ndarray,
    means: np.ndarray,
    variances: np.ndarray,
) -> np.ndarray:
    squared = (values[:, None, :] - means[None, :, :]) ** 2
    log_norm = -0.5 * (LOG_2PI + np.log(variances)).sum(axis=1)
    return (
        log_weights
        + log_norm
        - 0.5 * (squared / variances[None, :, :]).sum(axis=2)
    )


def _posteriors(weighted: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-normalized responsibilities and per-object log densities."""
    log_densities = logsumexp(weighted, axis=1)
    responsibilities = np.exp(weighted - log_densities[:, None])
    responsibilities /= responsibilities.sum(axis=1, keepdims=True)
    return responsibilities, log_densities


def log_density(model: GaussianMixtureModel, x: Sequence[float]) -> float:
    """
    ln Σ_k π_k Π_d N(x_d; μ_kd, σ²_kd), stabilized with log-sum-exp.

    Parameters
    ----------
    model : GaussianMixtureModel
        The mixture to evaluate.
    x : Sequence[float]
        A single D-vector.

    Returns
    -------
    float
        The log density of `x` under `model`.

    Example
    -------
    >>> standard normal at 0  ->  -0.5 * ln(2π) ≈ -0.918939
    """
    point = np.asarray(x, dtype=np.float64)
    if point.ndim != 1 or point.size != model.n_measures:
        raise DimensionMismatch(model.n_measures, int(point.size))
    if not np.isfinite(point).all():
        raise InvalidArguments("x must be finite")
    weighted = model.weighted_log_densities(point[None, :])
    return float(logsumexp(weighted[0]))


def kmeans_plusplus(
    values: np.ndarray, k: int, rng: np.random.Generator
) -> np.ndarray:
    """
    Picks `k` data points as initial means, k-means++ style.

    The first point is uniform; each next point is drawn with
    probability proportional to its squared distance to the closest
    point already picked. When every point coincides with a pick the
    draw falls back to uniform.
    """
    n_objects = values.shape[0]
    first = int(rng.integers(n_objects))
    centers = [values[first]]
    closest = ((values - values[first]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            index = int(rng.choice(n_objects, p=closest / total))
        else:
            index = int(rng.integers(n_objects))
        centers.append(values[index])
        closest = np.minimum(
            closest, ((values - values[index]) ** 2).sum(axis=1)
        )
    return np.array(centers)


def _maximize(
    values: np.ndarray,
    responsibilities: np.ndarray,
    variance_floor: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    counts = responsibilities.sum(axis=0)
    soft_counts = counts + COUNT_EPSILON
    weights = soft_counts / soft_counts.sum()
    means = (responsibilities.T @ values) / soft_counts[:, None]
    squared = (values[:, None, :] - means[None, :, :]) ** 2
    variances = (
        np.einsum("nk,nkd->kd", responsibilities, squared)
        / soft_counts[:, None]
    )
    return weights, means, np.maximum(variances, variance_floor), counts


def _canonical_order(means: np.ndarray) -> np.ndarray:
    """Component order sorting means by first coordinate, then the next."""
    keys = tuple(means[:, d] for d in reversed(range(means.shape[1])))
    return np.lexsort(keys)


def _check_fit_arguments(
    n_objects: int, k: int, max_iter: int, tol: float
) -> None:
    if n_objects < 1:
        raise EmptySet("cannot cluster an empty object set")
    if isinstance(k, bool) or not isinstance(k, int | np.integer) or k < 1:
        raise InvalidArguments(f"k must be a positive integer, got {k!r}")
    if k > n_objects:
        raise KTooLarge(int(k), n_objects)
    if max_iter < 1:
        raise InvalidArguments(f"max_iter must be at least 1, got {max_iter}")
    if not tol > 0:
        raise InvalidArguments(f"tol must be positive, got {tol}")


def em_fit(
    object_set: CharacterisedObjectSet,
    k: int,
    seed: int = config.seed,
    max_iter: int = config.max_iter,
    tol: float = config.tol,
    variance_floor: float = config.variance_floor,
) -> tuple[GaussianMixtureModel, np.ndarray, FitReport]:
    """
    Fits a K-component diagonal Gaussian mixture with EM.

    Means start from k-means++ picks drawn with `seed`, weights start
    uniform and every variance starts at the column variance. Each
    iteration runs an M-step on the current responsibilities, then an
    E-step (in log space) on the new parameters, and records the
    log-likelihood. Iteration stops once the log-likelihood improves by
    less than `tol`, or after `max_iter` iterations. Components are
    finally sorted by their means so the output does not depend on
    initialization order.

    Parameters
    ----------
    object_set : CharacterisedObjectSet
        The objects to cluster.
    k : int
        Number of components, 1 <= k <= N.
    seed : int
        64-bit unsigned seed of the initialization.
    max_iter : int
        Maximum number of EM iterations.
    tol : float
        Convergence threshold on the log-likelihood improvement.
    variance_floor : float
        Lower bound on every fitted variance.

    Returns
    -------
    tuple[GaussianMixtureModel, np.ndarray, FitReport]
        The fitted model, the (N, K) responsibilities consistent with
        it, and the convergence report.
    """
    values = object_set.values
    n_objects = values.shape[0]
    _check_fit_arguments(n_objects, k, max_iter, tol)
    seed = check_seed(seed)
    rng = make_rng(seed)

    column_variances = np.maximum(values.var(axis=0), variance_floor)
    means = kmeans_plusplus(values, k, rng)
    variances = np.tile(column_variances, (k, 1))
    weights = np.full(k, 1.0 / k)
    responsibilities, log_densities = _posteriors(
        _weighted_log_densities(values, np.log(weights), means, variances)
    )

    trace: list[float] = []
    converged = False
    for iteration in range(1, max_iter + 1):
        weights, means, variances, counts = _maximize(
            values, responsibilities, variance_floor
        )
        for component in np.flatnonzero(
            counts < EMPTY_COMPONENT_FRACTION * n_objects
        ):
            # Move the dead component onto the worst-explained object.
            means[component] = values[int(np.argmin(log_densities))]
            variances[component] = column_variances
            logger.warning(
                "Reinitialised empty component %d at iteration %d.",
                component,
                iteration,
            )
        responsibilities, log_densities = _posteriors(
            _weighted_log_densities(values, np.log(weights), means, variances)
        )
        log_likelihood = float(log_densities.sum())
        trace.append(log_likelihood)
        if iteration > 1 and log_likelihood - trace[-2] < tol:
            converged = True
            break

    if not converged:
        logger.warning(
            "EM with k=%d did not converge within %d iterations.",
            k,
            max_iter,
        )
    logger.debug(
        "k=%d seed=%d iterations=%d log_likelihood=%.10g",
        k,
        seed,
        len(trace),
        trace[-1],
    )

    order = _canonical_order(means)
    model = GaussianMixtureModel(
        weights=weights[order],
        means=means[order],
        variances=variances[order],
        variance_floor=variance_floor,
        seed=seed,
    )
    responsibilities = responsibilities[:, order]
    responsibilities.setflags(write=False)
    report = FitReport(
        k=int(k),
        seed=seed,
        iterations=len(trace),
        log_likelihood=trace[-1],
        trace=tuple(trace),
        converged=converged,
    )
    return model, responsibilities, report


def bic(log_likelihood: float, n_parameters: int, n_objects: int) -> float:
    """Bayesian information criterion, −2·lnL + p·ln N."""
    return -2.0 * log_likelihood + n_parameters * log(n_objects)


def select_k(
    object_set: CharacterisedObjectSet,
    k_min: int = config.k_min,
    k_max: int = config.k_max,
    seed: int = config.seed,
    restarts: int = config.restarts,
    max_iter: int = config.max_iter,
    tol: float = config.tol,
    variance_floor: float = config.variance_floor,
) -> ModelSelection:
    """
    Chooses the component count minimizing BIC over [k_min, k_max].

    Every k gets `restarts` EM fits, each seeded with a sub-seed derived
    from (seed, k, restart); the fit with the highest log-likelihood
    (earliest restart on ties) represents k. The smaller k wins BIC ties.

    Returns
    -------
    ModelSelection
        The best k, its fit, and the per-k BIC table.
    """
    n_objects = object_set.n_objects
    if not 1 <= k_min <= k_max:
        raise InvalidArguments(
            f"need 1 <= k_min <= k_max, got k_min={k_min}, k_max={k_max}"
        )
    _check_fit_arguments(n_objects, k_max, max_iter, tol)
    if restarts < 1:
        raise InvalidArguments(f"restarts must be at least 1, got {restarts}")
    seed = check_seed(seed)

    table: list[BicEntry] = []
    best: tuple[BicEntry, Fit] | None = None
    for k in range(k_min, k_max + 1):
        fit: Fit | None = None
        for restart in range(restarts):
            candidate = em_fit(
                object_set,
                k,
                seed=derive_seed(seed, k, restart),
                max_iter=max_iter,
                tol=tol,
                variance_floor=variance_floor,
            )
            if fit is None or (
                candidate[2].log_likelihood > fit[2].log_likelihood
            ):
                fit = candidate
        assert fit is not None
        model, responsibilities, report = fit
        entry = BicEntry(
            k=k,
            log_likelihood=report.log_likelihood,
            n_parameters=model.n_parameters,
            bic=bic(report.log_likelihood, model.n_parameters, n_objects),
        )
        table.append(entry)
        logger.debug("k=%d bic=%.6f", k, entry.bic)
        if best is None or entry.bic < best[0].bic:
            best = (entry, fit)

    assert best is not None
    best_entry, (model, responsibilities, report) = best
    logger.debug(
        "BIC selected k=%d over [%d, %d].", best_entry.k, k_min, k_max
    )
    return ModelSelection(
        best_k=best_entry.k,
        model=model,
        responsibilities=responsibilities,
        report=report,
        table=tuple(table),
    )

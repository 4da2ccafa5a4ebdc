from __future__ import annotations

import json

from collections.abc import Sequence

import numpy as np
import pytest

from src.evaluation import PopulationSpec
from src.featuretable import CharacterisedObjectSet


def make_blobs(
    counts: Sequence[int],
    centers: Sequence[Sequence[float]],
    stddev: float = 1.0,
    seed: int = 0,
) -> CharacterisedObjectSet:
    """Spherical Gaussian blobs with ids b{i}_{j}, in blob order."""
    rng = np.random.default_rng(seed)
    blocks = [
        rng.normal(loc=center, scale=stddev, size=(count, len(center)))
        for count, center in zip(counts, centers)
    ]
    ids = tuple(
        f"b{i}_{j}" for i, count in enumerate(counts) for j in range(count)
    )
    return CharacterisedObjectSet(
        object_ids=ids,
        measure_names=tuple(f"m{d}" for d in range(len(centers[0]))),
        values=np.vstack(blocks),
    )


def blob_labels(counts: Sequence[int]) -> dict[str, int]:
    return {
        f"b{i}_{j}": i for i, count in enumerate(counts) for j in range(count)
    }


# Object set fixtures
@pytest.fixture()
def three_blobs() -> CharacterisedObjectSet:
    return make_blobs(
        [50, 50, 50], [[0.0, 0.0], [20.0, 0.0], [10.0, 20.0]], seed=3
    )


@pytest.fixture()
def rare_blobs() -> CharacterisedObjectSet:
    return make_blobs(
        [200, 70, 10], [[0.0, 0.0], [30.0, 0.0], [0.0, 30.0]], seed=11
    )


@pytest.fixture()
def separated_line() -> CharacterisedObjectSet:
    offsets = [-0.8, -0.3, 0.0, 0.4, 0.9]
    values = [[-100.0 + e] for e in offsets] + [[100.0 + e] for e in offsets]
    return CharacterisedObjectSet(
        object_ids=tuple(f"o{n}" for n in range(10)),
        measure_names=("x",),
        values=np.array(values),
    )


@pytest.fixture()
def identical_points() -> CharacterisedObjectSet:
    return CharacterisedObjectSet(
        object_ids=tuple(f"p{n}" for n in range(8)),
        measure_names=("a", "b"),
        values=np.full((8, 2), 3.5),
    )


# CSV fixtures
@pytest.fixture()
def small_csv() -> str:
    return "id,a,b\nx,1,2\ny,3,4\n"


@pytest.fixture()
def blobs_csv(tmp_path, rare_blobs) -> str:
    path = tmp_path / "pop.csv"
    path.write_text(
        rare_blobs.to_frame().to_csv(float_format="%.17g", lineterminator="\n"),
        encoding="utf-8",
    )
    return str(path)


# Population spec fixtures
@pytest.fixture()
def rare_spec_data() -> dict:
    return {
        "dimension": 2,
        "seed": 5,
        "clusters": [
            {"count": 200, "mean": [0.0, 0.0], "stddev": [1.0, 1.0]},
            {"count": 70, "mean": [30.0, 0.0], "stddev": [1.0, 1.0]},
            {"count": 10, "mean": [0.0, 30.0], "stddev": [1.0, 1.0]},
        ],
    }


@pytest.fixture()
def rare_spec(rare_spec_data) -> PopulationSpec:
    return PopulationSpec.model_validate(rare_spec_data)


@pytest.fixture()
def spec_file(tmp_path, rare_spec_data) -> str:
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(rare_spec_data), encoding="utf-8")
    return str(path)

"""serials reads and writes every file repsample touches: the
characterised object set CSV, the sample and assignment CSVs, the JSON
reports and models, and the population spec of the evaluation harness.
"""

from __future__ import annotations

import json

from pathlib import Path
from typing import IO
from typing import TYPE_CHECKING
from typing import Any

import numpy as np
import pandas as pd

from src.config import SIGNIFICANT_DIGITS
from src.config import UTF
from src.config import FilePath
from src.errors import DuplicateId
from src.errors import DuplicateMeasureName
from src.errors import EmptyInput
from src.errors import MalformedTable
from src.errors import NonFiniteCell
from src.errors import NonNumericCell
from src.evaluation import PopulationSpec
from src.featuretable import CharacterisedObjectSet
from src.featuretable import first_duplicate
from src.log import log_debug
from src.log import logger


if TYPE_CHECKING:
    from src.reports import SampleResult

FLOAT_FORMAT = f"%.{SIGNIFICANT_DIGITS}g"
TableSource = FilePath | IO[bytes] | IO[str]


def load_table(source: TableSource) -> CharacterisedObjectSet:
    """
    Reads a characterised object set from UTF-8 CSV.

    The first header cell names the id column, the remaining header
    cells name the measures, and every data row is one object. Row
    order is preserved.
    Ids and names are kept verbatim; only measure cells are stripped.

    :param TableSource source: A path, or a binary/text stream.
    :raises EmptyInput: No header or no data rows.
    :raises DuplicateId, DuplicateMeasureName: Repeated ids or names.
    :raises NonNumericCell: A cell that does not parse as a real.
    :raises NonFiniteCell: A cell that parses as NaN or an infinity.
    :rtype: CharacterisedObjectSet
    """
    try:
        raw: pd.DataFrame = pd.read_csv(
            source,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            encoding=UTF,
        )
    except pd.errors.EmptyDataError:
        raise EmptyInput("the table has no header row")
    except pd.errors.ParserError as err:
        raise MalformedTable(str(err).strip())
    except UnicodeDecodeError:
        raise MalformedTable("the table is not valid UTF-8 text")

    header = [str(cell) for cell in raw.iloc[0]]
    id_column, measure_names = header[0], header[1:]
    if not measure_names:
        raise EmptyInput("the table has no measure columns")
    if any(not name for name in measure_names):
        raise MalformedTable("the header has an empty measure name")
    if duplicate := first_duplicate(measure_names):
        raise DuplicateMeasureName(duplicate)

    body = raw.iloc[1:]
    if body.empty:
        raise EmptyInput("the table has no data rows")

    object_ids = [str(cell) for cell in body.iloc[:, 0]]
    if duplicate := first_duplicate(object_ids):
        raise DuplicateId(duplicate)

    values = np.empty((len(body), len(measure_names)), dtype=np.float64)
    for row, cells in enumerate(body.iloc[:, 1:].itertuples(index=False)):
        for column, cell in enumerate(cells):
            values[row, column] = _parse_cell(
                cell, row + 1, measure_names[column]
            )

    object_set = CharacterisedObjectSet(
        object_ids=tuple(object_ids),
        measure_names=tuple(measure_names),
        values=values,
        id_column=id_column,
    )
    logger.info(
        "Loaded %d objects described by %d measures.",
        object_set.n_objects,
        object_set.n_measures,
    )
    return object_set


def _parse_cell(cell: Any, row: int, column: str) -> float:
    # Short rows come back as NaN floats rather than strings.
    text = cell.strip() if isinstance(cell, str) else ""
    try:
        value = float(text)
    except ValueError:
        raise NonNumericCell(row, column, text)
    if not np.isfinite(value):
        raise NonFiniteCell(row, column, text)
    return value


def serialize_table(object_set: CharacterisedObjectSet) -> str:
    """The CSV text `load_table` reads back into an equal set."""
    return object_set.to_frame().to_csv(
        float_format=FLOAT_FORMAT, lineterminator="\n"
    )


def write_table(object_set: CharacterisedObjectSet, target: FilePath) -> Path:
    return write_text(serialize_table(object_set), target)


def write_sample_csv(result: SampleResult, target: FilePath) -> Path:
    """Writes object_id, cluster, responsibility and rank per representative."""
    text = result.to_frame().to_csv(
        index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return write_text(text, target)


def write_assignments_csv(
    object_ids: tuple[str, ...],
    assignment: np.ndarray,
    responsibilities: np.ndarray,
    target: FilePath,
) -> Path:
    """Writes id, cluster and the responsibility of that cluster per object."""
    frame = pd.DataFrame(
        {
            "id": list(object_ids),
            "cluster": assignment.astype(int),
            "responsibility": responsibilities[
                np.arange(len(assignment)), assignment
            ],
        }
    )
    text = frame.to_csv(
        index=False, float_format=FLOAT_FORMAT, lineterminator="\n"
    )
    return write_text(text, target)


def dumps_json(data: Any) -> str:
    """Deterministic JSON text: fixed key order, two-space indent."""
    return json.dumps(data, indent=2, default=_to_builtin) + "\n"


def write_json(data: Any, target: FilePath) -> Path:
    return write_text(dumps_json(data), target)


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_text(text: str, target: FilePath) -> Path:
    path = Path(target)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding=UTF, newline="") as file:
        file.write(text)
    logger.info("Wrote %s.", path)
    return path


@log_debug
def read_population_spec(source: FilePath) -> PopulationSpec:
    """
    Reads a synthetic population spec from JSON.

    :raises pydantic.ValidationError: A missing or invalid field.
    """
    with open(source, encoding=UTF) as file:
        return PopulationSpec.model_validate_json(file.read())

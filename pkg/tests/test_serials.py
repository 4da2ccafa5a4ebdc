from __future__ import annotations

import io
import json

import numpy as np
import pytest

from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st
from pydantic import ValidationError

from src.errors import DuplicateId
from src.errors import DuplicateMeasureName
from src.errors import EmptyInput
from src.errors import MalformedTable
from src.errors import NonFiniteCell
from src.errors import NonNumericCell
from src.featuretable import CharacterisedObjectSet
from src.reports import SampleEntry
from src.reports import SampleResult
from src.serials import dumps_json
from src.serials import load_table
from src.serials import read_population_spec
from src.serials import serialize_table
from src.serials import write_assignments_csv
from src.serials import write_sample_csv
from src.serials import write_table


def test_load_table(small_csv: str):
    object_set = load_table(io.StringIO(small_csv))
    assert object_set.object_ids == ("x", "y")
    assert object_set.measure_names == ("a", "b")
    assert object_set.values.tolist() == [[1.0, 2.0], [3.0, 4.0]]


def test_load_table_from_path(tmp_path, small_csv: str):
    path = tmp_path / "table.csv"
    path.write_text(small_csv, encoding="utf-8")
    assert load_table(path).n_objects == 2


def test_load_table_keeps_id_column_and_row_order():
    object_set = load_table(io.StringIO("name,v\nz,1\na,2.5e-1\nm,-3\n"))
    assert object_set.id_column == "name"
    assert object_set.object_ids == ("z", "a", "m")
    assert object_set.column("v").tolist() == [1.0, 0.25, -3.0]


@pytest.mark.parametrize(
    ("text", "error"),
    (
        ("", EmptyInput),
        ("id\nx\n", EmptyInput),
        ("id,a\n", EmptyInput),
        ("id,a\nx,1\nx,2\n", DuplicateId),
        ("id,a,a\nx,1,2\n", DuplicateMeasureName),
        ("id,a,b\nx,1,2\ny,1,2,3\n", MalformedTable),
        ("id,a\nx,inf\n", NonFiniteCell),
        ("id,a\nx,nan\n", NonFiniteCell),
        ("id,a,b\nx,1\n", NonNumericCell),
    ),
)
def test_load_table_errors(text: str, error: type[Exception]):
    with pytest.raises(error):
        load_table(io.StringIO(text))


def test_non_numeric_cell_names_row_and_column():
    with pytest.raises(NonNumericCell) as excinfo:
        load_table(io.StringIO("id,a\nx,abc\n"))
    assert excinfo.value.row == 1
    assert excinfo.value.column == "a"
    assert excinfo.value.value == "abc"


def test_serialized_table_loads_back_identical():
    rng = np.random.default_rng(4)
    object_set = CharacterisedObjectSet(
        object_ids=("g1", "g2", "g3"),
        measure_names=("density", "elongation"),
        values=rng.normal(size=(3, 2)) * np.array([1e-7, 1e9]),
    )
    assert load_table(io.StringIO(serialize_table(object_set))) == object_set


CELL_TEXT = st.text(
    alphabet=st.characters(blacklist_categories=("Cc", "Cs")), max_size=8
)


@st.composite
def object_sets(draw: st.DrawFn) -> CharacterisedObjectSet:
    ids = draw(st.lists(CELL_TEXT, min_size=1, max_size=6, unique=True))
    names = draw(
        st.lists(
            CELL_TEXT.filter(bool), min_size=1, max_size=4, unique=True
        )
    )
    cells = st.floats(allow_nan=False, allow_infinity=False)
    values = [
        draw(st.lists(cells, min_size=len(names), max_size=len(names)))
        for _ in ids
    ]
    return CharacterisedObjectSet(tuple(ids), tuple(names), values)


@settings(max_examples=100, deadline=None)
@given(object_set=object_sets())
def test_any_table_loads_back_identical(object_set: CharacterisedObjectSet):
    text = serialize_table(object_set)
    assert load_table(io.StringIO(text)) == object_set


def test_padded_ids_and_names_are_kept_verbatim():
    object_set = CharacterisedObjectSet(
        ("a", " a"), ("m ",), [[1.0], [2.0]]
    )
    loaded = load_table(io.StringIO(serialize_table(object_set)))
    assert loaded.object_ids == ("a", " a")
    assert loaded.measure_names == ("m ",)


def test_load_table_from_byte_stream():
    source = io.BytesIO("id,\u00e9paisseur\nx, 1.5 \n".encode("utf-8"))
    object_set = load_table(source)
    assert object_set.measure_names == ("\u00e9paisseur",)
    assert object_set.values.tolist() == [[1.5]]


def test_load_table_rejects_invalid_utf8():
    with pytest.raises(MalformedTable, match="UTF-8"):
        load_table(io.BytesIO(b"id,a\nx\xff\xfe,1\n"))


def test_write_table_creates_parents(tmp_path):
    object_set = load_table(io.StringIO("id,a\nx,0.1\n"))
    path = write_table(object_set, tmp_path / "nested" / "out.csv")
    assert path.read_text(encoding="utf-8") == "id,a\nx,0.10000000000000001\n"


def test_write_sample_csv(tmp_path):
    sample = SampleResult(
        entries=(
            SampleEntry("a", 0, 0.5, 1),
            SampleEntry("c", 1, 1.0, 1),
        )
    )
    path = write_sample_csv(sample, tmp_path / "sample.csv")
    assert path.read_text(encoding="utf-8").splitlines() == [
        "object_id,cluster,responsibility,rank",
        "a,0,0.5,1",
        "c,1,1,1",
    ]


def test_write_assignments_csv(tmp_path):
    responsibilities = np.array([[0.25, 0.75], [1.0, 0.0]])
    path = write_assignments_csv(
        ("p", "q"), np.array([1, 0]), responsibilities, tmp_path / "a.csv"
    )
    assert path.read_text(encoding="utf-8").splitlines() == [
        "id,cluster,responsibility",
        "p,1,0.75",
        "q,0,1",
    ]


def test_dumps_json_is_stable():
    data = {"b": np.float64(0.1), "a": [np.int64(3)], "c": np.arange(2)}
    text = dumps_json(data)
    assert text.endswith("}\n")
    assert json.loads(text) == {"b": 0.1, "a": [3], "c": [0, 1]}
    assert text == dumps_json(data)


def test_read_population_spec(spec_file: str):
    spec = read_population_spec(spec_file)
    assert spec.dimension == 2
    assert spec.counts == [200, 70, 10]


@pytest.mark.parametrize(
    "payload",
    (
        '{"dimension": 2, "clusters": []}',
        '{"dimension": 1, "clusters": [{"count": 0, "mean": [0], "stddev": [1]}]}',
        '{"dimension": 2, "clusters": [{"count": 3, "mean": [0], "stddev": [1, 1]}]}',
        '{"dimension": 1, "clusters": [{"count": 3, "mean": [0], "stddev": [0]}]}',
        '{"dimension": 1, "clusters": [',
    ),
)
def test_read_population_spec_rejects(tmp_path, payload: str):
    path = tmp_path / "bad.json"
    path.write_text(payload, encoding="utf-8")
    with pytest.raises(ValidationError):
        read_population_spec(path)

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jacobi_resonance import artifacts as io_
from jacobi_resonance.errors import SchemaError


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_lossless(x):
    assert json.loads(io_.dumps([x]))[0] == x


def test_nonfinite_is_null():
    assert json.loads(io_.dumps({"a": math.inf, "b": math.nan})) == {"a": None, "b": None}


def test_sorted_and_versioned(tmp_path):
    path = tmp_path / "x.json"
    doc = io_.write_json(path, {"b": 1, "a": np.float64(0.1), "c": 1 + 2j}, "test")
    text = path.read_text()
    assert text.index('"a"') < text.index('"b"')
    back = json.loads(text)
    assert back["schema_version"] == io_.SCHEMA_VERSION and back["kind"] == "test"
    assert back["c"] == [1.0, 2.0]
    assert doc["a"] == 0.1


def test_csv_17_digits(tmp_path):
    path = tmp_path / "x.csv"
    io_.write_csv(path, ["x"], [[1 / 3]])
    assert float(path.read_text().splitlines()[1]) == 1 / 3


def test_read_rejects(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    with pytest.raises(SchemaError):
        io_.read_json(bad)
    bad.write_text('{"schema_version": "0.1"}')
    with pytest.raises(SchemaError):
        io_.read_json(bad)
    bad.write_text('{"kind": "states"}')
    with pytest.raises(SchemaError):
        io_.read_json(bad, "scattering")
    with pytest.raises(SchemaError):
        io_.read_json(tmp_path / "missing.json")


@pytest.mark.parametrize("doc", [
    {},
    {"background": {"a0": [1.0], "b0": [0.0, 1.0]}},
    {"background": {"a0": [1.0], "b0": [0.0]}},
    {"background": {"a0": [1.0], "b0": []}},
    {"background": {"a0": [1.0, 1.0], "b0": [0.0, 0.0]}, "grid": 4},
    {"background": {"a0": [1.0, 1.0], "b0": [0.0, 0.0]}, "tolerances": {"bogus": 1.0}},
    {"background": {"a0": [1.0, 1.0], "b0": [0.0, 0.0]}, "perturbation": {"u": [0.0], "v": [1.0], "p": 3}},
    {"background": {"a0": [1.0, 1.0], "b0": [0.0, 0.0]}, "side": "up"},
])
def test_config_schema_errors(tmp_path, doc):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        io_.load_config(path)


def test_config_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"background": {"a0": [0.5, 2], "b0": [0, 0]}}))
    cfg = io_.load_config(path)
    assert cfg.grid == 200 and cfg.side == "right" and cfg.perturbation is None
    assert cfg.tolerances == io_.DEFAULT_TOLERANCES

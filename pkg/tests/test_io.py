import json
import math

import numpy as np
import pytest

from orbitspace import io, reduction
from orbitspace.exceptions import DimensionMismatch
from orbitspace.measure import DensityValue


def test_float_format_has_17_digits():
    assert io.format_float(0.1) == "0.10000000000000001"
    assert io.format_float(2.0) == "2.0"
    assert io.format_float(1e300) == "1.0000000000000001e+300"
    assert io.format_float(math.inf) == "null"
    for x in (math.pi, 1 / 3, 2.0 ** -1074, 123456789.123):
        assert float(io.format_float(x)) == x


def test_dumps_is_valid_json():
    obj = {"a": np.arange(3.0), "b": [[1, 2], [3, 4]], "c": True, "d": None, "e": "x",
           "f": np.float64(0.5), "g": np.int64(3), "h": {}, "i": []}
    for indent in (None, 2):
        assert json.loads(io.dumps(obj, indent)) == {
            "a": [0, 1, 2], "b": [[1, 2], [3, 4]], "c": True, "d": None, "e": "x",
            "f": 0.5, "g": 3, "h": {}, "i": []}
    with pytest.raises(TypeError):
        io.dumps(object())


def test_malformed_json():
    with pytest.raises(io.MalformedInput):
        io.loads("{nope")
    with pytest.raises(io.MalformedInput):
        io.gram_from_json({"lower": [1]})
    with pytest.raises(io.MalformedInput):
        io.vectors_from_json({"k": 1, "m": 2, "rows": [["a", "b"]]})


def test_vectors_roundtrip():
    V = np.array([[1.0, 2.0, 2.0], [2.0, 0.0, 0.0]])
    obj = io.loads(io.dumps(io.vectors_to_json(V)))
    assert obj == {"k": 2, "m": 3, "rows": [[1, 2, 2], [2, 0, 0]]}
    np.testing.assert_array_equal(io.vectors_from_json(obj), V)
    with pytest.raises(DimensionMismatch):
        io.vectors_from_json({"k": 2, "m": 2, "rows": [[1, 2, 3], [4, 5, 6]]})


def test_gram_roundtrip():
    G = np.array([[9.0, 2.0], [2.0, 4.0]])
    obj = io.gram_to_json(G)
    assert obj == {"k": 2, "lower": [9.0, 2.0, 4.0]}
    np.testing.assert_array_equal(io.gram_from_json(obj), G)
    with pytest.raises(DimensionMismatch):
        io.gram_from_json({"k": 3, "lower": [1, 2, 3]})


def test_angles_and_schedule_roundtrip():
    theta = np.array([0.3, -1.2])
    np.testing.assert_array_equal(io.angles_from_json(io.angles_to_json(theta)), theta)
    with pytest.raises(DimensionMismatch):
        io.angles_from_json({"m": 4, "theta": [0.1]})
    _, schedule, _ = reduction.reduce([[1.0, 2.0, 2.0], [2.0, 0.0, 0.0]])
    obj = io.loads(io.dumps(io.schedule_to_json(schedule)))
    assert set(obj["theta"]) == {"1,1", "1,2", "2,1"} and obj["reflection"] is False
    back = io.schedule_from_json(obj)
    assert back.theta == schedule.theta and back.k == 2 and back.m == 3
    with pytest.raises(io.MalformedInput):
        io.schedule_from_json({"k": 1, "m": 2, "theta": {"x": 1.0}})


def test_matrix_and_density():
    np.testing.assert_array_equal(io.matrix_from_json({"matrix": [[1, 0], [0, 1]]}), np.eye(2))
    with pytest.raises(DimensionMismatch):
        io.matrix_from_json([[1, 2, 3]])
    obj = io.loads(io.dumps(io.density_to_json(DensityValue(math.inf, math.inf, True))))
    assert obj == {"value": None, "log_value": None, "singular": True}


def test_csv():
    text = io.rows_to_csv([{"a": 0.1, "b": True, "c": None}, {"a": 2, "b": False, "c": "x"}],
                          ("a", "b", "c"))
    assert text == "a,b,c\n0.10000000000000001,true,\n2,false,x\n"

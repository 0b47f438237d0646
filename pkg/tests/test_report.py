"""Tests for scripts/lib/report.py."""

import json
import os
from fractions import Fraction

import numpy as np
import pytest

from lib.report import SCHEMA_VERSION, atomic_write_text, csv_text, dumps, envelope, plain, text_table


class _Reported:
    def to_dict(self):
        return {"value": Fraction(5, 2)}


class TestPlain:
    def test_numpy_values(self):
        assert plain({"a": np.float64(1.5), "b": np.int64(3), "c": np.bool_(True)}) == {"a": 1.5, "b": 3, "c": True}

    def test_arrays_and_tuples(self):
        assert plain((np.array([1.0, 2.0]), 3)) == [[1.0, 2.0], 3]

    def test_fraction(self):
        assert plain(Fraction(4)) == "4/1"

    def test_to_dict_objects(self):
        assert plain([_Reported()]) == [{"value": "5/2"}]


class TestDumps:
    def test_round_trip_digits(self):
        assert dumps({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}'

    def test_non_finite_becomes_null(self):
        assert json.loads(dumps({"x": float("nan"), "y": float("inf")})) == {"x": None, "y": None}

    def test_scalar_lists_inline(self):
        assert dumps([1, 2.5, "a", None, True]) == '[1, 2.5, "a", null, true]'

    def test_nested(self):
        text = dumps({"a": [{"b": 1}], "c": {}, "d": []})
        assert json.loads(text) == {"a": [{"b": 1}], "c": {}, "d": []}

    def test_deterministic(self):
        data = {"z": 1.0 / 3.0, "a": [np.float64(2.0) / 3.0]}
        assert dumps(data) == dumps(data)


class TestEnvelope:
    def test_fields(self):
        env = envelope("check", {"family": "ro"}, [], True, 0)
        assert list(env) == ["schema", "command", "config", "ok", "exitCode", "results"]
        assert env["schema"] == SCHEMA_VERSION


class TestTables:
    def test_csv(self):
        assert csv_text(["x", "y"], [(0.5, 1.0 / 3.0), (1.0, float("nan"))]) == (
            "x,y\n0.5,0.33333333333333331\n1,null\n"
        )

    def test_text_table(self):
        out = text_table(["name", "value", "ok"], [("a", 0.125, True), ("bb", None, False)])
        lines = out.splitlines()
        assert lines[0].split() == ["name", "value", "ok"]
        assert set(lines[1].replace(" ", "")) == {"-"}
        assert lines[2].split() == ["a", "0.125", "yes"]
        assert lines[3].split() == ["bb", "-", "no"]


class TestAtomicWrite:
    def test_writes_file(self, tmp_dir):
        path = os.path.join(tmp_dir, "out.json")
        atomic_write_text(path, "hello\n")
        with open(path) as f:
            assert f.read() == "hello\n"
        assert os.listdir(tmp_dir) == ["out.json"]

    def test_missing_directory(self, tmp_dir):
        with pytest.raises(OSError):
            atomic_write_text(os.path.join(tmp_dir, "missing", "out.json"), "x")

import io
import json
import os
import tempfile
import unittest
import warnings
from unittest import TestCase
from unittest.mock import patch

import numpy as np

from adafe.base import BaseFrontendObj, NpEncoder, worker_count


class Gain(BaseFrontendObj):
    def __init__(self, db, label="") -> None:
        self.db = db
        self.label = label

    def _to_dict(self):
        return {"db": self.db, "label": self.label}

    @classmethod
    def _from_dict(cls, attribute_dict):
        return cls(**attribute_dict)


class NamedGain(Gain):
    pass


class Offset(BaseFrontendObj):
    def __init__(self, db) -> None:
        self.db = db

    def _to_dict(self):
        return {"db": self.db}

    @classmethod
    def _from_dict(cls, attribute_dict):
        return cls(attribute_dict["db"])


class TestWorkerCount(TestCase):
    def test_requested(self):
        with patch.dict(os.environ, {}, clear=True):
            self.assertEqual(worker_count(3), 3)
            self.assertGreaterEqual(worker_count(), 1)

    def test_capped(self):
        with patch.dict(os.environ, {"ADAFE_THREADS": "2"}):
            self.assertEqual(worker_count(8), 2)
            self.assertEqual(worker_count(1), 1)

    def test_at_least_one(self):
        with patch.dict(os.environ, {"ADAFE_THREADS": "0"}):
            self.assertEqual(worker_count(4), 1)

    def test_bad_cap(self):
        with patch.dict(os.environ, {"ADAFE_THREADS": "many"}):
            with self.assertWarns(UserWarning):
                self.assertEqual(worker_count(4), 4)


class TestNpEncoder(TestCase):
    def test_numpy_values(self):
        text = json.dumps(
            {"i": np.int64(3), "f": np.float32(0.5), "a": np.arange(3), "b": np.bool_(True)},
            cls=NpEncoder,
        )
        self.assertEqual(json.loads(text), {"i": 3, "f": 0.5, "a": [0, 1, 2], "b": True})


class TestJSONIO(TestCase):
    def test_round_trip_quiet(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            loaded = Gain.from_json(Gain(-6.0, "a").to_json())
        self.assertEqual((loaded.db, loaded.label), (-6.0, "a"))

    def test_file_and_buffer(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "gain.json")
            Gain(np.float64(-3.0)).to_json(path)
            self.assertEqual(Gain.from_json(path).db, -3.0)
        buf = io.StringIO()
        Gain(1.5).to_json(buf)
        buf.seek(0)
        self.assertEqual(Gain.from_json(buf).db, 1.5)

    def test_dependency_mismatch_warns(self):
        registry = Gain(0.0).to_registry()
        registry["dependency_versions"]["numpy"] = "0.0.1"
        with self.assertWarns(UserWarning):
            Gain.from_registry(registry)

    def test_subclass_resolved(self):
        registry = NamedGain(2.0, "x").to_registry()
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            loaded = Gain.from_registry(registry)
        self.assertIsInstance(loaded, NamedGain)

    def test_other_class_warns(self):
        registry = Offset(2.0).to_registry()
        with self.assertWarns(UserWarning):
            loaded = Gain.from_registry(registry)
        self.assertEqual(loaded.db, 2.0)

    def test_unhandled_attribute_warns(self):
        offset = Offset(1.0)
        offset.extra = 5
        with self.assertWarns(UserWarning):
            registry = offset.to_registry()
        self.assertNotIn("extra", registry["attributes"])
        registry["attributes"]["extra"] = 5
        with self.assertWarns(UserWarning):
            Offset.from_registry(registry)

    def test_repr(self):
        text = repr(Gain(1.0, "a"))
        self.assertIn(".Gain(", text)
        self.assertIn("db=1.0", text)
        self.assertIn("label='a'", text)


if __name__ == "__main__":
    unittest.main()

import io
import unittest
from unittest import TestCase

import numpy as np
import numpy.testing as nptest

from adafe.autodiff import MalformedCheckpoint, ParamStore, ShapeMismatch


class TestParamStore(TestCase):
    def setUp(self):
        self.store = ParamStore(np.float32)
        rng = np.random.default_rng(0)
        self.store.add("afc.fc1.weight", rng.normal(size=(4, 3)))
        self.store.add("afc.fc2.scale", rng.normal(size=3))
        self.store.add("clf.bias", np.array(0.25))

    def test_registration(self):
        self.assertEqual(self.store.names, ["afc.fc1.weight", "afc.fc2.scale", "clf.bias"])
        self.assertEqual(self.store.n_values, 16)
        self.assertTrue(self.store["clf.bias"].requires_grad)
        self.assertEqual(len(self.store.select("afc.")), 2)

    def test_duplicate_name(self):
        with self.assertRaises(ValueError):
            self.store.add("clf.bias", 1.0)

    def test_flat_round_trip(self):
        flat = self.store.flat()
        self.store.set_flat(flat * 2)
        nptest.assert_allclose(self.store.flat(), flat * 2)
        with self.assertRaises(ShapeMismatch):
            self.store.set_flat(np.zeros(3))

    def test_checkpoint_header(self):
        data = self.store.to_bytes()
        self.assertEqual(data[:4], b"ADFP")
        self.assertEqual(np.frombuffer(data[4:12], "<u4").tolist(), [1, 3])

    def test_checkpoint_bit_exact(self):
        buf = io.BytesIO()
        self.store.save(buf)
        buf.seek(0)
        loaded = ParamStore.load(buf)
        self.assertEqual(loaded.names, self.store.names)
        for a, b in zip(loaded, self.store):
            self.assertEqual(a.shape, b.shape)
            self.assertEqual(a.value.tobytes(), b.value.tobytes())
        self.assertEqual(loaded.to_bytes(), self.store.to_bytes())

    def test_bad_magic(self):
        with self.assertRaises(MalformedCheckpoint):
            ParamStore.from_bytes(b"XXXX" + self.store.to_bytes()[4:])

    def test_truncated(self):
        with self.assertRaises(MalformedCheckpoint):
            ParamStore.from_bytes(self.store.to_bytes()[:-3])

    def test_bad_version(self):
        data = bytearray(self.store.to_bytes())
        data[4] = 9
        with self.assertRaises(MalformedCheckpoint):
            ParamStore.from_bytes(bytes(data))

    def test_load_values(self):
        other = self.store.copy(np.float64)
        other.set_flat(np.arange(16.0))
        self.store.load_values(other)
        nptest.assert_array_equal(self.store.flat(), np.arange(16.0))
        self.assertEqual(self.store.flat().dtype, np.float32)


if __name__ == "__main__":
    unittest.main()

import io
import unittest
from unittest import TestCase

import numpy as np
import numpy.testing as nptest
import pandas as pd

from adafe.autodiff import Tensor
from adafe.features import (
    FeatureSequence,
    FrameFeatures,
    MalformedFeatureFile,
    centroid_magnitude,
    feature_bytes,
    features_op,
    frame_features,
    parse_feature_bytes,
    read_feature_file,
    sequence_features,
    spectral_envelope,
    write_feature_csv,
    write_feature_file,
)
from adafe.gabor import SubbandTensor

FS = 16000
N = np.arange(176)


class TestFrameFeatures(TestCase):
    def test_zero_frame(self):
        features = frame_features(np.zeros((39, 176)))
        nptest.assert_allclose(features.energies, np.log(1e-6))
        nptest.assert_array_equal(features.cm, 0)

    def test_gain_shifts_log_energy(self):
        frame = np.random.default_rng(0).normal(size=(4, 176))
        quiet, loud = frame_features(frame), frame_features(10 * frame)
        nptest.assert_allclose(loud.energies - quiet.energies, np.log(100), rtol=0.01)
        nptest.assert_allclose(loud.cm, 10 * quiet.cm, rtol=1e-10)

    def test_layout(self):
        features = frame_features(np.random.default_rng(1).normal(size=(39, 176)))
        self.assertEqual(features.cm.shape, (39, 5))
        self.assertEqual(features.flatten().shape, (39 * 6,))
        nptest.assert_array_equal(features.flatten()[:39], features.energies)
        nptest.assert_array_equal(features.flatten()[39:44], features.cm[0])
        self.assertEqual(features.pooled_cm().shape, (5,))
        self.assertTrue(np.all(features.cm >= 0))

    def test_cm_uses_envelope(self):
        frame = np.random.default_rng(2).normal(size=(2, 176))
        features = frame_features(frame)
        self.assertAlmostEqual(
            features.cm[1, 2], float(centroid_magnitude(spectral_envelope(frame[1]), 3))
        )

    def test_steady_tone_shift(self):
        # 2 kHz repeats every 8 samples; half-period shifts only flip the sign.
        frame = np.sin(2 * np.pi * 2000 * N / FS)[np.newaxis, :]
        base = frame_features(frame)
        for shift in (4, 8):
            shifted = frame_features(np.roll(frame, shift, axis=1))
            nptest.assert_allclose(shifted.energies, base.energies, rtol=1e-9)
            change = np.linalg.norm(shifted.cm - base.cm) / np.linalg.norm(base.cm)
            self.assertLess(change, 0.05)

    def test_rejects_bad_input(self):
        with self.assertRaises(ValueError):
            frame_features(np.zeros(176))
        with self.assertRaises(ValueError):
            frame_features(np.full((2, 176), np.inf))
        with self.assertRaises(ValueError):
            FrameFeatures(np.zeros(3), np.zeros((3, 4)))


class TestFeaturesOp(TestCase):
    def test_matches_frame_features(self):
        frames = np.random.default_rng(3).normal(size=(3, 6, 176))
        energies, cm = features_op(Tensor(frames))
        for t in range(3):
            expected = frame_features(frames[t])
            nptest.assert_allclose(energies.value[t], expected.energies, rtol=1e-10)
            nptest.assert_allclose(cm.value[t], expected.cm, rtol=1e-9, atol=1e-12)

    def test_sequence_features(self):
        data = np.random.default_rng(4).normal(size=(5, 3, 176))
        seq = sequence_features(SubbandTensor(data, [100.0, 200.0, 300.0]))
        self.assertEqual(seq.matrix().shape, (5, 18))
        self.assertEqual(seq.pooled().shape, (18,))
        nptest.assert_allclose(seq[2].flatten(), seq.matrix()[2])


class TestFeatureFile(TestCase):
    def setUp(self):
        rng = np.random.default_rng(5)
        self.seq = FeatureSequence(rng.normal(size=(4, 3)), rng.uniform(size=(4, 3, 5)))

    def test_round_trip(self):
        loaded = parse_feature_bytes(feature_bytes(self.seq))
        nptest.assert_array_equal(loaded.energies, self.seq.energies.astype(np.float32))
        nptest.assert_array_equal(loaded.cm, self.seq.cm.astype(np.float32))

    def test_header(self):
        data = feature_bytes(self.seq)
        self.assertEqual(data[:4], b"ADFT")
        nptest.assert_array_equal(np.frombuffer(data[4:20], dtype="<u4"), [1, 3, 4, 5])
        self.assertEqual(len(data), 20 + 4 * 4 * 18)
        # The first frame's energies come right after the header.
        nptest.assert_array_equal(
            np.frombuffer(data[20:32], dtype="<f4"), self.seq.energies[0].astype(np.float32)
        )

    def test_malformed(self):
        data = feature_bytes(self.seq)
        with self.assertRaises(MalformedFeatureFile):
            parse_feature_bytes(b"ADFX" + data[4:])
        with self.assertRaises(MalformedFeatureFile):
            parse_feature_bytes(data[:-4])
        with self.assertRaises(MalformedFeatureFile):
            parse_feature_bytes(data[:10])
        with self.assertRaises(MalformedFeatureFile):
            parse_feature_bytes(data[:4] + (2).to_bytes(4, "little") + data[8:])

    def test_file_objects(self):
        buf = io.BytesIO()
        write_feature_file(self.seq, buf)
        buf.seek(0)
        self.assertEqual(read_feature_file(buf).n_frames, 4)

    def test_csv(self):
        buf = io.StringIO()
        write_feature_csv(self.seq, buf)
        df = pd.read_csv(io.StringIO(buf.getvalue()))
        self.assertEqual(
            list(df.columns),
            ["frame_index", "channel", "energy", "cm_1", "cm_2", "cm_3", "cm_4", "cm_5"],
        )
        self.assertEqual(len(df), 12)


if __name__ == "__main__":
    unittest.main()

import unittest
from unittest import TestCase

import numpy as np
import numpy.testing as nptest

from adafe.features import (
    InvalidOctave,
    OCTAVES,
    centroid_magnitude,
    envelope_freqs,
    octave_bins,
    spectral_envelope,
)

FS = 16000
N = np.arange(176)


class TestSpectralEnvelope(TestCase):
    def test_zero_frame(self):
        envelope = spectral_envelope(np.zeros(176))
        self.assertEqual(envelope.shape, (257,))
        nptest.assert_array_equal(envelope, 0)

    def test_sine_peak(self):
        envelope = spectral_envelope(np.sin(2 * np.pi * 1000 * N / FS))
        peak = envelope_freqs()[np.argmax(envelope)]
        self.assertLessEqual(abs(peak - 1000), FS / 512)

    def test_non_negative(self):
        frames = np.random.default_rng(0).normal(size=(20, 176))
        self.assertTrue(np.all(spectral_envelope(frames) >= 0))

    def test_three_bin_average(self):
        frame = np.random.default_rng(1).normal(size=176)
        magnitude = np.abs(np.fft.rfft(frame, 512))
        padded = np.concatenate([[0], magnitude, [0]])
        expected = (padded[:-2] + padded[1:-1] + padded[2:]) / 3
        nptest.assert_allclose(spectral_envelope(frame), expected, rtol=1e-10, atol=1e-12)

    def test_short_frame(self):
        with self.assertRaises(ValueError):
            spectral_envelope(np.ones(5))


class TestCentroidMagnitude(TestCase):
    def setUp(self):
        self.freqs = envelope_freqs()

    def test_flat_envelope(self):
        for j in range(1, 6):
            self.assertAlmostEqual(float(centroid_magnitude(np.full(257, 2.5), j)), 2.5)

    def test_zero_envelope(self):
        self.assertEqual(float(centroid_magnitude(np.zeros(257), 3)), 0.0)

    def test_matches_direct_sum(self):
        envelope = np.random.default_rng(2).uniform(0, 3, size=257)
        for j, (lo, hi) in enumerate(OCTAVES, start=1):
            num, den = 0.0, 0.0
            for f, e in zip(self.freqs, envelope):
                if lo <= f < hi:
                    num += f * e
                    den += f
            self.assertAlmostEqual(
                float(centroid_magnitude(envelope, j)), num / den, delta=1e-12
            )

    def test_homogeneous(self):
        envelope = np.random.default_rng(3).uniform(0, 1, size=257)
        for a in (0.0, 0.5, 7.0):
            nptest.assert_allclose(
                centroid_magnitude(a * envelope, 4),
                a * centroid_magnitude(envelope, 4),
                rtol=1e-12,
            )

    def test_invalid_octave(self):
        for j in (0, 6, -1):
            with self.assertRaises(InvalidOctave):
                centroid_magnitude(np.ones(257), j)

    def test_octaves_partition_the_band(self):
        counts = sum(octave_bins(j, self.freqs).astype(int) for j in range(1, 6))
        in_band = (self.freqs >= 250) & (self.freqs < 8000)
        nptest.assert_array_equal(counts, in_band.astype(int))
        self.assertEqual(int(octave_bins(1, self.freqs).sum()), 8)
        self.assertEqual(int(octave_bins(5, self.freqs).sum()), 128)

    def test_empty_octave(self):
        # A 16 point grid has bins every 1 kHz, none of them in 250-500 Hz.
        self.assertEqual(float(centroid_magnitude(np.ones(9), 1)), 0.0)

    def test_batched(self):
        envelopes = np.random.default_rng(4).uniform(size=(3, 4, 257))
        self.assertEqual(centroid_magnitude(envelopes, 2).shape, (3, 4))


if __name__ == "__main__":
    unittest.main()

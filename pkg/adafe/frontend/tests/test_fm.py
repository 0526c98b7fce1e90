import unittest
from unittest import TestCase

import numpy as np
import numpy.testing as nptest

from adafe.frontend import fm_component, fm_taper

FS = 16000
N = np.arange(176)


def tone(freq, amplitude=1.0):
    return amplitude * np.sin(2 * np.pi * freq * N / FS)


def centroid_deviation(frame, fc):
    """ Spectral centroid of the Hann-tapered 512 point spectrum, relative to
    fc and normalized by the Nyquist frequency. """
    spectrum = np.abs(np.fft.rfft(frame * np.hanning(len(frame) + 1)[:-1], 512))
    freqs = np.fft.rfftfreq(512, 1 / FS)
    centroid = np.sum(freqs * spectrum) / np.sum(spectrum)
    return (centroid - fc) / (FS / 2)


class TestFmComponent(TestCase):
    def test_zero_at_center(self):
        fm = fm_component(tone(2000)[np.newaxis], [2000.0])
        self.assertLess(abs(fm[0]), 0.01)

    def test_sign(self):
        frames = np.stack([tone(2500), tone(1500)])
        fm = fm_component(frames, [2000.0, 2000.0])
        self.assertGreater(fm[0], 0)
        self.assertLess(fm[1], 0)

    def test_matches_direct_centroid(self):
        rng = np.random.default_rng(1)
        frames = rng.normal(size=(3, 176))
        centers = [500.0, 3000.0, 6000.0]
        expected = [centroid_deviation(f, fc) for f, fc in zip(frames, centers)]
        nptest.assert_allclose(fm_component(frames, centers), expected, rtol=1e-6)

    def test_silent_channel_is_zero(self):
        fm = fm_component(np.zeros((2, 176)), [1000.0, 2000.0])
        nptest.assert_array_equal(fm, 0)

    def test_short_frame_rejected(self):
        with self.assertRaises(ValueError):
            fm_component(np.ones((1, 4)), [1000.0])

    def test_fft_too_short(self):
        with self.assertRaises(ValueError):
            fm_taper(176, 128, FS)

    def test_taper_is_read_only(self):
        taper, freqs = fm_taper(176, 512, FS)
        self.assertEqual((len(taper), len(freqs)), (176, 257))
        self.assertEqual(freqs[-1], FS / 2)
        with self.assertRaises(ValueError):
            taper[0] = 1.0


if __name__ == "__main__":
    unittest.main()

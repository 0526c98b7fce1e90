import unittest
from unittest import TestCase

import numpy as np

from adafe.audio import Waveform, ensure_16k, UnsupportedRate


def _tone(freq, rate, seconds):
    t = np.arange(int(round(seconds * rate))) / rate
    return Waveform(0.5 * np.sin(2 * np.pi * freq * t), rate)


class TestEnsure16k(TestCase):
    def test_identity_at_16k(self):
        w = _tone(440, 16000, 0.1)
        out = ensure_16k(w)
        self.assertIs(out, w)

    def test_downsample_keeps_peak(self):
        out = ensure_16k(_tone(1000, 32000, 1.0))
        self.assertEqual(out.sample_rate, 16000)
        spectrum = np.abs(np.fft.rfft(out.samples))
        peak_hz = np.argmax(spectrum) * out.sample_rate / len(out.samples)
        self.assertAlmostEqual(peak_hz, 1000, delta=1)

    def test_upsample_length(self):
        out = ensure_16k(_tone(300, 8000, 0.5))
        self.assertLessEqual(abs(len(out) - 8000), 1)

    def test_non_integer_ratio_uses_interpolation(self):
        out = ensure_16k(_tone(1000, 44100, 1.0))
        self.assertEqual(out.sample_rate, 16000)
        self.assertLessEqual(abs(len(out) - 16000), 1)
        spectrum = np.abs(np.fft.rfft(out.samples))
        peak_hz = np.argmax(spectrum) * 16000 / len(out.samples)
        self.assertAlmostEqual(peak_hz, 1000, delta=2)

    def test_output_in_range(self):
        w = Waveform(np.sign(np.sin(np.arange(4800) / 3.0)), 48000)
        out = ensure_16k(w)
        self.assertLessEqual(np.max(np.abs(out.samples)), 1.0)

    def test_unsupported_rate(self):
        with self.assertRaises(UnsupportedRate):
            ensure_16k(Waveform(np.zeros(100), 11025))


if __name__ == "__main__":
    unittest.main()

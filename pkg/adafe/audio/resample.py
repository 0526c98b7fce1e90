# coding=utf-8
"""
Sample rate normalization to 16 kHz.
"""
from fractions import Fraction

import numpy as np
from scipy import signal

from .waveform import Waveform

TARGET_RATE = 16000
ACCEPTED_RATES = (8000, 16000, 22050, 32000, 44100, 48000)


class UnsupportedRate(ValueError):
    """ Raised when a waveform's sample rate cannot be normalized. """


def ensure_16k(waveform: Waveform) -> Waveform:
    """ Return the waveform resampled to 16 kHz.

    A 16 kHz input is returned as the same object. Rates related to 16 kHz
    by an integer factor go through a polyphase windowed-sinc resampler;
    other accepted rates are linearly interpolated.

    Args:
        waveform (Waveform): Input signal at one of ACCEPTED_RATES.

    Returns:
        Waveform: Signal at TARGET_RATE, clipped to [-1, 1].

    Raises:
        UnsupportedRate: If the input rate is not in ACCEPTED_RATES.
    """
    rate = waveform.sample_rate
    if rate == TARGET_RATE:
        return waveform
    if rate not in ACCEPTED_RATES:
        raise UnsupportedRate(
            f"Sample rate must be one of {ACCEPTED_RATES}. Got {rate}."
        )
    ratio = Fraction(TARGET_RATE, rate)
    x = waveform.samples
    if ratio.numerator == 1 or ratio.denominator == 1:
        y = signal.resample_poly(x, ratio.numerator, ratio.denominator)
    else:
        n_out = int(round(len(x) * TARGET_RATE / rate))
        t_out = np.arange(n_out) / TARGET_RATE
        t_in = np.arange(len(x)) / rate
        y = np.interp(t_out, t_in, x)
    return Waveform(np.clip(y, -1, 1), TARGET_RATE, waveform.source_id)

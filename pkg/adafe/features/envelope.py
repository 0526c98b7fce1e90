# coding=utf-8
"""
Spectral envelope and octave centroid magnitudes of subband frames.
"""
from functools import lru_cache
from typing import List, Tuple

import numpy as np
from scipy import fft

ENVELOPE_FFT = 512
SMOOTHING_BINS = 3
OCTAVES: List[Tuple[float, float]] = [
    (250.0, 500.0),
    (500.0, 1000.0),
    (1000.0, 2000.0),
    (2000.0, 4000.0),
    (4000.0, 8000.0),
]


class InvalidOctave(ValueError):
    """ Raised for an octave index outside 1..5. """


def envelope_freqs(n_fft: int = ENVELOPE_FFT, fs: int = 16000) -> np.ndarray:
    """ Frequencies of the envelope bins, 0 to fs/2. [Hz] """
    return fft.rfftfreq(n_fft, 1 / fs)


def spectral_envelope(subband_frame: np.ndarray, n_fft: int = ENVELOPE_FFT) -> np.ndarray:
    """ Smoothed magnitude spectrum of a subband frame.

    The frame is zero-padded to n_fft points without tapering; the magnitude
    is averaged over 3 adjacent bins, treating bins beyond either end as
    zero.

    Args:
        subband_frame (np.ndarray): (..., F) samples, F >= 8.
        n_fft (int): DFT length.

    Returns:
        np.ndarray: (..., n_fft // 2 + 1) envelope over [0, fs/2].
    """
    subband_frame = np.asarray(subband_frame, dtype=np.float64)
    if subband_frame.shape[-1] < 8:
        raise ValueError(f"Frames need at least 8 samples. Got {subband_frame.shape[-1]}.")
    if n_fft < subband_frame.shape[-1]:
        raise ValueError(
            f"n_fft must be at least the frame length {subband_frame.shape[-1]}. Got {n_fft}."
        )
    magnitude = np.abs(fft.rfft(subband_frame, n_fft))
    return magnitude @ smoothing_matrix(magnitude.shape[-1])


def octave_bins(j: int, freqs: np.ndarray) -> np.ndarray:
    """ Boolean mask of the bins in octave j (1-based), [f_lo, f_hi). """
    if not 1 <= j <= len(OCTAVES):
        raise InvalidOctave(f"Octave index must lie in 1..{len(OCTAVES)}. Got {j}.")
    lo, hi = OCTAVES[j - 1]
    return (freqs >= lo) & (freqs < hi)


def centroid_magnitude(envelope: np.ndarray, j: int, fs: int = 16000) -> np.ndarray:
    """ Frequency-weighted mean magnitude of the envelope in one octave,
    CM_j = sum f |E[f]| / sum f over the bins of the octave.

    Args:
        envelope (np.ndarray): (..., K) envelope on the envelope_freqs grid.
        j (int): Octave index, 1 for 250-500 Hz up to 5 for 4-8 kHz.
        fs (int): Sampling rate. [Hz]

    Returns:
        np.ndarray: (...) centroid magnitudes, 0 if the octave holds no bin.

    Raises:
        InvalidOctave: If j is not in 1..5.
    """
    envelope = np.asarray(envelope, dtype=np.float64)
    freqs = envelope_freqs(2 * (envelope.shape[-1] - 1), fs)
    mask = octave_bins(j, freqs)
    if not mask.any():
        return np.zeros(envelope.shape[:-1])
    weights = freqs[mask]
    return envelope[..., mask] @ weights / weights.sum()


@lru_cache(maxsize=8)
def smoothing_matrix(n_bins: int) -> np.ndarray:
    """ K x K matrix S with envelope = magnitude @ S. """
    s = np.zeros((n_bins, n_bins))
    half = SMOOTHING_BINS // 2
    for k in range(n_bins):
        s[max(0, k - half) : k + half + 1, k] = 1 / SMOOTHING_BINS
    s.setflags(write=False)
    return s


@lru_cache(maxsize=8)
def centroid_matrix(n_fft: int = ENVELOPE_FFT, fs: int = 16000) -> np.ndarray:
    """ K x 5 matrix mapping a raw magnitude spectrum straight to the five
    centroid magnitudes of its smoothed envelope. """
    freqs = envelope_freqs(n_fft, fs)
    weights = np.zeros((len(freqs), len(OCTAVES)))
    for j in range(1, len(OCTAVES) + 1):
        mask = octave_bins(j, freqs)
        if mask.any():
            weights[mask, j - 1] = freqs[mask] / freqs[mask].sum()
    out = smoothing_matrix(len(freqs)) @ weights
    out.setflags(write=False)
    return out

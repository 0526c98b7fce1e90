# coding=utf-8
"""
Frame-averaged frequency-modulation estimate by spectral centroid deviation.
"""
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy import signal

from ..autodiff import Tensor, ops

CENTROID_FLOOR = 1e-12
MIN_FFT = 256


@lru_cache(maxsize=16)
def fm_taper(frame_len: int, n_fft: int, fs: int) -> Tuple[np.ndarray, np.ndarray]:
    """ Hann taper of one frame and the DFT bin frequencies.

    Returns:
        Tuple[np.ndarray, np.ndarray]: The frame_len taper and the
            n_fft // 2 + 1 bin frequencies. [Hz]
    """
    if n_fft < max(MIN_FFT, frame_len):
        raise ValueError(
            f"n_fft must be at least max({MIN_FFT}, frame length {frame_len}). "
            f"Got {n_fft}."
        )
    taper = signal.get_window("hann", frame_len)
    freqs = np.arange(n_fft // 2 + 1) * fs / n_fft
    taper.setflags(write=False)
    freqs.setflags(write=False)
    return taper, freqs


def fm_op(c: Tensor, centers: np.ndarray, fs: int, n_fft: int = 512) -> Tensor:
    """ Normalized centroid deviation of every channel of a (..., C, F)
    tensor, on the tape. """
    taper, freqs = fm_taper(c.shape[-1], n_fft, fs)
    magnitude = ops.rfft_magnitude(c, n_fft, taper.astype(c.dtype))
    offset = (freqs[np.newaxis, :] - np.asarray(centers)[:, np.newaxis]).astype(c.dtype)
    deviation = ops.sum(ops.mul(magnitude, offset), axis=-1)
    total = ops.add(ops.sum(magnitude, axis=-1), CENTROID_FLOOR)
    return ops.mul(ops.div(deviation, total), 2.0 / fs)


def fm_component(
    c_frame: np.ndarray, channel_centers, fs: int = 16000, n_fft: int = 512
) -> np.ndarray:
    """ Frequency-modulation value of every channel.

    Each channel is Hann-tapered and zero-padded to n_fft points; the
    magnitude-weighted mean of (f - fc) over [0, fs/2] is divided by fs/2.
    This is the spectral centroid's deviation from the channel center,
    except that an all-zero channel gives exactly 0.

    Args:
        c_frame (np.ndarray): (..., C, F) channel outputs.
        channel_centers (array_like): C center frequencies. [Hz]
        fs (int): Sampling rate. [Hz]
        n_fft (int): DFT length, at least 256 and at least F.

    Returns:
        np.ndarray: (..., C) FM values.
    """
    c_frame = np.asarray(c_frame, dtype=np.float64)
    if c_frame.shape[-1] < 8:
        raise ValueError(f"Frames need at least 8 samples. Got {c_frame.shape[-1]}.")
    return fm_op(Tensor(c_frame), np.asarray(channel_centers), fs, n_fft).value

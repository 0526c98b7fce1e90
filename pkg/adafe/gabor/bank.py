# coding=utf-8
"""
Filterbank layouts, frame-wise filtering and spatial differentiation.
"""
import warnings
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd
from scipy import fft

from ..audio import FrameSequence
from .filters import (
    DEFAULT_FS,
    DEFAULT_TAPS,
    GaborFilterSpec,
    InvalidSpec,
    BandEdgeWarning,
    synth_gabor,
    freq_response,
    response_freqs,
)

LINEAR_HZ = "linear_hz"
PEAK_UNITY = "peak_unity"
NO_NORMALIZATION = "none"


class OrderTooHigh(ValueError):
    """ Raised when spatial differentiation would remove every channel. """


def diff_centers(centers: np.ndarray, k: int) -> np.ndarray:
    """ Channel centers after k rounds of adjacent differencing; every round
    replaces each neighbouring pair by its midpoint.
    """
    centers = np.asarray(centers, dtype=np.float64)
    for _ in range(k):
        centers = (centers[1:] + centers[:-1]) / 2
    return centers


class FilterbankLayout:
    """ Center frequencies of a uniformly spaced filterbank.

    Args:
        n_filters (int): Number of filters N.
        f_lo (float): Center of the lowest filter. [Hz]
        f_hi (float): Center of the highest filter. [Hz]
        fs (int): Sampling rate. [Hz]
        spacing (str): Only 'linear_hz' is supported; spatial differentiation
            assumes uniform spacing.
        normalization (str): 'peak_unity' scales each filter to unit gain at
            its center, 'none' keeps the Q-dependent gain.
    """

    n_filters: int
    f_lo: float
    f_hi: float
    fs: int
    spacing: str
    normalization: str

    def __init__(
        self,
        n_filters: int = 40,
        f_lo: float = 60.0,
        f_hi: float = 7800.0,
        fs: int = DEFAULT_FS,
        spacing: str = LINEAR_HZ,
        normalization: str = PEAK_UNITY,
    ) -> None:
        if n_filters < 1:
            raise ValueError(f"n_filters must be at least 1. Got {n_filters}.")
        if spacing != LINEAR_HZ:
            raise ValueError(f"Unsupported spacing {spacing}. Use '{LINEAR_HZ}'.")
        if normalization not in (PEAK_UNITY, NO_NORMALIZATION):
            raise ValueError(f"Unsupported normalization {normalization}.")
        if f_lo < 50:
            raise ValueError(f"f_lo must be at least 50 Hz. Got {f_lo}.")
        if not f_hi < fs / 2:
            raise ValueError(f"f_hi must be below {fs / 2} Hz. Got {f_hi}.")
        if n_filters > 1 and not f_lo < f_hi:
            raise ValueError(f"f_lo must be below f_hi. Got {f_lo} >= {f_hi}.")
        self.n_filters = n_filters
        self.f_lo = f_lo
        self.f_hi = f_hi
        self.fs = fs
        self.spacing = spacing
        self.normalization = normalization

    def __repr__(self) -> str:
        return (
            f"FilterbankLayout(n_filters={self.n_filters}, f_lo={self.f_lo}, "
            f"f_hi={self.f_hi}, fs={self.fs})"
        )

    @property
    def centers(self) -> np.ndarray:
        """ Filter center frequencies, strictly increasing. [Hz] """
        return np.linspace(self.f_lo, self.f_hi, self.n_filters)

    def diff_centers(self, k: int) -> np.ndarray:
        """ Centers of the N - k channels left after k-th order spatial
        differentiation. """
        return diff_centers(self.centers, k)

    def check_band_edges(self, q_min: float) -> None:
        """ Warn if the widest filter at q_min reaches past fs/2. """
        if self.f_hi + self.f_hi / q_min / 2 > self.fs / 2:
            warnings.warn(
                f"Upper band edge {self.f_hi + self.f_hi / q_min / 2:.0f} Hz at "
                f"Q={q_min} exceeds the Nyquist frequency {self.fs / 2:.0f} Hz.",
                BandEdgeWarning,
            )

    def as_df(self, k: int = 0) -> pd.DataFrame:
        """ Channel index and center frequency, after k differencing rounds. """
        centers = self.diff_centers(k)
        return pd.DataFrame(
            {"channel": np.arange(len(centers)), "center_hz": centers}
        )


def build_bank(
    layout: FilterbankLayout,
    q_vector,
    taps: int = DEFAULT_TAPS,
) -> np.ndarray:
    """ Synthesize one filter per (center, q) pair.

    Args:
        layout (FilterbankLayout): Center frequencies and normalization.
        q_vector (array_like): N Q-factors.
        taps (int): Filter length P.

    Returns:
        np.ndarray: N x P matrix of taps.

    Raises:
        ValueError: If q_vector does not have N entries.
        InvalidSpec: If any filter is out of range; the message names the
            filter index.
    """
    q_vector = np.asarray(q_vector, dtype=np.float64)
    if q_vector.ndim == 0:
        q_vector = np.full(layout.n_filters, float(q_vector))
    if q_vector.shape != (layout.n_filters,):
        raise ValueError(
            f"Expected {layout.n_filters} Q values. Got shape {q_vector.shape}."
        )
    normalize = layout.normalization == PEAK_UNITY
    bank = np.empty((layout.n_filters, taps))
    for i, (fc, q) in enumerate(zip(layout.centers, q_vector)):
        try:
            spec = GaborFilterSpec(fc, q, taps, layout.fs)
        except InvalidSpec as e:
            raise InvalidSpec(f"Filter {i}: {e}") from e
        bank[i] = synth_gabor(spec, normalize)
    return bank


def conv_same(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """ Centered same-length linear convolution along the last axis.

    Equal to np.convolve(x, h, 'full')[o:o + F] with o = (P - 1) // 2 for
    every broadcast pair of rows, zero boundary extension.

    Args:
        x (np.ndarray): Signals, shape (..., F).
        h (np.ndarray): Filters, shape (..., P), broadcast against x.

    Returns:
        np.ndarray: Shape broadcast(x, h)[:-1] + (F,).
    """
    n_in, n_taps = x.shape[-1], h.shape[-1]
    n = fft.next_fast_len(n_in + n_taps - 1, real=True)
    full = fft.irfft(fft.rfft(x, n) * fft.rfft(h, n), n)
    o = (n_taps - 1) // 2
    return full[..., o : o + n_in]


class SubbandTensor:
    """ Filter outputs of a frame sequence.

    Args:
        data (np.ndarray): T x C x F tensor.
        channel_centers (np.ndarray): Center frequency of each of the C
            channels. [Hz]
    """

    data: np.ndarray
    channel_centers: np.ndarray

    def __init__(self, data: np.ndarray, channel_centers) -> None:
        data = np.asarray(data)
        channel_centers = np.asarray(channel_centers, dtype=np.float64)
        if data.ndim != 3 or data.shape[1] != len(channel_centers):
            raise ValueError(
                f"Expected a T x {len(channel_centers)} x F tensor. "
                f"Got shape {data.shape}."
            )
        self.data = data
        self.channel_centers = channel_centers

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return self.data.shape[0]


def filter_frames(
    frames: Union[FrameSequence, np.ndarray],
    bank: np.ndarray,
    channel_centers: Optional[np.ndarray] = None,
) -> SubbandTensor:
    """ Filter every frame with every filter of the bank.

    Args:
        frames (FrameSequence or np.ndarray): T x F frames.
        bank (np.ndarray): N x P filter taps.
        channel_centers (np.ndarray): Centers to attach to the output
            channels, defaults to 0..N-1.

    Returns:
        SubbandTensor: T x N x F same-length convolution outputs.
    """
    data = frames.frames if isinstance(frames, FrameSequence) else np.asarray(frames)
    bank = np.atleast_2d(bank)
    if bank.shape[0] == 0:
        raise ValueError("Cannot filter with an empty bank.")
    out = conv_same(data[:, np.newaxis, :], bank[np.newaxis, :, :])
    if channel_centers is None:
        channel_centers = np.arange(bank.shape[0], dtype=np.float64)
    return SubbandTensor(out, channel_centers)


def spatial_diff(x: SubbandTensor, k: int) -> SubbandTensor:
    """ Apply k rounds of adjacent-channel differencing, x[c + 1] - x[c].

    Args:
        x (SubbandTensor): Input with C channels.
        k (int): Differentiation order.

    Returns:
        SubbandTensor: C - k channels with midpoint centers; x itself when
            k == 0.

    Raises:
        OrderTooHigh: If k >= C.
    """
    if k < 0:
        raise ValueError(f"Differentiation order must be non-negative. Got {k}.")
    if k == 0:
        return x
    if k >= x.n_channels:
        raise OrderTooHigh(
            f"Order {k} leaves no channels out of {x.n_channels}."
        )
    return SubbandTensor(
        np.diff(x.data, n=k, axis=1), diff_centers(x.channel_centers, k)
    )


def response_table(
    filters: Dict[str, np.ndarray], n_points: int = 512, fs: int = DEFAULT_FS
) -> pd.DataFrame:
    """ Frequency responses of labelled filters on a common grid.

    Args:
        filters (Dict[str, np.ndarray]): Label to tap vector.
        n_points (int): Number of frequencies over [0, fs/2].
        fs (int): Sampling rate. [Hz]

    Returns:
        pd.DataFrame: A freq_hz column, then one magnitude column per filter
            (named 'magnitude' when there is a single filter, otherwise
            'magnitude_<label>').
    """
    table = {"freq_hz": response_freqs(n_points, fs)}
    for label, taps in filters.items():
        column = "magnitude" if len(filters) == 1 else f"magnitude_{label}"
        table[column] = freq_response(taps, n_points)
    return pd.DataFrame(table)

# coding=utf-8
"""
Real Gabor band-pass filters parameterized by center frequency and Q-factor.

A filter of length P is a Gaussian-windowed cosine evaluated on the tap index
z = n - (P - 1) / 2, n = 0..P-1:

    w[z] = exp(-(b z)^2) cos(omega_c z),
    omega_c = 2 pi fc / fs,  b = sqrt(2 pi) (fc / q) / (2 fs).

Its gain at fc is approximately sqrt(2) pi q / omega_c, so the unnormalized
gain grows linearly with Q.
"""
import warnings
from typing import Optional

import numpy as np
from scipy import fft

MIN_Q = 0.5
DEFAULT_TAPS = 150
DEFAULT_FS = 16000


class InvalidSpec(ValueError):
    """ Raised when a filter's center frequency, Q or length is out of range. """


class BandEdgeWarning(UserWarning):
    """ Issued when a filter's nominal band extends past the Nyquist frequency. """


def _tap_index(taps: int) -> np.ndarray:
    return np.arange(taps) - (taps - 1) / 2


def gaussian_rate(fc, q, fs: int = DEFAULT_FS):
    """ Envelope rate b = sqrt(2 pi) * (fc / q) / (2 fs). Broadcasts. """
    return np.sqrt(2 * np.pi) * (np.asarray(fc) / np.asarray(q)) / (2 * fs)


def gabor_kernel(fc, q, taps: int = DEFAULT_TAPS, fs: int = DEFAULT_FS) -> np.ndarray:
    """ Unnormalized Gabor taps for every (fc, q) pair.

    Args:
        fc (array_like): Center frequencies. [Hz]
        q (array_like): Q-factors, broadcast against fc.
        taps (int): Filter length P.
        fs (int): Sampling rate. [Hz]

    Returns:
        np.ndarray: Taps with shape broadcast(fc, q).shape + (P,).
    """
    fc = np.asarray(fc, dtype=np.float64)
    q = np.asarray(q)
    z = _tap_index(taps)
    b = gaussian_rate(fc, q, fs)[..., np.newaxis]
    omega = (2 * np.pi * fc / fs)[..., np.newaxis]
    return np.exp(-((b * z) ** 2)) * np.cos(omega * z)


def gabor_kernel_dq(fc, q, taps: int = DEFAULT_TAPS, fs: int = DEFAULT_FS) -> np.ndarray:
    """ Derivative of gabor_kernel with respect to q, same shape. """
    q = np.asarray(q)
    z = _tap_index(taps)
    b = gaussian_rate(fc, q, fs)[..., np.newaxis]
    return gabor_kernel(fc, q, taps, fs) * 2 * (b * z) ** 2 / q[..., np.newaxis]


def filter_gain_at(taps: np.ndarray, freq: float, fs: int = DEFAULT_FS) -> float:
    """ Exact DTFT magnitude of a tap vector at one frequency. """
    taps = np.asarray(taps, dtype=np.float64)
    phase = np.exp(-2j * np.pi * freq / fs * np.arange(taps.shape[-1]))
    return float(np.abs(taps @ phase))


def expected_center_gain(fc: float, q: float, fs: int = DEFAULT_FS) -> float:
    """ Analytic gain at fc of an unnormalized filter,
    sqrt(2) pi q / omega_c * (1 + exp(-8 pi q^2)).
    """
    omega = 2 * np.pi * fc / fs
    return float(np.sqrt(2) * np.pi * q / omega * (1 + np.exp(-8 * np.pi * q ** 2)))


def response_freqs(n_points: int, fs: int = DEFAULT_FS) -> np.ndarray:
    """ The n_points frequencies in [0, fs/2] sampled by freq_response. [Hz] """
    return np.linspace(0, fs / 2, n_points)


def freq_response(taps: np.ndarray, n_points: int = 512) -> np.ndarray:
    """ Magnitude of the DTFT of a tap vector at n_points frequencies evenly
    spaced over [0, fs/2], endpoints included.

    Args:
        taps (np.ndarray): Filter taps.
        n_points (int): Number of frequencies, at least 64.

    Returns:
        np.ndarray: Magnitudes, shape (n_points,).
    """
    if n_points < 64:
        raise ValueError(f"n_points must be at least 64. Got {n_points}.")
    taps = np.asarray(taps, dtype=np.float64)
    n_fft = 2 * (n_points - 1)
    # Sampling the DTFT at n_fft points equals the DFT of the time-aliased taps.
    n_blocks = -(-len(taps) // n_fft)
    folded = np.zeros(n_blocks * n_fft)
    folded[: len(taps)] = taps
    folded = folded.reshape(n_blocks, n_fft).sum(axis=0)
    return np.abs(fft.rfft(folded))


def bandwidth_3db(
    taps: np.ndarray, fs: int = DEFAULT_FS, n_points: int = 8192
) -> float:
    """ Width of the contiguous band around the response peak where the
    magnitude stays above peak / sqrt(2). Band edges are linearly
    interpolated between sweep points. [Hz]
    """
    mag = freq_response(taps, n_points)
    freqs = response_freqs(n_points, fs)
    peak = int(np.argmax(mag))
    level = mag[peak] / np.sqrt(2)

    def edge(step):
        i = peak
        while 0 <= i + step < n_points and mag[i + step] >= level:
            i += step
        if not 0 <= i + step < n_points:
            return freqs[i]
        j = i + step
        frac = (mag[i] - level) / (mag[i] - mag[j])
        return freqs[i] + frac * (freqs[j] - freqs[i])

    return float(edge(1) - edge(-1))


class GaborFilterSpec:
    """ One Gabor band-pass filter.

    Args:
        fc (float): Center frequency. [Hz]
        q (float): Q-factor, fc / bandwidth.
        taps (int): Filter length P.
        fs (int): Sampling rate. [Hz]

    Raises:
        InvalidSpec: If fc is outside (0, fs/2), q < 0.5 or taps < 3.
    """

    fc: float
    q: float
    taps: int
    fs: int

    def __init__(
        self, fc: float, q: float, taps: int = DEFAULT_TAPS, fs: int = DEFAULT_FS
    ) -> None:
        if not 0 < fc < fs / 2:
            raise InvalidSpec(
                f"Center frequency must lie in (0, {fs / 2}). Got {fc}."
            )
        if not q >= MIN_Q:
            raise InvalidSpec(f"Q must be at least {MIN_Q}. Got {q}.")
        if taps < 3:
            raise InvalidSpec(f"Filter length must be at least 3. Got {taps}.")
        self.fc = float(fc)
        self.q = float(q)
        self.taps = int(taps)
        self.fs = int(fs)
        self._unnormalized_gain: Optional[float] = None
        if self.bandwidth >= fs / 2:
            warnings.warn(
                f"Bandwidth {self.bandwidth:.1f} Hz of filter at {fc} Hz "
                f"reaches past the Nyquist frequency.",
                BandEdgeWarning,
            )

    def __repr__(self) -> str:
        return (
            f"GaborFilterSpec(fc={self.fc}, q={self.q}, taps={self.taps}, "
            f"fs={self.fs})"
        )

    @property
    def bandwidth(self) -> float:
        """ Nominal bandwidth fc / q. [Hz] """
        return self.fc / self.q

    @property
    def omega_c(self) -> float:
        """ Normalized center frequency 2 pi fc / fs. [rad/sample] """
        return 2 * np.pi * self.fc / self.fs

    @property
    def b(self) -> float:
        return float(gaussian_rate(self.fc, self.q, self.fs))

    @property
    def unnormalized_gain(self) -> float:
        """ DTFT magnitude at fc before peak normalization. """
        if self._unnormalized_gain is None:
            self._unnormalized_gain = filter_gain_at(
                gabor_kernel(self.fc, self.q, self.taps, self.fs), self.fc, self.fs
            )
        return self._unnormalized_gain


def synth_gabor(spec: GaborFilterSpec, normalize: bool = True) -> np.ndarray:
    """ Synthesize the taps of a Gabor filter.

    Args:
        spec (GaborFilterSpec): Filter parameters.
        normalize (bool): If True, scale the taps so the DTFT magnitude at fc
            is exactly 1. The scale removed is spec.unnormalized_gain.

    Returns:
        np.ndarray: Tap vector of length spec.taps.
    """
    taps = gabor_kernel(spec.fc, spec.q, spec.taps, spec.fs)
    if normalize:
        taps = taps / spec.unnormalized_gain
    return taps

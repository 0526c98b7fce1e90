# coding=utf-8
"""
Containers for decoded audio and its frame-wise segmentation.
"""
from typing import Optional

import numpy as np


class EmptyAudio(ValueError):
    """ Raised when an audio signal has no samples to process. """


class Waveform:
    """ A mono audio signal.

    Args:
        samples (np.ndarray): Real amplitudes in [-1, 1].
        sample_rate (int): Sampling rate. [Hz]
        source_id (str): Opaque label of where the samples came from.

    Raises:
        ValueError: If sample_rate is not a positive integer, samples is
            not one-dimensional or a sample lies outside [-1, 1].
    """

    samples: np.ndarray
    sample_rate: int
    source_id: str

    def __init__(self, samples, sample_rate: int, source_id: str = "") -> None:
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ValueError(
                f"Waveform samples must be one-dimensional. Got shape {samples.shape}."
            )
        if int(sample_rate) != sample_rate or sample_rate <= 0:
            raise ValueError(
                f"sample_rate must be a positive integer. Got {sample_rate}."
            )
        if samples.size and np.max(np.abs(samples)) > 1:
            raise ValueError(
                f"Waveform samples must lie in [-1, 1]. "
                f"Got peak {np.max(np.abs(samples))}."
            )
        self.samples = samples
        self.sample_rate = int(sample_rate)
        self.source_id = source_id

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        """ Length of the signal in seconds. """
        return len(self.samples) / self.sample_rate

    def crop(self, start: int, length: int) -> "Waveform":
        """ Return the samples [start, start + length), zero-padded if the
        waveform ends early.
        """
        out = np.zeros(length)
        piece = self.samples[start : start + length]
        out[: len(piece)] = piece
        return Waveform(out, self.sample_rate, self.source_id)

    def scaled(self, gain_db: float) -> "Waveform":
        """ Return a copy with every sample multiplied by 10^(gain_db/20).

        Raises:
            ValueError: If the scaled samples leave [-1, 1].
        """
        return Waveform(
            self.samples * 10 ** (gain_db / 20), self.sample_rate, self.source_id
        )


class FrameSequence:
    """ Non-overlapping rectangular frames of a waveform.

    Args:
        frames (np.ndarray): T x F matrix, one frame per row.
        frame_len_ms (float): Nominal frame length. [ms]
        sample_rate (int): Sampling rate of the framed signal. [Hz]
        n_samples (int): Number of samples in the original waveform, used to
            trim the zero padding of the last frame.
    """

    frames: np.ndarray
    frame_len_ms: float
    sample_rate: int
    n_samples: int

    def __init__(
        self,
        frames: np.ndarray,
        frame_len_ms: float,
        sample_rate: int,
        n_samples: Optional[int] = None,
    ) -> None:
        self.frames = np.asarray(frames, dtype=np.float64)
        if self.frames.ndim != 2:
            raise ValueError(
                f"frames must be a T x F matrix. Got shape {self.frames.shape}."
            )
        self.frame_len_ms = frame_len_ms
        self.sample_rate = sample_rate
        if n_samples is None:
            n_samples = self.frames.size
        self.n_samples = n_samples

    def __len__(self) -> int:
        return self.frames.shape[0]

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def frame_size(self) -> int:
        return self.frames.shape[1]

    @property
    def padding(self) -> int:
        """ Number of zeros appended to the last frame. """
        return self.frames.size - self.n_samples

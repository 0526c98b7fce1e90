# coding=utf-8
"""
Segmentation of a 16 kHz waveform into non-overlapping frames.
"""
import numpy as np

from .waveform import Waveform, FrameSequence, EmptyAudio
from .resample import TARGET_RATE, UnsupportedRate

DEFAULT_FRAME_MS = 11.0


def frame_length_samples(frame_len_ms: float, sample_rate: int = TARGET_RATE) -> int:
    """ Number of samples per frame, F = round(frame_len_ms * rate / 1000). """
    if frame_len_ms <= 0:
        raise ValueError(f"frame_len_ms must be positive. Got {frame_len_ms}.")
    return int(round(frame_len_ms * sample_rate / 1000))


def frame_signal(
    waveform: Waveform, frame_len_ms: float = DEFAULT_FRAME_MS
) -> FrameSequence:
    """ Split a waveform into rectangular frames, zero-padding the last one.

    Args:
        waveform (Waveform): Signal at 16 kHz.
        frame_len_ms (float): Frame length. [ms]

    Returns:
        FrameSequence: ceil(n / F) frames of F samples each.

    Raises:
        UnsupportedRate: If the waveform is not at 16 kHz.
        EmptyAudio: If the waveform has no samples.
    """
    if waveform.sample_rate != TARGET_RATE:
        raise UnsupportedRate(
            f"Waveform must be at {TARGET_RATE} Hz before framing. "
            f"Got {waveform.sample_rate}."
        )
    n = len(waveform)
    if n == 0:
        raise EmptyAudio("Cannot frame an empty waveform.")
    size = frame_length_samples(frame_len_ms, waveform.sample_rate)
    n_frames = -(-n // size)
    padded = np.zeros(n_frames * size)
    padded[:n] = waveform.samples
    return FrameSequence(
        padded.reshape(n_frames, size), frame_len_ms, waveform.sample_rate, n
    )


def concatenate_frames(frames: FrameSequence) -> Waveform:
    """ Rebuild the waveform from its frames, dropping the padding. """
    samples = frames.frames.reshape(-1)[: frames.n_samples]
    return Waveform(samples, frames.sample_rate)

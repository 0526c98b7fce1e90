# coding=utf-8
"""
Per-frame feature vectors: log subband energies and octave centroid
magnitudes.
"""
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from ..autodiff import Tensor, ops
from ..gabor import SubbandTensor
from .envelope import (
    ENVELOPE_FFT,
    OCTAVES,
    centroid_magnitude,
    centroid_matrix,
    spectral_envelope,
)

LOG_FLOOR = 1e-6
N_FEATURES_PER_CHANNEL = 1 + len(OCTAVES)


class FrameFeatures:
    """ Features of one frame.

    Args:
        energies (np.ndarray): C log subband energies.
        cm (np.ndarray): C x 5 centroid magnitudes, one column per octave.
        octaves (List[Tuple[float, float]]): Octave bounds. [Hz]
    """

    energies: np.ndarray
    cm: np.ndarray
    octaves: List[Tuple[float, float]]

    def __init__(self, energies: np.ndarray, cm: np.ndarray, octaves=None) -> None:
        energies = np.asarray(energies, dtype=np.float64)
        cm = np.asarray(cm, dtype=np.float64)
        octaves = list(OCTAVES) if octaves is None else list(octaves)
        if cm.shape != (len(energies), len(octaves)):
            raise ValueError(
                f"Expected {len(energies)} x {len(octaves)} centroid magnitudes. "
                f"Got shape {cm.shape}."
            )
        self.energies = energies
        self.cm = cm
        self.octaves = octaves

    def __repr__(self) -> str:
        return f"FrameFeatures(n_channels={self.n_channels})"

    @property
    def n_channels(self) -> int:
        return len(self.energies)

    def flatten(self) -> np.ndarray:
        """ Energies followed by the row-major centroid magnitudes, C * 6
        values. """
        return np.concatenate([self.energies, self.cm.ravel()])

    def pooled_cm(self) -> np.ndarray:
        """ Centroid magnitudes averaged over channels, one per octave. """
        return self.cm.mean(axis=0)


def frame_features(c_frame: np.ndarray) -> FrameFeatures:
    """ Features of one frame of adaptive-layer output.

    Args:
        c_frame (np.ndarray): C x F subband samples.

    Returns:
        FrameFeatures: energies[c] = log(mean(c_frame[c] ** 2) + 1e-6) and
            cm[c, j - 1] = centroid_magnitude(spectral_envelope(c_frame[c]), j).
    """
    c_frame = np.asarray(c_frame, dtype=np.float64)
    if c_frame.ndim != 2:
        raise ValueError(f"Expected a C x F frame. Got shape {c_frame.shape}.")
    if not np.all(np.isfinite(c_frame)):
        raise ValueError("Subband frame must be finite.")
    energies = np.log(np.mean(c_frame ** 2, axis=-1) + LOG_FLOOR)
    envelope = spectral_envelope(c_frame)
    cm = np.stack(
        [centroid_magnitude(envelope, j) for j in range(1, len(OCTAVES) + 1)], axis=-1
    )
    return FrameFeatures(energies, cm)


def features_op(c: Tensor, n_fft: int = ENVELOPE_FFT, fs: int = 16000) -> Tuple[Tensor, Tensor]:
    """ frame_features for a (..., C, F) tensor, on the tape.

    Returns:
        Tuple[Tensor, Tensor]: (..., C) log energies and (..., C, 5)
            centroid magnitudes.
    """
    energies = ops.log(ops.add(ops.mean(ops.square(c), axis=-1), LOG_FLOOR))
    magnitude = ops.rfft_magnitude(c, n_fft)
    cm = ops.matmul(magnitude, centroid_matrix(n_fft, fs).astype(c.dtype))
    return energies, cm


def flatten_op(energies: Tensor, cm: Tensor) -> Tensor:
    """ (..., C) energies and (..., C, 5) centroid magnitudes as one
    (..., C * 6) feature vector, laid out like FrameFeatures.flatten. """
    flat_cm = ops.reshape(cm, cm.shape[:-2] + (cm.shape[-2] * cm.shape[-1],))
    return ops.concat([energies, flat_cm], axis=-1)


class FeatureSequence:
    """ Features of every frame of an utterance.

    Args:
        energies (np.ndarray): T x C log energies.
        cm (np.ndarray): T x C x 5 centroid magnitudes.
        channel_centers (np.ndarray): Center of each channel. [Hz]
    """

    energies: np.ndarray
    cm: np.ndarray
    channel_centers: Optional[np.ndarray]

    def __init__(self, energies: np.ndarray, cm: np.ndarray, channel_centers=None) -> None:
        energies = np.asarray(energies)
        cm = np.asarray(cm)
        if energies.ndim != 2 or cm.shape != energies.shape + (len(OCTAVES),):
            raise ValueError(
                f"Expected T x C energies and T x C x {len(OCTAVES)} centroid "
                f"magnitudes. Got {energies.shape} and {cm.shape}."
            )
        self.energies = energies
        self.cm = cm
        self.channel_centers = (
            None if channel_centers is None else np.asarray(channel_centers, dtype=np.float64)
        )

    def __repr__(self) -> str:
        return f"FeatureSequence(n_frames={self.n_frames}, n_channels={self.n_channels})"

    def __len__(self) -> int:
        return self.energies.shape[0]

    def __getitem__(self, t: int) -> FrameFeatures:
        return FrameFeatures(self.energies[t], self.cm[t])

    @property
    def n_frames(self) -> int:
        return self.energies.shape[0]

    @property
    def n_channels(self) -> int:
        return self.energies.shape[1]

    def matrix(self) -> np.ndarray:
        """ T x (C * 6) matrix of flattened frame features. """
        return np.concatenate(
            [self.energies, self.cm.reshape(self.n_frames, -1)], axis=1
        )

    def pooled(self) -> np.ndarray:
        """ Mean over frames of the flattened features, the classifier
        input. """
        return self.matrix().mean(axis=0)

    def as_df(self) -> pd.DataFrame:
        """ One row per (frame, channel) with columns frame_index, channel,
        energy, cm_1 .. cm_5. """
        n_frames, n_channels = self.energies.shape
        table = {
            "frame_index": np.repeat(np.arange(n_frames), n_channels),
            "channel": np.tile(np.arange(n_channels), n_frames),
            "energy": self.energies.ravel(),
        }
        for j in range(len(OCTAVES)):
            table[f"cm_{j + 1}"] = self.cm[..., j].ravel()
        return pd.DataFrame(table)


def sequence_features(subbands: SubbandTensor) -> FeatureSequence:
    """ Features of every frame of a T x C x F adaptive-layer output. """
    data = np.asarray(subbands.data, dtype=np.float64)
    energies, cm = features_op(Tensor(data))
    return FeatureSequence(energies.value, cm.value, subbands.channel_centers)

# coding=utf-8
"""
Feature file format.

A feature file is a 20 byte little-endian header (magic 'ADFT', uint32
version, uint32 channel count C, uint32 frame count T, uint32 octave count)
followed by T frames, each C log energies then C x 5 row-major centroid
magnitudes, as little-endian float32.
"""
import struct
from typing import BinaryIO, TextIO, Union

import numpy as np

from .envelope import OCTAVES
from .features import FeatureSequence

FEATURE_MAGIC = b"ADFT"
FEATURE_VERSION = 1
FEATURE_HEADER = struct.Struct("<4sIIII")
CSV_FLOAT_FORMAT = "%.10g"


class MalformedFeatureFile(ValueError):
    """ Raised when a feature file cannot be parsed. """


def feature_bytes(features: FeatureSequence) -> bytes:
    """ Serialize a feature sequence in the feature file format. """
    header = FEATURE_HEADER.pack(
        FEATURE_MAGIC,
        FEATURE_VERSION,
        features.n_channels,
        features.n_frames,
        len(OCTAVES),
    )
    return header + features.matrix().astype("<f4").tobytes()


def parse_feature_bytes(data: bytes) -> FeatureSequence:
    """ Inverse of feature_bytes; values come back as float32.

    Raises:
        MalformedFeatureFile: On a bad magic, version or octave count, or a
            payload whose size does not match the header.
    """
    if len(data) < FEATURE_HEADER.size:
        raise MalformedFeatureFile("Feature file is shorter than its header.")
    magic, version, n_channels, n_frames, n_octaves = FEATURE_HEADER.unpack_from(data)
    if magic != FEATURE_MAGIC:
        raise MalformedFeatureFile(f"Bad feature file magic {magic!r}.")
    if version != FEATURE_VERSION:
        raise MalformedFeatureFile(f"Unsupported feature file version {version}.")
    if n_octaves != len(OCTAVES):
        raise MalformedFeatureFile(f"Expected {len(OCTAVES)} octaves. Got {n_octaves}.")
    width = n_channels * (1 + n_octaves)
    payload = data[FEATURE_HEADER.size :]
    if len(payload) != 4 * n_frames * width:
        raise MalformedFeatureFile(
            f"Header declares {n_frames} x {width} values but the payload "
            f"holds {len(payload) // 4}."
        )
    matrix = np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(n_frames, width)
    energies = matrix[:, :n_channels]
    cm = matrix[:, n_channels:].reshape(n_frames, n_channels, n_octaves)
    return FeatureSequence(energies, cm)


def write_feature_file(features: FeatureSequence, path_or_buf: Union[str, BinaryIO]) -> None:
    if isinstance(path_or_buf, str):
        with open(path_or_buf, "wb") as f:
            f.write(feature_bytes(features))
    else:
        path_or_buf.write(feature_bytes(features))


def read_feature_file(path_or_buf: Union[str, BinaryIO]) -> FeatureSequence:
    if isinstance(path_or_buf, str):
        with open(path_or_buf, "rb") as f:
            return parse_feature_bytes(f.read())
    return parse_feature_bytes(path_or_buf.read())


def write_feature_csv(features: FeatureSequence, path_or_buf: Union[str, TextIO]) -> None:
    """ Long-format CSV of FeatureSequence.as_df, for inspection. """
    features.as_df().to_csv(path_or_buf, index=False, float_format=CSV_FLOAT_FORMAT)

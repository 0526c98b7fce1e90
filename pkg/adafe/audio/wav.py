# coding=utf-8
"""
Decoding and encoding of RIFF/WAVE audio and of the raw ADFE sample format.
"""
import io
import struct
import warnings
from typing import Union, BinaryIO

import numpy as np
import soundfile as sf

from .waveform import Waveform, EmptyAudio

SUPPORTED_SUBTYPES = ("PCM_16", "FLOAT")
RAW_MAGIC = b"ADFE"
RAW_HEADER = struct.Struct("<4sIQ")
_PCM16_SCALE = 32768


class MalformedHeader(ValueError):
    """ Raised when an audio container header cannot be parsed. """


class UnsupportedEncoding(ValueError):
    """ Raised when an audio container holds data other than mono 16-bit
    PCM or 32-bit float.
    """


def decode_wav(data: bytes, source_id: str = "") -> Waveform:
    """ Decode an in-memory RIFF/WAVE file.

    Args:
        data (bytes): Full contents of the WAV file.
        source_id (str): Label attached to the returned Waveform.

    Returns:
        Waveform: Samples scaled to [-1, 1] at the file's native rate.

    Raises:
        MalformedHeader: If the RIFF/WAVE header is missing or unreadable.
        UnsupportedEncoding: If the file is not mono PCM16 or float32.
        EmptyAudio: If the data chunk holds no samples.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedHeader(f"Missing RIFF/WAVE header in {source_id!r}.")
    try:
        with sf.SoundFile(io.BytesIO(data)) as f:
            if f.channels != 1:
                raise UnsupportedEncoding(
                    f"Only mono audio is supported. Got {f.channels} channels."
                )
            if f.subtype not in SUPPORTED_SUBTYPES:
                raise UnsupportedEncoding(
                    f"Sample encoding must be one of {SUPPORTED_SUBTYPES}. "
                    f"Got {f.subtype}."
                )
            if f.frames == 0:
                raise EmptyAudio(f"No samples in {source_id!r}.")
            samples = f.read(dtype="float64", always_2d=False)
            rate = f.samplerate
    except RuntimeError as e:
        raise MalformedHeader(f"Could not parse WAV {source_id!r}: {e}") from e
    if np.any(np.abs(samples) > 1):
        warnings.warn(
            f"Float samples in {source_id!r} exceed [-1, 1] and were clipped.",
            UserWarning,
        )
        samples = np.clip(samples, -1, 1)
    return Waveform(samples, rate, source_id)


def encode_wav(waveform: Waveform, subtype: str = "PCM_16") -> bytes:
    """ Encode a waveform as a mono RIFF/WAVE file.

    PCM_16 quantization rounds x * 32768 to the nearest integer, so decoding
    the result reproduces the input within one least significant bit.

    Args:
        waveform (Waveform): Signal to encode.
        subtype (str): 'PCM_16' or 'FLOAT'.

    Returns:
        bytes: The encoded file.
    """
    if subtype not in SUPPORTED_SUBTYPES:
        raise UnsupportedEncoding(
            f"subtype must be one of {SUPPORTED_SUBTYPES}. Got {subtype}."
        )
    if subtype == "PCM_16":
        data = np.clip(
            np.round(waveform.samples * _PCM16_SCALE), -_PCM16_SCALE, _PCM16_SCALE - 1
        ).astype(np.int16)
    else:
        data = waveform.samples.astype(np.float32)
    buf = io.BytesIO()
    sf.write(buf, data, waveform.sample_rate, format="WAV", subtype=subtype)
    return buf.getvalue()


def write_raw(waveform: Waveform) -> bytes:
    """ Serialize a waveform as ADFE raw audio: a 16 byte little-endian
    header (magic, uint32 rate, uint64 length) followed by float32 samples.
    """
    header = RAW_HEADER.pack(RAW_MAGIC, waveform.sample_rate, len(waveform))
    return header + waveform.samples.astype("<f4").tobytes()


def read_raw(data: bytes, source_id: str = "") -> Waveform:
    """ Parse ADFE raw audio written by write_raw.

    Raises:
        MalformedHeader: If the magic is wrong or the payload is truncated.
        EmptyAudio: If the header declares zero samples.
    """
    if len(data) < RAW_HEADER.size:
        raise MalformedHeader(f"Raw audio {source_id!r} is shorter than its header.")
    magic, rate, length = RAW_HEADER.unpack_from(data)
    if magic != RAW_MAGIC:
        raise MalformedHeader(f"Bad raw audio magic {magic!r} in {source_id!r}.")
    if length == 0:
        raise EmptyAudio(f"No samples in {source_id!r}.")
    payload = data[RAW_HEADER.size :]
    if len(payload) != 4 * length:
        raise MalformedHeader(
            f"Raw audio {source_id!r} declares {length} samples but holds "
            f"{len(payload) // 4}."
        )
    samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    if np.any(np.abs(samples) > 1):
        warnings.warn(
            f"Float samples in {source_id!r} exceed [-1, 1] and were clipped.",
            UserWarning,
        )
        samples = np.clip(samples, -1, 1)
    return Waveform(samples, rate, source_id)


def load_audio(path_or_buf: Union[str, BinaryIO]) -> Waveform:
    """ Load a WAV or ADFE raw audio file, dispatching on its magic bytes. """
    if isinstance(path_or_buf, str):
        with open(path_or_buf, "rb") as f:
            data = f.read()
        source_id = path_or_buf
    else:
        data = path_or_buf.read()
        source_id = getattr(path_or_buf, "name", "")
    if data[:4] == b"RIFF":
        return decode_wav(data, source_id)
    if data[:4] == RAW_MAGIC:
        return read_raw(data, source_id)
    raise MalformedHeader(f"Unrecognized audio container in {source_id!r}.")

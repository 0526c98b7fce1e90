# coding=utf-8
"""
Named trainable parameters and their binary checkpoint format.

A checkpoint is the 12 byte header (magic 'ADFP', uint32 version, uint32
parameter count) followed by one record per parameter: uint16 name length,
UTF-8 name, uint8 rank, rank x uint32 dimensions, then the values as
row-major little-endian float32. All integers are little-endian.
"""
import io
import struct
from typing import BinaryIO, Dict, Iterator, List, Optional, Union

import numpy as np

from .tensor import Tensor, ShapeMismatch

CHECKPOINT_MAGIC = b"ADFP"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sII")


class MalformedCheckpoint(ValueError):
    """ Raised when a parameter checkpoint cannot be parsed. """


class ParamStore:
    """ Ordered collection of named trainable tensors.

    Args:
        dtype: Floating type new parameters are stored in.
    """

    dtype: np.dtype

    def __init__(self, dtype=np.float64) -> None:
        self.dtype = np.dtype(dtype)
        self._params: Dict[str, Tensor] = {}

    def __repr__(self) -> str:
        return f"ParamStore({len(self)} tensors, {self.n_values} values)"

    def __len__(self) -> int:
        return len(self._params)

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self._params.values())

    def add(self, name: str, value) -> Tensor:
        """ Register a new parameter and return its tensor. """
        if name in self._params:
            raise ValueError(f"Parameter {name} already exists.")
        tensor = Tensor(
            np.array(value, dtype=self.dtype), requires_grad=True, name=name
        )
        self._params[name] = tensor
        return tensor

    @property
    def names(self) -> List[str]:
        return list(self._params)

    def tensors(self) -> List[Tensor]:
        return list(self._params.values())

    def select(self, prefix: str) -> List[Tensor]:
        """ Parameters whose name starts with prefix. """
        return [t for name, t in self._params.items() if name.startswith(prefix)]

    @property
    def n_values(self) -> int:
        return int(np.sum([t.size for t in self._params.values()], dtype=np.int64))

    def zero_grad(self) -> None:
        for t in self._params.values():
            t.zero_grad()

    def flat(self) -> np.ndarray:
        """ All parameter values concatenated in registration order. """
        if not self._params:
            return np.zeros(0, dtype=self.dtype)
        return np.concatenate([t.value.ravel() for t in self._params.values()])

    def set_flat(self, vector: np.ndarray) -> None:
        """ Inverse of flat. """
        vector = np.asarray(vector)
        if vector.shape != (self.n_values,):
            raise ShapeMismatch(
                f"Expected {self.n_values} values. Got shape {vector.shape}."
            )
        offset = 0
        for t in self._params.values():
            t.value = vector[offset : offset + t.size].reshape(t.shape).astype(self.dtype)
            offset += t.size

    def copy(self, dtype=None) -> "ParamStore":
        """ Independent copy, optionally cast to another floating type. """
        out = ParamStore(self.dtype if dtype is None else dtype)
        for name, t in self._params.items():
            out.add(name, t.value)
        return out

    def to_bytes(self) -> bytes:
        """ Serialize every parameter in the checkpoint format. """
        buf = io.BytesIO()
        buf.write(_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, len(self)))
        for name, t in self._params.items():
            encoded = name.encode("utf-8")
            buf.write(struct.pack("<H", len(encoded)))
            buf.write(encoded)
            buf.write(struct.pack("<B", t.ndim))
            buf.write(struct.pack(f"<{t.ndim}I", *t.shape))
            buf.write(t.value.astype("<f4").tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, dtype=np.float32) -> "ParamStore":
        """ Parse a checkpoint written by to_bytes.

        Raises:
            MalformedCheckpoint: On a bad magic, unknown version or truncation.
        """
        if len(data) < _HEADER.size:
            raise MalformedCheckpoint("Checkpoint is shorter than its header.")
        magic, version, count = _HEADER.unpack_from(data)
        if magic != CHECKPOINT_MAGIC:
            raise MalformedCheckpoint(f"Bad checkpoint magic {magic!r}.")
        if version != CHECKPOINT_VERSION:
            raise MalformedCheckpoint(
                f"Unsupported checkpoint version {version}. "
                f"Expected {CHECKPOINT_VERSION}."
            )
        store = cls(dtype)
        offset = _HEADER.size
        try:
            for _ in range(count):
                (n_name,) = struct.unpack_from("<H", data, offset)
                offset += 2
                name = data[offset : offset + n_name].decode("utf-8")
                offset += n_name
                (ndim,) = struct.unpack_from("<B", data, offset)
                offset += 1
                shape = struct.unpack_from(f"<{ndim}I", data, offset)
                offset += 4 * ndim
                n_bytes = 4 * int(np.prod(shape, dtype=np.int64))
                if offset + n_bytes > len(data):
                    raise MalformedCheckpoint(f"Parameter {name} is truncated.")
                values = np.frombuffer(data, "<f4", n_bytes // 4, offset)
                offset += n_bytes
                store.add(name, values.reshape(shape))
        except (struct.error, UnicodeDecodeError) as e:
            raise MalformedCheckpoint(f"Checkpoint is truncated: {e}") from e
        if offset != len(data):
            raise MalformedCheckpoint(
                f"{len(data) - offset} trailing bytes after the last parameter."
            )
        return store

    def save(self, path_or_buf: Union[str, BinaryIO]) -> None:
        if isinstance(path_or_buf, str):
            with open(path_or_buf, "wb") as f:
                f.write(self.to_bytes())
        else:
            path_or_buf.write(self.to_bytes())

    @classmethod
    def load(cls, path_or_buf: Union[str, BinaryIO], dtype=np.float32) -> "ParamStore":
        if isinstance(path_or_buf, str):
            with open(path_or_buf, "rb") as f:
                return cls.from_bytes(f.read(), dtype)
        return cls.from_bytes(path_or_buf.read(), dtype)

    def load_values(self, other: "ParamStore") -> None:
        """ Copy values from a store holding the same names and shapes. """
        if other.names != self.names:
            raise ShapeMismatch(
                f"Parameter names differ: {other.names} vs {self.names}."
            )
        for name, t in self._params.items():
            if other[name].shape != t.shape:
                raise ShapeMismatch(
                    f"Parameter {name} has shape {other[name].shape}, "
                    f"expected {t.shape}."
                )
            t.value = other[name].value.astype(self.dtype)

# coding=utf-8
"""
Frame-by-frame record of the adaptive Q-factors.
"""
from typing import Optional, Union, TextIO

import numpy as np
import pandas as pd

CSV_FLOAT_FORMAT = "%.10g"


class QTrace:
    """ Q-factors and subband energies of every frame of one utterance.

    Row t of q holds the Q-factors the adaptive layer used at frame t, row t
    of energy_db the energies measured with them. Q at frame t + 1 is
    computed from row t of q_e and q_fm.

    Args:
        q (np.ndarray): T x C Q-factors.
        energy_db (np.ndarray): T x C subband energies. [dB]
        channel_centers (np.ndarray): Center of each adaptive channel. [Hz]
        q_e (np.ndarray): T x C level-dependent terms, optional.
        q_fm (np.ndarray): T x C controller terms, optional.
    """

    q: np.ndarray
    energy_db: np.ndarray
    channel_centers: np.ndarray
    q_e: Optional[np.ndarray]
    q_fm: Optional[np.ndarray]

    def __init__(
        self,
        q: np.ndarray,
        energy_db: np.ndarray,
        channel_centers,
        q_e: Optional[np.ndarray] = None,
        q_fm: Optional[np.ndarray] = None,
    ) -> None:
        q = np.asarray(q, dtype=np.float64)
        energy_db = np.asarray(energy_db, dtype=np.float64)
        channel_centers = np.asarray(channel_centers, dtype=np.float64)
        if q.ndim != 2 or q.shape != energy_db.shape:
            raise ValueError(
                f"Q and energy must be T x C matrices of equal shape. "
                f"Got {q.shape} and {energy_db.shape}."
            )
        if q.shape[1] != len(channel_centers):
            raise ValueError(
                f"Expected {q.shape[1]} channel centers. Got {len(channel_centers)}."
            )
        for name, arr in (("q_e", q_e), ("q_fm", q_fm)):
            if arr is not None and np.shape(arr) != q.shape:
                raise ValueError(f"{name} must have shape {q.shape}. Got {np.shape(arr)}.")
        self.q = q
        self.energy_db = energy_db
        self.channel_centers = channel_centers
        self.q_e = None if q_e is None else np.asarray(q_e, dtype=np.float64)
        self.q_fm = None if q_fm is None else np.asarray(q_fm, dtype=np.float64)

    def __repr__(self) -> str:
        return f"QTrace(n_frames={self.n_frames}, n_channels={self.n_channels})"

    def __len__(self) -> int:
        return self.q.shape[0]

    @property
    def n_frames(self) -> int:
        return self.q.shape[0]

    @property
    def n_channels(self) -> int:
        return self.q.shape[1]

    def as_df(self, components: bool = False) -> pd.DataFrame:
        """ Long-format table, one row per (frame, channel).

        Args:
            components (bool): Also include the q_e and q_fm columns.

        Returns:
            pd.DataFrame: Columns frame_index, channel, q_value, energy_db
                and, with components, q_e and q_fm.
        """
        n_frames, n_channels = self.q.shape
        table = {
            "frame_index": np.repeat(np.arange(n_frames), n_channels),
            "channel": np.tile(np.arange(n_channels), n_frames),
            "q_value": self.q.ravel(),
            "energy_db": self.energy_db.ravel(),
        }
        if components:
            table["q_e"] = self._component(self.q_e)
            table["q_fm"] = self._component(self.q_fm)
        return pd.DataFrame(table)

    def _component(self, values: Optional[np.ndarray]) -> np.ndarray:
        if values is None:
            return np.full(self.q.size, np.nan)
        return values.ravel()

    def to_csv(self, path_or_buf: Union[str, TextIO], components: bool = False) -> None:
        self.as_df(components).to_csv(
            path_or_buf, index=False, float_format=CSV_FLOAT_FORMAT
        )

    @classmethod
    def from_df(cls, df: pd.DataFrame, channel_centers=None) -> "QTrace":
        """ Inverse of as_df. """
        n_frames = int(df["frame_index"].max()) + 1
        n_channels = int(df["channel"].max()) + 1
        df = df.sort_values(["frame_index", "channel"])

        def matrix(column):
            if column not in df:
                return None
            return df[column].to_numpy().reshape(n_frames, n_channels)

        if channel_centers is None:
            channel_centers = np.arange(n_channels, dtype=np.float64)
        return cls(
            matrix("q_value"),
            matrix("energy_db"),
            channel_centers,
            matrix("q_e"),
            matrix("q_fm"),
        )

# coding=utf-8
"""
Per-utterance state of the adaptation loop.
"""
from typing import Optional

import numpy as np

from .config import FrontendConfig
from .controller import BatchNormStats


class AdaptState:
    """ Mutable state carried from one frame to the next.

    Q^E and Q^FM of frame t - 1 are what the Q of frame t is built from, so
    they are kept next to the Q they produced.

    Args:
        q_current (np.ndarray): (B, C) Q-factors the adaptive layer uses at
            the next frame, C being the number of adaptive channels.
        q_e_prev (np.ndarray): (B, C) level-dependent term of the last frame.
        q_fm_prev (np.ndarray): (B, C) controller term of the last frame.
        bn_stats (BatchNormStats): Controller normalization statistics;
            shared with the controller, not copied.
        frame_index (int): Index t of the next frame.
    """

    q_current: np.ndarray
    q_e_prev: np.ndarray
    q_fm_prev: np.ndarray
    bn_stats: Optional[BatchNormStats]
    frame_index: int

    def __init__(
        self,
        q_current: np.ndarray,
        q_e_prev: np.ndarray,
        q_fm_prev: np.ndarray,
        bn_stats: Optional[BatchNormStats] = None,
        frame_index: int = 0,
    ) -> None:
        self.q_current = q_current
        self.q_e_prev = q_e_prev
        self.q_fm_prev = q_fm_prev
        self.bn_stats = bn_stats
        self.frame_index = frame_index

    def __repr__(self) -> str:
        return (
            f"AdaptState(frame_index={self.frame_index}, "
            f"batch={self.q_current.shape[0]}, channels={self.q_current.shape[1]})"
        )

    @classmethod
    def initial(
        cls,
        cfg: FrontendConfig,
        batch_size: int = 1,
        bn_stats: Optional[BatchNormStats] = None,
        dtype=np.float64,
    ) -> "AdaptState":
        """ State before the first frame: Q at q_init everywhere, both Q
        terms zero. """
        shape = (batch_size, cfg.n_adaptive)
        return cls(
            np.full(shape, cfg.q_init, dtype=dtype),
            np.zeros(shape, dtype=dtype),
            np.zeros(shape, dtype=dtype),
            bn_stats,
            0,
        )

    def advance(self, q_next: np.ndarray, q_e: np.ndarray, q_fm: np.ndarray) -> "AdaptState":
        """ State after one more frame. """
        return AdaptState(q_next, q_e, q_fm, self.bn_stats, self.frame_index + 1)

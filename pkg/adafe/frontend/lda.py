# coding=utf-8
"""
Subband energy and the level-dependent Q rule.

The rule is a non-increasing two-knee map from dB energy to Q: lda_q_max at
and below lda_e_lo, lda_q_min at and above lda_e_hi, linear in between.
"""
import numpy as np

from ..autodiff import Tensor, ops
from .config import FrontendConfig

ENERGY_FLOOR = 1e-12
_DB_PER_NEPER = 10 / np.log(10)


def subband_energy_op(s: Tensor) -> Tensor:
    """ Mean square over the last (sample) axis. """
    return ops.mean(ops.square(s), axis=-1)


def energy_db_op(energy: Tensor) -> Tensor:
    """ 10 log10(energy + 1e-12). """
    return ops.mul(ops.log(ops.add(energy, ENERGY_FLOOR)), _DB_PER_NEPER)


def subband_energy(s_frame: np.ndarray) -> np.ndarray:
    """ Linear energy of every subband of a (..., C, F) frame,
    E[c] = (1/F) sum_f s[c, f]^2. """
    return subband_energy_op(Tensor(s_frame)).value


def energy_db(energy: np.ndarray) -> np.ndarray:
    return energy_db_op(Tensor(energy)).value


def lda_q_op(energy_db: Tensor, cfg: FrontendConfig) -> Tensor:
    """ Level-dependent Q term on the tape; differentiable between the
    knees, flat outside them. """
    slope = (cfg.lda_q_max - cfg.lda_q_min) / (cfg.lda_e_hi - cfg.lda_e_lo)
    clipped = ops.clamp_straight_through(energy_db, cfg.lda_e_lo, cfg.lda_e_hi)
    return ops.sub(cfg.lda_q_max, ops.mul(ops.sub(clipped, cfg.lda_e_lo), slope))


def lda_q(energy_db: np.ndarray, cfg: FrontendConfig) -> np.ndarray:
    """ Level-dependent Q term Q^E for per-channel energies.

    Args:
        energy_db (np.ndarray): Subband energies. [dB]
        cfg (FrontendConfig): Supplies the knees lda_e_lo, lda_e_hi and the
            Q range lda_q_min, lda_q_max.

    Returns:
        np.ndarray: Q^E, same shape as energy_db.
    """
    return lda_q_op(Tensor(np.asarray(energy_db, dtype=np.float64)), cfg).value

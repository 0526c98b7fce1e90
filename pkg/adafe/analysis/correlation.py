# coding=utf-8
"""
Relation between subband energy and the Q-factors chosen in response.
"""
from typing import Dict, Sequence

import numpy as np

from ..frontend import QTrace


def _lagged_pairs(trace: QTrace, lag: int):
    if lag < 0:
        raise ValueError(f"lag must be non-negative. Got {lag}.")
    n = trace.n_frames - lag
    return trace.energy_db[:n], trace.q[lag : lag + n]


def pearson_columns(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """ Pearson correlation of every column of x with the same column of y;
    NaN where either column is constant or has fewer than two rows. """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[0] < 2:
        return np.full(x.shape[1], np.nan)
    dx = x - x.mean(axis=0)
    dy = y - y.mean(axis=0)
    denominator = np.sqrt((dx ** 2).sum(axis=0) * (dy ** 2).sum(axis=0))
    out = np.full(x.shape[1], np.nan)
    # Relative threshold: columns constant up to rounding count as constant.
    scale = np.maximum(np.abs(x).max(axis=0) * np.abs(y).max(axis=0), 1e-300)
    valid = denominator > 1e-12 * scale * x.shape[0]
    out[valid] = (dx * dy).sum(axis=0)[valid] / denominator[valid]
    return out


def q_energy_correlation(trace: QTrace, lag: int = 1) -> np.ndarray:
    """ Per-channel Pearson correlation between the energy at frame t and
    the Q-factor at frame t + lag.

    Args:
        trace (QTrace): Trace of one utterance.
        lag (int): Frame offset; 1 pairs every energy with the Q it
            produced.

    Returns:
        np.ndarray: One coefficient per channel, NaN for channels whose
            energy or Q never changes.
    """
    energy, q = _lagged_pairs(trace, lag)
    return pearson_columns(energy, q)


def pooled_q_energy_correlation(traces: Sequence[QTrace], lag: int = 1) -> np.ndarray:
    """ q_energy_correlation over the lagged pairs of several traces taken
    together. """
    if not traces:
        raise ValueError("Need at least one trace.")
    pairs = [_lagged_pairs(trace, lag) for trace in traces]
    energy = np.concatenate([e for e, _ in pairs], axis=0)
    q = np.concatenate([q for _, q in pairs], axis=0)
    return pearson_columns(energy, q)


def summarize_correlation(corr: np.ndarray) -> Dict[str, float]:
    """ Median over channels and the fraction of negative coefficients, both
    over the channels with a defined coefficient. """
    corr = np.asarray(corr, dtype=np.float64)
    defined = corr[~np.isnan(corr)]
    if len(defined) == 0:
        return {"median": float("nan"), "fraction_negative": float("nan"), "n_channels": 0}
    return {
        "median": float(np.median(defined)),
        "fraction_negative": float(np.mean(defined < 0)),
        "n_channels": int(len(defined)),
    }


def curve_stability(curve: Sequence[float]) -> Dict[str, float]:
    """ Variance of a learning curve and its largest drop between
    consecutive epochs. """
    curve = np.asarray(curve, dtype=np.float64)
    if len(curve) == 0:
        return {"variance": float("nan"), "max_drop": float("nan")}
    drops = -np.diff(curve)
    return {
        "variance": float(np.var(curve)),
        "max_drop": float(max(drops.max(initial=0.0), 0.0)),
    }

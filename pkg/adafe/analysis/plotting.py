# coding=utf-8
"""
Figures of filter responses, Q traces and learning curves.
"""
from typing import Optional, Sequence

import numpy as np
import pandas as pd
import matplotlib.pyplot as plt

from ..frontend import QTrace


def plot_responses(table: pd.DataFrame, ax: Optional[plt.Axes] = None) -> plt.Axes:
    """ Plot every magnitude column of a response table against freq_hz.

    Args:
        table (pd.DataFrame): Output of adafe.gabor.response_table.
        ax (plt.Axes): Axes to draw on, a new figure by default.
    """
    if ax is None:
        _, ax = plt.subplots()
    for column in table.columns:
        if column.startswith("magnitude"):
            label = column[len("magnitude_") :] if column != "magnitude" else None
            ax.plot(table["freq_hz"], table[column], label=label)
    ax.set_xlabel("Frequency (Hz)")
    ax.set_ylabel("Magnitude")
    if len(table.columns) > 2:
        ax.legend()
    return ax


def plot_q_trace(
    trace: QTrace, channels: Sequence[int], frame_ms: float = 11.0, axs=None
):
    """ Q-factor and energy of selected channels, frame by frame, on two
    stacked axes sharing the time axis.

    Returns:
        np.ndarray: The two axes.
    """
    if axs is None:
        _, axs = plt.subplots(2, 1, sharex=True)
    time_s = np.arange(trace.n_frames) * frame_ms / 1000
    for c in channels:
        label = f"{trace.channel_centers[c]:.0f} Hz"
        axs[0].plot(time_s, trace.q[:, c], label=label)
        axs[1].plot(time_s, trace.energy_db[:, c], label=label)
    axs[0].set_ylabel("Q")
    axs[1].set_ylabel("Energy (dB)")
    axs[1].set_xlabel("Time (s)")
    axs[0].legend()
    return axs


def plot_learning_curves(curves: pd.DataFrame, ax: Optional[plt.Axes] = None) -> plt.Axes:
    """ Validation top-1 per epoch, one line per run.

    Args:
        curves (pd.DataFrame): Columns run, epoch and valid_top1, as built by
            concatenating EvalReport.curve_as_df tables with a run column.
    """
    if ax is None:
        _, ax = plt.subplots()
    for run, group in curves.groupby("run", sort=True):
        ax.plot(group["epoch"], group["valid_top1"], label=str(run))
    ax.set_xlabel("Epoch")
    ax.set_ylabel("Validation top-1")
    ax.legend()
    return ax

# coding=utf-8
"""
Variant-by-seed comparison runs.
"""
import os
from typing import Any, Dict, Optional, Sequence, Tuple

import pandas as pd

from ..frontend import VARIANTS, FrontendConfig
from ..frontend.trace import CSV_FLOAT_FORMAT
from .tasks import ToyTask
from .trainer import TrainConfig, train

RUN_COLUMNS = [
    "variant",
    "seed",
    "top1",
    "top5",
    "epochs",
    "q_energy_corr_median",
    "curve_variance",
    "curve_max_drop",
    "test_hash",
]
RUNS_FILE = "ablation_runs.csv"
SUMMARY_FILE = "ablation_summary.csv"


def summarize_runs(runs: pd.DataFrame) -> pd.DataFrame:
    """ Mean and population standard deviation of every metric per variant,
    rows in the order the variants first appear. """
    grouped = runs.groupby("variant", sort=False)
    summary = pd.DataFrame(
        {
            "top1_mean": grouped["top1"].mean(),
            "top1_std": grouped["top1"].std(ddof=0),
            "top5_mean": grouped["top5"].mean(),
            "top5_std": grouped["top5"].std(ddof=0),
            "epochs_mean": grouped["epochs"].mean(),
            "q_energy_corr_median": grouped["q_energy_corr_median"].mean(),
            "n_runs": grouped.size(),
        }
    )
    return summary.reset_index()


def ablation_matrix(
    task: ToyTask,
    seeds: Sequence[int],
    train_cfg: Optional[TrainConfig] = None,
    variants: Sequence[str] = VARIANTS,
    frontend_overrides: Optional[Dict[str, Any]] = None,
    verbose: bool = False,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """ Train every variant with every seed on the same task.

    Args:
        task (ToyTask): Shared task; every run sees the same splits.
        seeds (Sequence[int]): Training seeds, at least one.
        train_cfg (TrainConfig): Settings shared by all runs; seed and
            variant are replaced per run.
        variants (Sequence[str]): Front-end presets to compare.
        frontend_overrides (Dict[str, Any]): Settings applied on top of
            every preset.
        verbose (bool): Print one line per run.

    Returns:
        Tuple[pd.DataFrame, pd.DataFrame]: One row per run, and one row per
            variant with the mean and standard deviation over seeds.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("ablation_matrix needs at least one seed.")
    if train_cfg is None:
        train_cfg = TrainConfig()
    frontend_overrides = frontend_overrides or {}
    test_hash = task.split_digest("test")
    rows = []
    for variant in variants:
        frontend_cfg = FrontendConfig.from_preset(variant, **frontend_overrides)
        for seed in seeds:
            _, report = train(task, train_cfg.replace(seed=seed, variant=variant), frontend_cfg)
            row = report.as_row()
            row["test_hash"] = test_hash
            rows.append(row)
            if verbose:
                print(f"{variant} seed {seed}: top-1 {report.top1:.3f} after {report.epochs} epochs")
    runs = pd.DataFrame(rows, columns=RUN_COLUMNS)
    return runs, summarize_runs(runs)


def write_ablation(runs: pd.DataFrame, summary: pd.DataFrame, out_dir: str) -> None:
    """ Write the run and summary tables as CSV into out_dir. """
    os.makedirs(out_dir, exist_ok=True)
    runs.to_csv(os.path.join(out_dir, RUNS_FILE), index=False, float_format=CSV_FLOAT_FORMAT)
    summary.to_csv(os.path.join(out_dir, SUMMARY_FILE), index=False, float_format=CSV_FLOAT_FORMAT)

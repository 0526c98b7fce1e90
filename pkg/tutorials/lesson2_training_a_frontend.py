"""
adafe Tutorial: Lesson 2
Training a front-end
--

In this lesson we train the adaptive front-end together with a small classifier on the loudness_tones task, where
each class is a tone frequency played at a random level, and compare it with the same model whose Q never moves.
"""
import pandas as pd
import matplotlib.pyplot as plt

from adafe.analysis.plotting import plot_learning_curves
from adafe.training import TrainConfig, gen_synthetic_task, train

# -- Task --------------------------------------------------------------------------------------------------------------
# Eight classes, levels drawn uniformly from [-40, 0] dB FS and white noise at 0 to 30 dB SNR. Every clip has its
# own seed, so the task is the same on every machine.
task = gen_synthetic_task("loudness_tones", seed=0)
print(task)

# -- Training ----------------------------------------------------------------------------------------------------------
# Early stopping watches validation top-1; 30 epochs is plenty for this task.
train_cfg = TrainConfig(epochs=30, patience=10, seed=0)

reports = {}
for variant in ("ada_fe", "frozen_q_baseline"):
    _, reports[variant] = train(task, train_cfg.replace(variant=variant), verbose=True)

# -- Results -----------------------------------------------------------------------------------------------------------
results = pd.DataFrame([report.as_row() for report in reports.values()])
print(results[["variant", "top1", "top5", "epochs", "q_energy_corr_median", "curve_variance"]])

curves = pd.concat(
    [report.curve_as_df().assign(run=variant) for variant, report in reports.items()],
    ignore_index=True,
)
plot_learning_curves(curves)
plt.show()

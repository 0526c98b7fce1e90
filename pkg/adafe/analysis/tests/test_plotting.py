import unittest
from unittest import TestCase

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

from adafe.analysis import plotting
from adafe.frontend import QTrace
from adafe.gabor import gabor_kernel, response_table


class TestPlotting(TestCase):
    def tearDown(self):
        plt.close("all")

    def test_responses(self):
        table = response_table({f"q{q}": gabor_kernel(3000.0, q) for q in (1.5, 2.0, 2.5)})
        ax = plotting.plot_responses(table)
        self.assertEqual(len(ax.get_lines()), 3)
        self.assertEqual(len(ax.get_legend().get_texts()), 3)

    def test_q_trace(self):
        q = np.full((10, 4), 2.0)
        trace = QTrace(q, -40 * np.ones((10, 4)), [500.0, 1000.0, 1500.0, 2000.0])
        axs = plotting.plot_q_trace(trace, [0, 3])
        self.assertEqual(len(axs[0].get_lines()), 2)
        self.assertEqual(axs[1].get_ylabel(), "Energy (dB)")

    def test_learning_curves(self):
        curves = pd.DataFrame(
            {"run": ["a", "a", "b", "b"], "epoch": [1, 2, 1, 2], "valid_top1": [0.2, 0.4, 0.3, 0.5]}
        )
        ax = plotting.plot_learning_curves(curves)
        self.assertEqual(len(ax.get_lines()), 2)


if __name__ == "__main__":
    unittest.main()

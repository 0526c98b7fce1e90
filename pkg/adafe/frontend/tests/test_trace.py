import io
import unittest
from unittest import TestCase

import numpy as np
import numpy.testing as nptest
import pandas as pd

from adafe.frontend import AdaptState, FrontendConfig, QTrace


class TestQTrace(TestCase):
    def setUp(self):
        q = np.arange(6, dtype=float).reshape(3, 2) + 1
        self.trace = QTrace(q, -q * 10, [500.0, 700.0], q_e=q / 2, q_fm=q / 4)

    def test_as_df_layout(self):
        df = self.trace.as_df()
        self.assertEqual(list(df.columns), ["frame_index", "channel", "q_value", "energy_db"])
        self.assertEqual(len(df), 6)
        nptest.assert_array_equal(df["frame_index"], [0, 0, 1, 1, 2, 2])
        nptest.assert_array_equal(df["channel"], [0, 1, 0, 1, 0, 1])
        nptest.assert_array_equal(df["q_value"], [1, 2, 3, 4, 5, 6])

    def test_components(self):
        df = self.trace.as_df(components=True)
        nptest.assert_array_equal(df["q_e"], np.arange(1, 7) / 2)
        missing = QTrace(self.trace.q, self.trace.energy_db, [1.0, 2.0]).as_df(True)
        self.assertTrue(missing["q_fm"].isna().all())

    def test_csv_round_trip(self):
        buf = io.StringIO()
        self.trace.to_csv(buf, components=True)
        loaded = QTrace.from_df(pd.read_csv(io.StringIO(buf.getvalue())), [500.0, 700.0])
        nptest.assert_array_equal(loaded.q, self.trace.q)
        nptest.assert_array_equal(loaded.q_fm, self.trace.q_fm)
        self.assertEqual(buf.getvalue().splitlines()[0], "frame_index,channel,q_value,energy_db,q_e,q_fm")

    def test_shape_validation(self):
        with self.assertRaises(ValueError):
            QTrace(np.ones((3, 2)), np.ones((3, 3)), [1.0, 2.0])
        with self.assertRaises(ValueError):
            QTrace(np.ones((3, 2)), np.ones((3, 2)), [1.0])
        with self.assertRaises(ValueError):
            QTrace(np.ones((3, 2)), np.ones((3, 2)), [1.0, 2.0], q_e=np.ones(3))


class TestAdaptState(TestCase):
    def test_initial(self):
        state = AdaptState.initial(FrontendConfig(), batch_size=2)
        self.assertEqual(state.q_current.shape, (2, 39))
        nptest.assert_array_equal(state.q_current, 2.0)
        nptest.assert_array_equal(state.q_e_prev, 0)
        self.assertEqual(state.frame_index, 0)

    def test_no_fixed_layer_width(self):
        cfg = FrontendConfig.from_preset("no_fixed_layer")
        self.assertEqual(AdaptState.initial(cfg).q_current.shape, (1, 40))

    def test_advance(self):
        state = AdaptState.initial(FrontendConfig(n_filters=3, f_lo=100, f_hi=300))
        nxt = state.advance(np.full((1, 2), 3.0), np.ones((1, 2)), np.ones((1, 2)))
        self.assertEqual(nxt.frame_index, 1)
        nptest.assert_array_equal(state.q_current, 2.0)


if __name__ == "__main__":
    unittest.main()

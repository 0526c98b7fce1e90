import unittest
from unittest import TestCase

import numpy as np
import numpy.testing as nptest

from adafe.autodiff import ParamStore, ShapeMismatch, check_gradients, ops
from adafe.frontend import (
    AdaptiveFeedbackController,
    BatchNormStats,
    ControllerInput,
    FrontendConfig,
    afc_forward,
    TRAIN,
    INFER,
)


class TestBatchNormStats(TestCase):
    def test_update_blends(self):
        stats = BatchNormStats(2, momentum=0.9)
        stats.update(np.array([[1.0, 2.0], [3.0, 2.0]]))
        nptest.assert_allclose(stats.mean, [0.2, 0.2])
        nptest.assert_allclose(stats.var, [0.9 + 0.1 * 1.0, 0.9])
        self.assertEqual(stats.n_updates, 1)

    def test_copy_is_independent(self):
        stats = BatchNormStats(3)
        other = stats.copy()
        other.update(np.ones((2, 3)))
        nptest.assert_array_equal(stats.mean, 0)


class TestControllerInput(TestCase):
    def test_rejects_unknown_kind(self):
        with self.assertRaises(ValueError):
            ControllerInput(np.zeros(3), "pitch")

    def test_rejects_non_finite(self):
        with self.assertRaises(ValueError):
            ControllerInput(np.array([0.0, np.nan]), "fm")


class TestAfcForward(TestCase):
    def setUp(self):
        self.cfg = FrontendConfig(n_filters=6, f_lo=500, f_hi=3000)
        self.controller = AdaptiveFeedbackController(self.cfg, seed=4)

    def test_initial_weights(self):
        params = self.controller.params
        self.assertEqual(params["afc.fc1.weight"].shape, (5, 5))
        nptest.assert_array_equal(params["afc.fc1.bias"].value, 0)
        nptest.assert_array_equal(params["afc.fc2.scale"].value, 1)
        nptest.assert_array_equal(params["afc.fc2.bias"].value, 0)
        self.assertTrue(np.all(np.abs(params["afc.fc1.weight"].value) <= np.sqrt(6 / 10)))

    def test_zero_everything_gives_gamma(self):
        for t in self.controller.params:
            t.value = np.zeros_like(t.value)
        q_fm = self.controller(ControllerInput(np.zeros(5), "fm"))
        nptest.assert_allclose(q_fm.value, self.cfg.q_fm_scale)
        self.assertEqual(q_fm.shape, (5,))

    def test_output_strictly_bounded(self):
        rng = np.random.default_rng(0)
        for t in self.controller.params:
            t.value = rng.normal(size=t.shape)
        for mode in (TRAIN, INFER):
            q_fm = self.controller(ControllerInput(rng.normal(size=(16, 5)), "fm"), mode)
            self.assertTrue(np.all(q_fm.value > 0))
            self.assertTrue(np.all(q_fm.value <= 2 * self.cfg.q_fm_scale))

    def test_train_mode_updates_stats_on_request(self):
        inp = ControllerInput(np.full((4, 5), 2.0), "fm")
        self.controller(inp, TRAIN)
        self.assertEqual(self.controller.bn_stats.n_updates, 0)
        self.controller(inp, TRAIN, update_stats=True)
        nptest.assert_allclose(self.controller.bn_stats.mean, 0.02)

    def test_infer_uses_running_stats(self):
        bn = self.controller.bn_stats
        bn.mean = np.full(5, 3.0)
        x = np.full((2, 5), 3.0)
        shifted = self.controller(ControllerInput(x, "fm"), INFER)
        bn.mean = np.zeros(5)
        centered = self.controller(ControllerInput(np.zeros((2, 5)), "fm"), INFER)
        nptest.assert_allclose(shifted.value, centered.value)

    def test_width_mismatch(self):
        with self.assertRaises(ShapeMismatch):
            self.controller(ControllerInput(np.zeros(7), "fm"))

    def test_kind_mismatch(self):
        with self.assertRaises(ValueError):
            self.controller(ControllerInput(np.zeros(5), "energy"))

    def test_existing_params_are_reused(self):
        other = AdaptiveFeedbackController(self.cfg, self.controller.params, seed=99)
        self.assertIs(other.params, self.controller.params)
        self.assertEqual(len(other.weights), 4)

    def test_finite_difference(self):
        cfg, bn = self.cfg, self.controller.bn_stats
        rng = np.random.default_rng(7)
        weights = rng.normal(size=(4, 5))
        names = ["afc.fc1.weight", "afc.fc1.bias", "afc.fc2.scale", "afc.fc2.bias"]

        def loss(t):
            params = dict(zip(names, t[1:]))
            q_fm = afc_forward(ControllerInput(t[0], "fm"), params, bn, cfg, TRAIN)
            return ops.sum(ops.mul(q_fm, weights))

        values = [
            rng.normal(size=(4, 5)),
            rng.normal(size=(5, 5)),
            rng.normal(size=5),
            rng.normal(size=5),
            rng.normal(size=5),
        ]
        self.assertLess(check_gradients(loss, values), 1e-4)


if __name__ == "__main__":
    unittest.main()

import io
import unittest
import warnings
from unittest import TestCase

import numpy as np
import numpy.testing as nptest

from adafe.audio import Waveform
from adafe.frontend import FrontendConfig
from adafe.training import (
    TaskTooSmall,
    TestLeakageError,
    ToyTask,
    TrainConfig,
    Trainer,
    evaluate_checkpoint,
    gen_synthetic_task,
    load_model,
    train,
)

SMALL = dict(n_filters=8, filter_len=31, f_lo=300.0, f_hi=6000.0)


def tiny_task(**kwargs):
    settings = dict(n_train=16, n_valid=8, n_test=8, clip_seconds=0.1)
    settings.update(kwargs)
    return gen_synthetic_task("loudness_tones", 0, **settings)


def tiny_config(**kwargs):
    settings = dict(clip_seconds=0.1, segment_seconds=0.1, bptt_window=4, hidden=32, n_workers=2)
    settings.update(kwargs)
    return TrainConfig(**settings)


class TestTrainConfig(TestCase):
    def test_defaults(self):
        cfg = TrainConfig()
        self.assertEqual((cfg.epochs, cfg.patience, cfg.batch_size), (150, 15, 64))
        self.assertEqual(cfg.bptt_window, 8)
        self.assertNotIn("level_range_db", cfg.keys())

    def test_validation(self):
        with self.assertRaises(ValueError):
            TrainConfig(batch_size=0)
        with self.assertRaises(ValueError):
            TrainConfig(variant="leaf")
        with self.assertRaises(ValueError):
            TrainConfig(bptt_window=0)

    def test_replace(self):
        cfg = TrainConfig().replace(seed=4, variant="no_fixed_layer")
        self.assertEqual((cfg.seed, cfg.variant), (4, "no_fixed_layer"))
        with self.assertRaises(KeyError):
            TrainConfig().replace(learning_rat=1.0)

    def test_json_round_trip(self):
        buf = io.StringIO()
        TrainConfig(bptt_window=None, seed=3).to_json(buf)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            loaded = TrainConfig.from_json(io.StringIO(buf.getvalue()))
        self.assertIsNone(loaded.bptt_window)
        self.assertEqual(loaded.seed, 3)


class TestTrainer(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.task = tiny_task()

    def test_simplified_variant_has_no_level_term(self):
        trainer = Trainer(self.task, tiny_config(variant="ada_fe_s_fm"))
        cfg = trainer.frontend.cfg
        self.assertFalse(cfg.lda_enabled)
        self.assertTrue(all(name.startswith(("afc.", "clf.")) for name in trainer.params.names))
        frames = trainer.crop_frames(self.task.splits["train"][:2], random_crop=False)
        run = trainer.frontend.run_frames(frames)
        nptest.assert_array_equal(run.q_e, 0)
        self.assertGreater(np.abs(run.q_fm).max(), 0)

    def test_frozen_variant_trains_classifier_only(self):
        trainer = Trainer(self.task, tiny_config(variant="frozen_q_baseline"))
        self.assertEqual(trainer.frontend_weights, [])
        self.assertTrue(all(name.startswith("clf.") for name in trainer.params.names))

    def test_crop_shape(self):
        trainer = Trainer(self.task, tiny_config(), FrontendConfig.from_preset("ada_fe", **SMALL))
        frames = trainer.crop_frames([0, 1, 2])
        self.assertEqual(frames.shape, (3, 10, 176))
        self.assertEqual(frames.dtype, np.float32)

    def test_one_epoch_decreases_loss(self):
        trainer = Trainer(self.task, tiny_config(), FrontendConfig.from_preset("ada_fe", **SMALL))
        indices = self.task.splits["train"]
        frames = trainer.crop_frames(indices, random_crop=False)
        labels = self.task.labels("train")
        before = trainer.batch_loss(frames, labels)
        controller_before = trainer.params["afc.fc1.weight"].value.copy()
        trainer.run_epoch()
        after = trainer.batch_loss(frames, labels)
        self.assertLess(after, before)
        self.assertFalse(np.array_equal(controller_before, trainer.params["afc.fc1.weight"].value))

    def test_train_and_reload(self):
        cfg = FrontendConfig.from_preset("ada_fe", **SMALL)
        store, report = train(self.task, tiny_config(epochs=2, patience=1), cfg)
        self.assertLessEqual(report.epochs, 2)
        self.assertEqual(len(report.train_stats), report.epochs)
        self.assertEqual(report.variant, "ada_fe")
        self.assertTrue(0 <= report.top1 <= 1)
        self.assertIsNotNone(report.top5)
        self.assertIn("clf.bn.running_mean", store)
        self.assertIn("afc.bn.running_var", store)
        frontend, classifier = load_model(cfg, store)
        self.assertEqual(classifier.n_classes, 8)
        self.assertEqual(frontend.dtype, np.float64)
        again = evaluate_checkpoint(self.task, store, cfg, "test", 0.1)
        self.assertEqual(again.n_clips, 8)

    def test_reproducible(self):
        cfg = FrontendConfig.from_preset("frozen_q_baseline", **SMALL)
        _, first = train(self.task, tiny_config(epochs=2, patience=2), cfg)
        _, second = train(self.task, tiny_config(epochs=2, patience=2), cfg)
        self.assertEqual(first.curve, second.curve)
        self.assertEqual(first.top1, second.top1)

    def test_empty_split(self):
        task = tiny_task(n_test=0)
        with self.assertRaises(TaskTooSmall):
            Trainer(task, tiny_config()).train()

    def test_leaky_task(self):
        clips = [(Waveform(np.full(1600, 0.01 * (i + 1)), 16000), i % 2) for i in range(6)]
        task = ToyTask("toy", ["a", "b"], clips, {"train": [0, 1], "valid": [2, 3], "test": [1, 4, 5]})
        with self.assertRaises(TestLeakageError):
            Trainer(task, tiny_config(), FrontendConfig.from_preset("frozen_q_baseline", **SMALL)).train()


if __name__ == "__main__":
    unittest.main()

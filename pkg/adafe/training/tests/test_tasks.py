import io
import json
import os
import unittest
from unittest import TestCase
from unittest.mock import patch

import numpy as np
import numpy.testing as nptest

from adafe.audio import Waveform
from adafe.training.tasks import PEAK_LIMIT
from adafe.training import (
    CHIRP_CLASSES,
    LOUDNESS_TONES,
    NOISY_VOWELS,
    TaskTooSmall,
    TestLeakageError,
    ToyTask,
    gen_synthetic_task,
    level_db,
)


def small_task(kind=LOUDNESS_TONES, seed=0, **kwargs):
    settings = dict(n_train=16, n_valid=8, n_test=8, clip_seconds=0.05)
    settings.update(kwargs)
    return gen_synthetic_task(kind, seed, **settings)


class TestGenSyntheticTask(TestCase):
    def test_same_seed_identical(self):
        first, second = small_task(), small_task()
        for (a, la), (b, lb) in zip(first.clips, second.clips):
            nptest.assert_array_equal(a.samples, b.samples)
            self.assertEqual(la, lb)

    def test_other_seed_differs(self):
        first, second = small_task(seed=0), small_task(seed=1)
        self.assertFalse(np.array_equal(first.clips[0][0].samples, second.clips[0][0].samples))

    def test_thread_count_does_not_change_clips(self):
        first = small_task()
        with patch.dict(os.environ, {"ADAFE_THREADS": "1"}):
            second = small_task()
        for (a, _), (b, _) in zip(first.clips, second.clips):
            nptest.assert_array_equal(a.samples, b.samples)

    def test_class_balance(self):
        task = small_task(n_train=20, n_valid=11, n_test=9)
        self.assertEqual([len(task.splits[s]) for s in ("train", "valid", "test")], [16, 8, 8])
        for split in ("train", "valid", "test"):
            counts = np.bincount(task.labels(split), minlength=task.n_classes)
            self.assertTrue(np.all(counts == counts[0]))

    def test_default_sizes(self):
        task = gen_synthetic_task(LOUDNESS_TONES, clip_seconds=0.01)
        self.assertEqual([len(task.splits[s]) for s in ("train", "valid", "test")], [600, 96, 96])

    def test_levels_within_range(self):
        task = small_task(n_train=64)
        levels = [level_db(w.samples) for w, _ in task.clips]
        self.assertGreaterEqual(min(levels), -40 - 1e-9)
        self.assertLessEqual(max(levels), 1e-9)

    def test_widened_level_range(self):
        task = small_task(level_range_db=(-60.0, 0.0), n_train=64)
        levels = [level_db(w.samples) for w, _ in task.clips]
        self.assertGreaterEqual(min(levels), -60 - 1e-9)
        self.assertLess(min(levels), -40)

    def test_loud_clips_stay_within_full_scale(self):
        task = small_task(level_range_db=(-3.0, 0.0), snr_range_db=(0.0, 5.0), n_train=64)
        peaks = [np.max(np.abs(w.samples)) for w, _ in task.clips]
        self.assertLessEqual(max(peaks), PEAK_LIMIT)
        self.assertTrue(any(p["peak_limited"] for p in task.clip_params))
        for (w, _), params in zip(task.clips, task.clip_params):
            self.assertAlmostEqual(params["level_db"], level_db(w.samples), places=9)
            self.assertLessEqual(params["level_db"], params["target_level_db"] + 1e-9)

    def test_decreasing_level_range(self):
        with self.assertRaises(ValueError):
            small_task(level_range_db=(0.0, -40.0))

    def test_kinds(self):
        self.assertEqual(small_task(CHIRP_CLASSES, n_train=10, n_valid=5, n_test=5).n_classes, 5)
        self.assertEqual(small_task(NOISY_VOWELS).n_classes, 4)

    def test_clip_ids(self):
        task = small_task()
        self.assertEqual(task.clips[0][0].source_id, "loudness_tones-train-0000")
        self.assertEqual(task.split("test")[0][0].source_id, "loudness_tones-test-0000")

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            gen_synthetic_task("speech")


class TestToyTask(TestCase):
    def test_splits_disjoint(self):
        task = small_task()
        task.validate()
        task.check_leakage()
        hashes = task.split_hashes()
        self.assertFalse(hashes["train"] & hashes["test"])

    def test_empty_split(self):
        with self.assertRaises(TaskTooSmall):
            small_task(n_test=0).validate()

    def test_missing_class(self):
        clips = [(Waveform(np.full(8, 0.1 * (i + 1)), 16000), i % 2) for i in range(6)]
        task = ToyTask("toy", ["a", "b"], clips, {"train": [0, 1], "valid": [2, 4], "test": [3, 5]})
        with self.assertRaises(TaskTooSmall):
            task.validate()

    def test_leakage(self):
        clips = [(Waveform(np.full(8, 0.1 * (i + 1)), 16000), i % 2) for i in range(4)]
        task = ToyTask("toy", ["a", "b"], clips, {"train": [0, 1], "valid": [2, 3], "test": [1, 2]})
        with self.assertRaises(TestLeakageError):
            task.check_leakage()

    def test_split_digest_stable(self):
        self.assertEqual(small_task().split_digest("test"), small_task().split_digest("test"))
        self.assertNotEqual(small_task().split_digest("test"), small_task().split_digest("valid"))

    def test_manifest(self):
        task = small_task()
        buf = io.StringIO()
        task.write_manifest(buf)
        document = json.loads(buf.getvalue())
        self.assertEqual(document["task"], LOUDNESS_TONES)
        self.assertEqual(len(document["clips"]), 32)
        first = document["clips"][0]
        self.assertEqual(first["split"], "train")
        self.assertEqual(first["clip_id"], "loudness_tones-train-0000")
        self.assertIn("snr_db", first["params"])
        df = task.manifest_as_df()
        self.assertEqual(list(df.columns), ["clip_id", "label", "class_name", "split", "params"])


if __name__ == "__main__":
    unittest.main()

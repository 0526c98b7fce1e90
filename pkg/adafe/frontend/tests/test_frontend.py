import unittest
from unittest import TestCase
from unittest.mock import patch

import numpy as np
import numpy.testing as nptest

from adafe.analysis import q_energy_correlation, summarize_correlation
from adafe.audio import Waveform
from adafe.autodiff import GradTape, ParamStore, backward, check_gradients, ops
from adafe.frontend import (
    Frontend,
    FrontendConfig,
    energy_db,
    frame_grad_case,
    subband_energy,
)

FS = 16000


def noise_frames(n_frames, amplitude=0.01, seed=0):
    return amplitude * np.random.default_rng(seed).normal(size=(n_frames, 176))


def am_tone(freq, seconds, level_lo_db, level_hi_db, rate_hz):
    """ Tone whose level follows a slow sinusoid between two dBFS values. """
    t = np.arange(int(seconds * FS)) / FS
    level_db = level_lo_db + (level_hi_db - level_lo_db) * (
        0.5 - 0.5 * np.cos(2 * np.pi * rate_hz * t)
    )
    return 10 ** (level_db / 20) * np.sin(2 * np.pi * freq * t)


class TestStepFrame(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.frontend = Frontend(FrontendConfig(), seed=0)

    def test_first_frame_uses_q_init(self):
        run = self.frontend.run_frames(noise_frames(3, amplitude=0.3))
        nptest.assert_array_equal(run.q[0, 0], 2.0)

    def test_step_advances_state(self):
        state = self.frontend.initial_state()
        out, nxt = self.frontend.step_frame(noise_frames(1)[0], state)
        self.assertEqual(nxt.frame_index, 1)
        self.assertEqual(out.channels.shape, (1, 39, 176))
        nptest.assert_array_equal(nxt.q_current, out.q_next.value)
        nptest.assert_array_equal(state.q_current, 2.0)

    def test_wrong_frame_length(self):
        with self.assertRaises(ValueError):
            self.frontend.step_frame(np.zeros(160), self.frontend.initial_state())

    def test_silence_fixed_point(self):
        run = self.frontend.run_frames(np.zeros((6, 176)))
        cfg = self.frontend.cfg
        nptest.assert_allclose(run.q[0, 1:], cfg.lda_q_max + cfg.q_fm_scale)
        nptest.assert_array_equal(run.q[0, 1:], np.broadcast_to(run.q[0, 1], (5, 39)))

    def test_loud_copy_has_lower_q(self):
        quiet = noise_frames(12, amplitude=0.001)
        quiet_q = self.frontend.run_frames(quiet).q.mean()
        loud_q = self.frontend.run_frames(10 * quiet).q.mean()
        self.assertLess(loud_q, quiet_q)

    def test_one_frame_latency(self):
        frames = noise_frames(8, amplitude=0.05, seed=1)
        base = self.frontend.run_frames(frames).q[0]
        mutated = frames.copy()
        mutated[5] = noise_frames(1, amplitude=0.5, seed=2)[0]
        changed = self.frontend.run_frames(mutated).q[0]
        nptest.assert_array_equal(changed[:6], base[:6])
        self.assertTrue(np.any(changed[6] != base[6]))

    def test_q_bounded_for_random_params(self):
        rng = np.random.default_rng(5)
        frontend = Frontend(FrontendConfig(), seed=3)
        for t in frontend.params:
            t.value = 3 * rng.normal(size=t.shape)
        frames = rng.normal(size=(2, 10, 176)) * 10 ** rng.uniform(-4, 0, size=(2, 10, 1))
        run = frontend.run_frames(frames)
        self.assertTrue(np.all(run.q >= 0.5))
        self.assertTrue(np.all(run.q <= 8.0))

    def test_batch_matches_single(self):
        frames = np.stack([noise_frames(4, seed=6), noise_frames(4, seed=7)])
        batch = self.frontend.run_frames(frames)
        single = self.frontend.run_frames(frames[1])
        nptest.assert_allclose(batch.q[1], single.q[0], rtol=1e-9)


class TestRunUtterance(TestCase):
    def test_single_frame(self):
        frontend = Frontend()
        subbands, trace = frontend.run_utterance(Waveform(np.ones(100) * 0.1, FS))
        self.assertEqual(subbands.data.shape, (1, 39, 176))
        self.assertEqual(trace.q.shape, (1, 39))
        nptest.assert_array_equal(trace.q, 2.0)

    def test_one_second_shape(self):
        frontend = Frontend()
        samples = np.random.default_rng(0).normal(size=FS) * 0.01
        subbands, trace = frontend.run_utterance(Waveform(samples, FS))
        self.assertEqual(subbands.data.shape, (91, 39, 176))
        self.assertEqual(len(trace.as_df()), 91 * 39)

    def test_resamples_8k(self):
        frontend = Frontend()
        subbands, _ = frontend.run_utterance(Waveform(np.zeros(8000), 8000))
        self.assertEqual(len(subbands), 91)

    def test_deterministic(self):
        samples = np.random.default_rng(1).normal(size=4000) * 0.05
        first = Frontend(seed=11).run_utterance(Waveform(samples, FS))[1]
        second = Frontend(seed=11).run_utterance(Waveform(samples, FS))[1]
        nptest.assert_array_equal(first.q, second.q)
        nptest.assert_array_equal(first.energy_db, second.energy_db)

    def test_q_follows_tone_level_inversely(self):
        cfg = FrontendConfig.from_preset("ada_fe")
        samples = am_tone(1000, 1.0, -40, 0, rate_hz=4)
        _, trace = Frontend(cfg, seed=0).run_utterance(Waveform(samples, FS))
        corr = q_energy_correlation(trace, lag=1)
        active = (trace.energy_db.max(axis=0) > cfg.lda_e_lo) & ~np.isnan(corr)
        self.assertGreater(active.sum(), 0)
        summary = summarize_correlation(corr[active])
        self.assertGreaterEqual(summary["fraction_negative"], 0.7)
        self.assertLess(summary["median"], 0)


class TestVariants(TestCase):
    def test_frozen_q_stays_at_q_init(self):
        frontend = Frontend(FrontendConfig.from_preset("frozen_q_baseline"))
        self.assertIsNone(frontend.controller)
        self.assertEqual(len(frontend.params), 0)
        run = frontend.run_frames(noise_frames(5, amplitude=0.2))
        nptest.assert_array_equal(run.q, 2.0)

    def test_without_lda_is_invariant_to_a_zero_rule(self):
        cfg = FrontendConfig.from_preset("ada_fe_s_fm")
        frames = noise_frames(6, seed=3)
        expected = Frontend(cfg, seed=2).run_frames(frames)
        with patch(
            "adafe.frontend.frontend.lda_q_op", side_effect=lambda e, c: ops.mul(e, 0.0)
        ):
            patched = Frontend(cfg, seed=2).run_frames(frames)
        nptest.assert_array_equal(patched.q, expected.q)
        nptest.assert_array_equal(expected.q_e, 0)

    def test_without_lda_base_is_q_init(self):
        frontend = Frontend(FrontendConfig.from_preset("ada_fe_s_fm"), seed=2)
        run = frontend.run_frames(noise_frames(4, seed=4))
        nptest.assert_allclose(run.q[0, 1:], np.clip(2.0 + run.q_fm[0, :-1], 0.5, 8.0))

    def test_energy_inputs(self):
        for name, width in (("ada_fe_s_eg", 39), ("ada_fe_s_egfm", 78)):
            with self.subTest(name):
                frontend = Frontend(FrontendConfig.from_preset(name))
                self.assertEqual(frontend.params["afc.fc1.weight"].shape, (width, 39))
                run = frontend.run_frames(noise_frames(3))
                self.assertTrue(np.all(np.isfinite(run.q)))

    def test_no_fixed_layer_shapes(self):
        frontend = Frontend(FrontendConfig.from_preset("no_fixed_layer"))
        self.assertIsNone(frontend.fixed_bank)
        run = frontend.run_frames(noise_frames(3))
        self.assertEqual(run.channels.shape, (1, 3, 39, 176))
        self.assertEqual(run.q.shape, (1, 3, 40))
        self.assertEqual(len(run.channel_centers), 39)
        self.assertEqual(len(run.adaptive_centers), 40)

    def test_lda_from_spatial_diff(self):
        frontend = Frontend(FrontendConfig(lda_source="spatial_diff"))
        frame = noise_frames(1, amplitude=0.1)
        run = frontend.run_frames(frame)
        expected = energy_db(subband_energy(frontend.adaptive_input(frame)))
        nptest.assert_allclose(run.energy_db[:, 0], expected)

    def test_sequence_input_matches_per_frame(self):
        frontend = Frontend(FrontendConfig(n_filters=6, f_lo=500, f_hi=3000, filter_len=31))
        frames = noise_frames(20).reshape(2, 10, 176)
        inputs = frontend.adaptive_input(frames.reshape(1, 20, 176))
        self.assertEqual(inputs.shape, (1, 20, 5, 176))
        flat = frames.reshape(20, 176)
        for t in (0, 15, 16, 19):
            single = frontend.adaptive_input(flat[t : t + 1])[0]
            nptest.assert_allclose(inputs[0, t], single, rtol=1e-5, atol=1e-7)
        q_start = np.full((2, 5), 2.0)
        window = frontend.forward_window(frames, q_start, inputs=frontend.adaptive_input(frames))
        plain = frontend.forward_window(frames, q_start)
        nptest.assert_allclose(window[-1].q_next.value, plain[-1].q_next.value, rtol=1e-6)


class TestGradients(TestCase):
    def test_one_frame_gradient_wrt_q(self):
        cfg = FrontendConfig(n_filters=6, f_lo=500, f_hi=3000, filter_len=31)
        frontend = Frontend(cfg, seed=1)
        rng = np.random.default_rng(2)
        frames = 0.05 * rng.normal(size=(2, 176))
        w_channels = rng.normal(size=(2, 5, 176))
        w_q = rng.normal(size=(2, 5))

        def loss(t):
            out = frontend.forward_frame(frames, t[0])
            return ops.add(
                ops.sum(ops.mul(out.channels, w_channels)),
                ops.sum(ops.mul(out.q_next, w_q)),
            )

        q = rng.uniform(1.5, 4.0, size=(2, 5))
        self.assertLess(check_gradients(loss, [q]), 1e-4)

    def test_frame_case_covers_controller(self):
        cfg = FrontendConfig(n_filters=6, f_lo=500, f_hi=3000, filter_len=31)
        case = frame_grad_case(cfg, seed=3)
        self.assertEqual(case.op, "frontend_frame")
        self.assertEqual(len(case.values), 5)
        self.assertLess(check_gradients(case.fn, case.values), case.tolerance)

    def test_frame_case_without_controller(self):
        cfg = FrontendConfig.from_preset("frozen_q_baseline", n_filters=6, f_lo=500, f_hi=3000, filter_len=31)
        case = frame_grad_case(cfg)
        self.assertEqual(len(case.values), 1)
        self.assertLess(check_gradients(case.fn, case.values), case.tolerance)

    def test_window_is_recorded(self):
        frontend = Frontend(FrontendConfig(n_filters=6, f_lo=500, f_hi=3000), seed=1)
        frames = noise_frames(4, amplitude=0.1)
        with GradTape() as tape:
            outputs = frontend.forward_window(frames[np.newaxis], np.full((1, 5), 2.0))
            loss = ops.sum(ops.square(outputs[-1].channels))
        grads = backward(tape, loss, frontend.params.tensors())
        self.assertTrue(any(np.any(g != 0) for g in grads.values()))
        self.assertIn("gabor_taps", tape.op_counts())


class TestCheckpoint(TestCase):
    def test_running_stats_round_trip(self):
        frontend = Frontend(seed=5)
        frontend.bn_stats.mean = np.linspace(-1, 1, 39)
        store = ParamStore.from_bytes(frontend.checkpoint().to_bytes())
        restored = Frontend.from_checkpoint(frontend.cfg, store)
        nptest.assert_allclose(restored.bn_stats.mean, frontend.bn_stats.mean, rtol=1e-6)
        self.assertEqual(restored.params.names, frontend.params.names)
        nptest.assert_allclose(
            restored.params["afc.fc1.weight"].value,
            frontend.params["afc.fc1.weight"].value,
            rtol=1e-6,
        )


if __name__ == "__main__":
    unittest.main()

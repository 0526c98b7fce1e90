# coding=utf-8
"""
The adaptive front-end frame loop.

Every frame passes through the fixed Gabor layer, spatial differentiation
and the adaptive Gabor layer. The adaptive layer filters frame t with the Q
computed at frame t - 1, so the content of a frame only ever affects the
filters of later frames.
"""
from typing import List, Optional, Tuple, Union

import numpy as np

from ..audio import Waveform, ensure_16k, frame_length_samples, frame_signal
from ..autodiff import GradCase, ParamStore, Tensor, no_grad, ops
from ..gabor import SubbandTensor, build_bank, conv_same
from .config import ENERGY, ENERGY_FM, FM, LDA_FROM_SPATIAL_DIFF, FrontendConfig
from .controller import INFER, TRAIN, AdaptiveFeedbackController, BatchNormStats, ControllerInput
from .fm import fm_op
from .lda import energy_db_op, lda_q_op, subband_energy_op
from .state import AdaptState
from .trace import QTrace

BN_MEAN = "bn.running_mean"
BN_VAR = "bn.running_var"
# Frames per fixed-layer batch in adaptive_input.
INPUT_CHUNK = 16


class FrameOutput:
    """ Everything computed for one batch of frames.

    Args:
        channels (Tensor): (B, N - k, F) adaptive-layer output after the
            channel alignment, the input of feature extraction.
        adaptive (Tensor): (B, C, F) raw adaptive-layer output.
        energy_db (Tensor): (B, C) energies the level-dependent rule sees.
        q_used (Tensor): (B, C) Q-factors of this frame's adaptive filters.
        q_e (Tensor): (B, C) level-dependent term, zero when disabled.
        q_fm (Tensor): (B, C) controller term, zero when disabled.
        q_next (Tensor): (B, C) Q-factors of the next frame.
    """

    def __init__(self, channels, adaptive, energy_db, q_used, q_e, q_fm, q_next) -> None:
        self.channels = channels
        self.adaptive = adaptive
        self.energy_db = energy_db
        self.q_used = q_used
        self.q_e = q_e
        self.q_fm = q_fm
        self.q_next = q_next

    def __repr__(self) -> str:
        return f"FrameOutput(channels={self.channels.shape})"


class FrontendRun:
    """ Results of running the loop over B frame sequences of T frames.

    Args:
        channels (np.ndarray): B x T x (N - k) x F feature-layer input.
        q (np.ndarray): B x T x C Q-factors used at every frame.
        energy_db (np.ndarray): B x T x C energies. [dB]
        q_e (np.ndarray): B x T x C level-dependent terms.
        q_fm (np.ndarray): B x T x C controller terms.
        channel_centers (np.ndarray): Centers of the N - k feature channels.
        adaptive_centers (np.ndarray): Centers of the C adaptive channels.
        final_state (AdaptState): State after the last frame.
    """

    def __init__(
        self,
        channels: np.ndarray,
        q: np.ndarray,
        energy_db: np.ndarray,
        q_e: np.ndarray,
        q_fm: np.ndarray,
        channel_centers: np.ndarray,
        adaptive_centers: np.ndarray,
        final_state: AdaptState,
    ) -> None:
        self.channels = channels
        self.q = q
        self.energy_db = energy_db
        self.q_e = q_e
        self.q_fm = q_fm
        self.channel_centers = channel_centers
        self.adaptive_centers = adaptive_centers
        self.final_state = final_state

    def subbands(self, item: int = 0) -> SubbandTensor:
        return SubbandTensor(self.channels[item], self.channel_centers)

    def trace(self, item: int = 0) -> QTrace:
        return QTrace(
            self.q[item],
            self.energy_db[item],
            self.adaptive_centers,
            self.q_e[item],
            self.q_fm[item],
        )


def diff_channels_op(x: Tensor, k: int) -> Tensor:
    """ k rounds of x[:, c + 1] - x[:, c] over axis 1, on the tape. """
    for _ in range(k):
        upper = ops.getitem(x, (slice(None), slice(1, None)))
        lower = ops.getitem(x, (slice(None), slice(None, -1)))
        x = ops.sub(upper, lower)
    return x


class Frontend:
    """ Fixed layer, spatial differentiation and adaptive layer with
    frame-by-frame Q updates.

    Args:
        cfg (FrontendConfig): Static configuration; defaults to the 'ada_fe'
            settings.
        params (ParamStore): Trainable parameters. Controller weights are
            created in it when missing.
        seed (int): Seed of the controller weight initialization.
        verbose (bool): Report progress of long runs.
    """

    cfg: FrontendConfig
    params: ParamStore
    controller: Optional[AdaptiveFeedbackController]
    fixed_bank: Optional[np.ndarray]
    adaptive_centers: np.ndarray
    channel_centers: np.ndarray
    frame_size: int
    verbose: bool

    def __init__(
        self,
        cfg: Optional[FrontendConfig] = None,
        params: Optional[ParamStore] = None,
        seed: int = 0,
        verbose: bool = False,
    ) -> None:
        if cfg is None:
            cfg = FrontendConfig()
        if params is None:
            params = ParamStore()
        self.cfg = cfg
        self.params = params
        self.verbose = verbose
        self.controller = (
            AdaptiveFeedbackController(cfg, params, seed) if cfg.afc_enabled else None
        )
        layout = cfg.layout
        if cfg.fixed_layer_enabled:
            self.fixed_bank = build_bank(layout, cfg.fixed_q, cfg.filter_len)
            self.adaptive_centers = layout.diff_centers(cfg.diff_order)
        else:
            self.fixed_bank = None
            self.adaptive_centers = layout.centers
        self.channel_centers = layout.diff_centers(cfg.diff_order)
        self.frame_size = frame_length_samples(cfg.frame_len_ms, cfg.sample_rate)

    def __repr__(self) -> str:
        return f"Frontend(variant={self.cfg.variant}, params={self.params})"

    def _print(self, s: str) -> None:
        if self.verbose:
            print(s)

    @property
    def bn_stats(self) -> Optional[BatchNormStats]:
        return None if self.controller is None else self.controller.bn_stats

    @property
    def dtype(self):
        return self.params.dtype

    def initial_state(self, batch_size: int = 1) -> AdaptState:
        return AdaptState.initial(self.cfg, batch_size, self.bn_stats, self.dtype)

    def adaptive_input(self, frames: np.ndarray) -> np.ndarray:
        """ What the adaptive layer filters: the spatially differentiated
        fixed-layer output (..., N - k, F) of (..., F) frames, or the raw
        frames (..., 1, F) when the fixed layer is disabled. It does not
        depend on Q. """
        frames = np.asarray(frames, dtype=self.dtype)
        if frames.ndim > 2 and frames.shape[-2] > INPUT_CHUNK:
            chunks = [
                self.adaptive_input(frames[..., s : s + INPUT_CHUNK, :])
                for s in range(0, frames.shape[-2], INPUT_CHUNK)
            ]
            return np.concatenate(chunks, axis=-3)
        if self.fixed_bank is None:
            return frames[..., np.newaxis, :]
        fixed = conv_same(frames[..., np.newaxis, :], self.fixed_bank.astype(self.dtype))
        return np.diff(fixed, n=self.cfg.diff_order, axis=-2)

    def _controller_input(self, adaptive: Tensor, adaptive_db: Tensor) -> ControllerInput:
        cfg = self.cfg
        if cfg.afc_input == ENERGY:
            values = adaptive_db
        else:
            fm = fm_op(adaptive, self.adaptive_centers, cfg.sample_rate, cfg.fm_n_fft)
            values = fm if cfg.afc_input == FM else ops.concat([adaptive_db, fm], axis=-1)
        if cfg.detach_controller_input:
            values = values.detach()
        return ControllerInput(values, cfg.afc_input)

    def forward_frame(
        self,
        frames: np.ndarray,
        q: Union[Tensor, np.ndarray],
        mode: str = INFER,
        update_stats: bool = False,
        u: Optional[np.ndarray] = None,
    ) -> FrameOutput:
        """ Process one frame of every sequence in a batch, recording on the
        active tape.

        Args:
            frames (np.ndarray): (B, F) samples.
            q (Tensor or np.ndarray): (B, C) Q-factors of the adaptive layer.
            mode (str): Controller normalization mode, 'train' or 'infer'.
            update_stats (bool): Blend the batch statistics into the
                controller's running statistics ('train' mode only).
            u (np.ndarray): adaptive_input(frames), when already computed.

        Returns:
            FrameOutput: Outputs, Q terms and next-frame Q.
        """
        cfg = self.cfg
        if not isinstance(q, Tensor):
            q = Tensor(np.asarray(q, dtype=self.dtype))
        if u is None:
            u = self.adaptive_input(frames)
        taps = ops.gabor_taps(q, self.adaptive_centers, cfg.filter_len, cfg.sample_rate)
        adaptive = ops.conv_same(Tensor(u), taps)
        if cfg.fixed_layer_enabled:
            channels = adaptive
        else:
            channels = diff_channels_op(adaptive, cfg.diff_order)

        adaptive_db = energy_db_op(subband_energy_op(adaptive))
        if cfg.lda_source == LDA_FROM_SPATIAL_DIFF:
            level_db = energy_db_op(subband_energy_op(Tensor(u)))
        else:
            level_db = adaptive_db

        zeros = Tensor(np.zeros(q.shape, dtype=q.dtype))
        q_e = lda_q_op(level_db, cfg) if cfg.lda_enabled else zeros
        if self.controller is not None:
            inp = self._controller_input(adaptive, adaptive_db)
            q_fm = self.controller(inp, mode, update_stats)
        else:
            q_fm = zeros

        if not cfg.adaptive:
            q_next = q
        else:
            base = q_e if cfg.lda_enabled else cfg.q_init
            q_next = ops.clamp_straight_through(ops.add(base, q_fm), cfg.q_min, cfg.q_max)
        return FrameOutput(channels, adaptive, level_db, q, q_e, q_fm, q_next)

    def step_frame(
        self, frame: np.ndarray, state: AdaptState, u: Optional[np.ndarray] = None
    ) -> Tuple[FrameOutput, AdaptState]:
        """ Inference step: filter one frame with state.q_current and compute
        the Q of the next frame.

        Args:
            frame (np.ndarray): F samples, or (B, F) for a batch.
            state (AdaptState): State before this frame.
            u (np.ndarray): adaptive_input(frame), when already computed.

        Returns:
            Tuple[FrameOutput, AdaptState]: This frame's outputs and the
                state for the next frame.
        """
        frame = np.asarray(frame, dtype=self.dtype)
        if frame.ndim == 1:
            frame = frame[np.newaxis, :]
        if frame.shape != (state.q_current.shape[0], self.frame_size):
            raise ValueError(
                f"Expected frames of shape {(state.q_current.shape[0], self.frame_size)}. "
                f"Got {frame.shape}."
            )
        with no_grad():
            out = self.forward_frame(frame, state.q_current, INFER, u=u)
        return out, state.advance(out.q_next.value, out.q_e.value, out.q_fm.value)

    def run_frames(
        self, frames: np.ndarray, state: Optional[AdaptState] = None
    ) -> FrontendRun:
        """ Inference over whole frame sequences.

        Args:
            frames (np.ndarray): (T, F) frames of one sequence or (B, T, F)
                frames of B sequences of equal length.
            state (AdaptState): State to start from, a fresh one by default.

        Returns:
            FrontendRun: Per-frame outputs of every sequence.
        """
        frames = np.asarray(frames, dtype=self.dtype)
        if frames.ndim == 2:
            frames = frames[np.newaxis]
        if frames.ndim != 3 or frames.shape[1] == 0:
            raise ValueError(f"Expected (B, T, F) frames. Got shape {frames.shape}.")
        n_batch, n_frames, _ = frames.shape
        if state is None:
            state = self.initial_state(n_batch)
        inputs = self.adaptive_input(frames)
        channels, q, energy, q_e, q_fm = [], [], [], [], []
        for t in range(n_frames):
            out, state = self.step_frame(frames[:, t], state, inputs[:, t])
            channels.append(out.channels.value)
            q.append(out.q_used.value)
            energy.append(out.energy_db.value)
            q_e.append(out.q_e.value)
            q_fm.append(out.q_fm.value)
            if (t + 1) % 100 == 0:
                self._print(f"Frame {t + 1} of {n_frames}...")
        return FrontendRun(
            np.stack(channels, axis=1),
            np.stack(q, axis=1),
            np.stack(energy, axis=1),
            np.stack(q_e, axis=1),
            np.stack(q_fm, axis=1),
            self.channel_centers,
            self.adaptive_centers,
            state,
        )

    def forward_window(
        self,
        frames: np.ndarray,
        q_start: np.ndarray,
        mode: str = INFER,
        inputs: Optional[np.ndarray] = None,
    ) -> List[FrameOutput]:
        """ Run a window of frames on the active tape, chaining Q from frame
        to frame. The Q entering the window is a constant, so gradients stop
        at the window boundary.

        Args:
            frames (np.ndarray): (B, W, F) frames.
            q_start (np.ndarray): (B, C) Q-factors of the first frame.
            mode (str): Controller normalization mode.
            inputs (np.ndarray): adaptive_input(frames), (B, W, N - k, F),
                when already computed.

        Returns:
            List[FrameOutput]: One output per frame of the window.
        """
        q = Tensor(np.asarray(q_start, dtype=self.dtype))
        outputs = []
        for t in range(frames.shape[1]):
            u = None if inputs is None else inputs[:, t]
            out = self.forward_frame(frames[:, t], q, mode, u=u)
            outputs.append(out)
            q = out.q_next
        return outputs

    def run_utterance(self, waveform: Waveform) -> Tuple[SubbandTensor, QTrace]:
        """ Frame a waveform and run the loop over it.

        Returns:
            Tuple[SubbandTensor, QTrace]: T x (N - k) x F adaptive-layer
                output and the Q trace.
        """
        frames = frame_signal(ensure_16k(waveform), self.cfg.frame_len_ms)
        self._print(f"Processing {frames.n_frames} frames of {waveform.source_id or 'waveform'}...")
        run = self.run_frames(frames.frames)
        return run.subbands(0), run.trace(0)

    def checkpoint(self) -> ParamStore:
        """ Parameters plus the controller's running statistics, ready to be
        saved. """
        store = self.params.copy()
        if self.controller is not None:
            prefix = self.controller.prefix
            store.add(prefix + BN_MEAN, self.bn_stats.mean)
            store.add(prefix + BN_VAR, self.bn_stats.var)
        return store

    @classmethod
    def from_checkpoint(
        cls, cfg: FrontendConfig, store: ParamStore, verbose: bool = False
    ) -> "Frontend":
        """ Inverse of checkpoint. Parameters of other components (such as
        a classifier) are carried along unchanged. """
        params = ParamStore(np.float64)
        for name in store.names:
            if not name.endswith(BN_MEAN) and not name.endswith(BN_VAR):
                params.add(name, store[name].value)
        frontend = cls(cfg, params, verbose=verbose)
        if frontend.controller is not None:
            prefix = frontend.controller.prefix
            if prefix + BN_MEAN in store:
                frontend.bn_stats.mean = store[prefix + BN_MEAN].value.astype(np.float64)
                frontend.bn_stats.var = store[prefix + BN_VAR].value.astype(np.float64)
        return frontend


FRAME_CASE = "frontend_frame"


def frame_grad_case(
    cfg: Optional[FrontendConfig] = None,
    seed: int = 0,
    batch_size: int = 4,
    tolerance: float = 1e-4,
) -> GradCase:
    """ Gradient check of one training-mode frame, with respect to the Q
    entering the frame and every controller weight.

    The loss weights the channel outputs and the next-frame Q with fixed
    random values, so every path of the frame (fixed layer, Gabor
    re-synthesis, level-dependent rule, controller) contributes.
    """
    if cfg is None:
        cfg = FrontendConfig()
    frontend = Frontend(cfg, ParamStore(np.float64), seed=seed)
    rng = np.random.default_rng(seed)
    frames = 0.05 * rng.normal(size=(batch_size, frontend.frame_size))
    w_channels = rng.normal(size=(batch_size, cfg.n_channels, frontend.frame_size))
    w_q = rng.normal(size=(batch_size, cfg.n_adaptive))
    q = rng.uniform(cfg.q_min + 1.0, cfg.q_max - 1.0, size=(batch_size, cfg.n_adaptive))
    controller = frontend.controller
    names = [] if controller is None else [t.name for t in controller.weights]

    def loss(t):
        if controller is not None:
            controller.params = dict(zip(names, t[1:]))
        out = frontend.forward_frame(frames, t[0], TRAIN)
        return ops.add(
            ops.sum(ops.mul(out.channels, w_channels)),
            ops.sum(ops.mul(out.q_next, w_q)),
        )

    values = [q] + [frontend.params[name].value for name in names]
    return GradCase(FRAME_CASE, loss, values, tolerance)

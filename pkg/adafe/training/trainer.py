# coding=utf-8
"""
Joint training of the feedback controller and the classifier.

Every step runs the front-end twice. The first pass walks the whole crop
without recording, updating the controller's running statistics and
remembering the Q of every frame. The classifier loss is differentiated
with respect to the frame-averaged features; the second pass then replays
the crop window by window on a tape, starting each window from the
remembered Q, and pushes that feature gradient into the controller.
"""
import time
import warnings
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from typing_extensions import TypedDict

from ..autodiff import (
    AdamState,
    DisconnectedGraphWarning,
    GradTape,
    ParamStore,
    Tensor,
    adam_step,
    no_grad,
    ops,
)
from ..audio import frame_signal
from ..base import BaseFrontendObj
from ..features import N_FEATURES_PER_CHANNEL, features_op, flatten_op
from ..frontend import TRAIN, VARIANTS, Frontend, FrontendConfig
from .classifier import Classifier
from .evaluation import EvalReport, evaluate
from .tasks import FS, ToyTask

CLASSIFIER_PREFIX = "clf."
CLF_BN_MEAN = CLASSIFIER_PREFIX + "bn.running_mean"
CLF_BN_VAR = CLASSIFIER_PREFIX + "bn.running_var"


class EpochStats(TypedDict):
    epoch: int
    loss: float
    valid_top1: float
    wall_time: float


class TrainConfig(BaseFrontendObj):
    """ Settings of one training run.

    Args:
        epochs (int): Maximum number of epochs.
        patience (int): Epochs without a better validation top-1 before
            stopping.
        batch_size (int): Clips per optimizer step.
        clip_seconds (float): Length of the random training crop. [s]
        seed (int): Seed of weight initialization, shuffling and cropping.
        bptt_window (int): Frames per gradient window; None backpropagates
            through the whole crop.
        variant (str): Front-end preset used when no FrontendConfig is given.
        learning_rate (float): Adam learning rate.
        weight_decay (float): Decoupled weight decay.
        hidden (int): Hidden width of the classifier.
        segment_seconds (float): Evaluation segment length. [s]
        n_workers (int): Evaluation threads, capped by ADAFE_THREADS.
    """

    epochs: int
    patience: int
    batch_size: int
    clip_seconds: float
    seed: int
    bptt_window: Optional[int]
    variant: str
    learning_rate: float
    weight_decay: float
    hidden: int
    segment_seconds: float
    n_workers: Optional[int]

    def __init__(
        self,
        epochs: int = 150,
        patience: int = 15,
        batch_size: int = 64,
        clip_seconds: float = 1.0,
        seed: int = 0,
        bptt_window: Optional[int] = 8,
        variant: str = "ada_fe",
        learning_rate: float = 1e-3,
        weight_decay: float = 1e-4,
        hidden: int = 128,
        segment_seconds: float = 1.0,
        n_workers: Optional[int] = None,
    ) -> None:
        if batch_size < 1:
            raise ValueError(f"batch_size must be at least 1. Got {batch_size}.")
        if epochs < 1:
            raise ValueError(f"epochs must be at least 1. Got {epochs}.")
        if patience < 1:
            raise ValueError(f"patience must be at least 1. Got {patience}.")
        if bptt_window is not None and bptt_window < 1:
            raise ValueError(f"bptt_window must be at least 1. Got {bptt_window}.")
        if variant not in VARIANTS:
            raise ValueError(f"Unknown variant {variant}. Choose from {VARIANTS}.")
        if clip_seconds <= 0 or segment_seconds <= 0:
            raise ValueError(
                f"Clip and segment lengths must be positive. "
                f"Got {clip_seconds}, {segment_seconds}."
            )
        self.epochs = epochs
        self.patience = patience
        self.batch_size = batch_size
        self.clip_seconds = clip_seconds
        self.seed = seed
        self.bptt_window = bptt_window
        self.variant = variant
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.hidden = hidden
        self.segment_seconds = segment_seconds
        self.n_workers = n_workers

    def replace(self, **overrides) -> "TrainConfig":
        attributes = self._to_dict()
        unknown = set(overrides) - set(attributes)
        if unknown:
            raise KeyError(f"Unknown training settings {sorted(unknown)}.")
        attributes.update(overrides)
        return self._from_dict(attributes)

    def keys(self) -> List[str]:
        return list(self._to_dict().keys())

    def _to_dict(self) -> Dict[str, Any]:
        return {
            "epochs": self.epochs,
            "patience": self.patience,
            "batch_size": self.batch_size,
            "clip_seconds": self.clip_seconds,
            "seed": self.seed,
            "bptt_window": self.bptt_window,
            "variant": self.variant,
            "learning_rate": self.learning_rate,
            "weight_decay": self.weight_decay,
            "hidden": self.hidden,
            "segment_seconds": self.segment_seconds,
            "n_workers": self.n_workers,
        }

    @classmethod
    def _from_dict(cls, attribute_dict: Dict[str, Any]) -> "TrainConfig":
        return cls(**attribute_dict)


class Trainer:
    """ Trains a front-end and a classifier on one task.

    Args:
        task (ToyTask): Task with train, valid and test splits.
        train_cfg (TrainConfig): Training settings.
        frontend_cfg (FrontendConfig): Front-end settings; the preset named
            by train_cfg.variant when omitted.
        verbose (bool): Print one line per epoch.
    """

    task: ToyTask
    train_cfg: TrainConfig
    params: ParamStore
    frontend: Frontend
    classifier: Classifier
    optimizer: AdamState
    rng: np.random.Generator
    curve: List[float]
    train_stats: List[EpochStats]
    verbose: bool

    def __init__(
        self,
        task: ToyTask,
        train_cfg: Optional[TrainConfig] = None,
        frontend_cfg: Optional[FrontendConfig] = None,
        verbose: bool = False,
    ) -> None:
        if train_cfg is None:
            train_cfg = TrainConfig()
        if frontend_cfg is None:
            frontend_cfg = FrontendConfig.from_preset(train_cfg.variant)
        self.task = task
        self.train_cfg = train_cfg
        self.verbose = verbose
        self.params = ParamStore(np.float32)
        self.frontend = Frontend(frontend_cfg, self.params, seed=train_cfg.seed)
        self.classifier = Classifier(
            frontend_cfg.n_channels * N_FEATURES_PER_CHANNEL,
            task.n_classes,
            self.params,
            seed=train_cfg.seed + 1,
            hidden=train_cfg.hidden,
            prefix=CLASSIFIER_PREFIX,
        )
        self.optimizer = AdamState(
            self.params.tensors(),
            lr=train_cfg.learning_rate,
            weight_decay=train_cfg.weight_decay,
        )
        self.rng = np.random.default_rng(train_cfg.seed)
        self.curve = []
        self.train_stats = []

    def __repr__(self) -> str:
        return f"Trainer({self.task}, variant={self.frontend.cfg.variant})"

    def _print(self, s: str) -> None:
        if self.verbose:
            print(s)

    @property
    def frontend_weights(self) -> List[Tensor]:
        if self.frontend.controller is None:
            return []
        return self.frontend.controller.weights

    @property
    def crop_length(self) -> int:
        return int(round(self.train_cfg.clip_seconds * FS))

    def crop_frames(self, indices: Sequence[int], random_crop: bool = True) -> np.ndarray:
        """ Frames of one crop per clip, (B, T, F). Crops start at a random
        offset, or at the first sample with random_crop False; clips shorter
        than the crop are zero-padded. """
        length = self.crop_length
        frames = []
        for i in indices:
            waveform = self.task.clips[i][0]
            start = 0
            if random_crop:
                start = int(self.rng.integers(0, max(len(waveform) - length, 0) + 1))
            frames.append(frame_signal(waveform.crop(start, length), self.frontend.cfg.frame_len_ms).frames)
        return np.stack(frames).astype(self.params.dtype)

    def _pooled(
        self, frames: np.ndarray, inputs: np.ndarray, update_stats: bool
    ) -> Tuple[np.ndarray, List[np.ndarray]]:
        """ Frame-averaged features in training mode, and the Q used at
        every frame. inputs is frontend.adaptive_input(frames). """
        frontend = self.frontend
        n_frames = frames.shape[1]
        q = frontend.initial_state(frames.shape[0]).q_current
        total = None
        q_used = []
        with no_grad():
            for t in range(n_frames):
                out = frontend.forward_frame(frames[:, t], q, TRAIN, update_stats, u=inputs[:, t])
                energies, cm = features_op(out.channels, fs=frontend.cfg.sample_rate)
                flat = flatten_op(energies, cm).value
                total = flat if total is None else total + flat
                q_used.append(q)
                q = out.q_next.value
        return total / n_frames, q_used

    def batch_loss(self, frames: np.ndarray, labels: np.ndarray) -> float:
        """ Cross-entropy of a batch in training mode, without touching
        running statistics or weights. """
        pooled, _ = self._pooled(frames, self.frontend.adaptive_input(frames), update_stats=False)
        with no_grad():
            logits = self.classifier(Tensor(pooled), TRAIN)
            return float(ops.softmax_cross_entropy(logits, labels).value)

    def _frontend_grads(
        self,
        frames: np.ndarray,
        inputs: np.ndarray,
        q_used: List[np.ndarray],
        g_pool: np.ndarray,
    ) -> List[np.ndarray]:
        weights = self.frontend_weights
        grads = [np.zeros_like(p.value) for p in weights]
        if not weights:
            return grads
        n_frames = frames.shape[1]
        window = self.train_cfg.bptt_window or n_frames
        g_pool = (g_pool / n_frames).astype(self.params.dtype)
        for start in range(0, n_frames, window):
            with GradTape() as tape:
                outputs = self.frontend.forward_window(
                    frames[:, start : start + window],
                    q_used[start],
                    TRAIN,
                    inputs[:, start : start + window],
                )
                surrogate = None
                for out in outputs:
                    energies, cm = features_op(out.channels, fs=self.frontend.cfg.sample_rate)
                    term = ops.sum(ops.mul(flatten_op(energies, cm), g_pool))
                    surrogate = term if surrogate is None else ops.add(surrogate, term)
            # One-frame windows never reach the controller.
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", DisconnectedGraphWarning)
                window_grads = tape.backward(surrogate, weights)
            for i, p in enumerate(weights):
                grads[i] += window_grads[p]
        return grads

    def step(self, frames: np.ndarray, labels: np.ndarray) -> float:
        """ One optimizer step on a batch; returns the batch loss. """
        inputs = self.frontend.adaptive_input(frames)
        pooled, q_used = self._pooled(frames, inputs, update_stats=True)
        x = Tensor(pooled, requires_grad=True)
        clf_weights = self.classifier.weights
        with GradTape() as tape:
            loss = ops.softmax_cross_entropy(self.classifier(x, TRAIN, update_stats=True), labels)
        grads = tape.backward(loss, clf_weights + [x])
        by_tensor = {id(p): grads[p] for p in clf_weights}
        fe_weights = self.frontend_weights
        for p, g in zip(fe_weights, self._frontend_grads(frames, inputs, q_used, grads[x])):
            by_tensor[id(p)] = g
        tensors = self.params.tensors()
        adam_step(tensors, [by_tensor.get(id(p)) for p in tensors], self.optimizer)
        return float(loss.value)

    def run_epoch(self) -> float:
        """ One shuffled pass over the training split; returns the mean
        batch loss. """
        indices = self.rng.permutation(self.task.splits["train"])
        labels = np.array([self.task.clips[i][1] for i in indices])
        losses = []
        for start in range(0, len(indices), self.train_cfg.batch_size):
            batch = indices[start : start + self.train_cfg.batch_size]
            losses.append(self.step(self.crop_frames(batch), labels[start : start + len(batch)]))
        return float(np.mean(losses))

    def _snapshot(self) -> Tuple[np.ndarray, list]:
        stats = [self.classifier.bn_stats.copy()]
        if self.frontend.bn_stats is not None:
            stats.append(self.frontend.bn_stats.copy())
        return self.params.flat().copy(), stats

    def _restore(self, snapshot: Tuple[np.ndarray, list]) -> None:
        flat, stats = snapshot
        self.params.set_flat(flat)
        self.classifier.bn_stats = stats[0]
        if self.frontend.controller is not None:
            self.frontend.controller.bn_stats = stats[1]

    def validate(self) -> EvalReport:
        return evaluate(
            self.task,
            self.frontend,
            self.classifier,
            "valid",
            self.train_cfg.segment_seconds,
            self.train_cfg.n_workers,
        )

    def train(self) -> EvalReport:
        """ Train with early stopping on validation top-1 and evaluate the
        best epoch on the test split.

        Raises:
            TaskTooSmall: If a split is empty or lacks a class.
            TestLeakageError: If a clip appears in two splits.
        """
        self.task.validate()
        self.task.check_leakage()
        best_top1, best, stale = -1.0, self._snapshot(), 0
        for epoch in range(1, self.train_cfg.epochs + 1):
            start = time.perf_counter()
            loss = self.run_epoch()
            valid_top1 = self.validate().top1
            self.curve.append(valid_top1)
            self.train_stats.append(
                EpochStats(
                    epoch=epoch,
                    loss=loss,
                    valid_top1=valid_top1,
                    wall_time=time.perf_counter() - start,
                )
            )
            self._print(f"Epoch {epoch}: loss {loss:.4f}, valid top-1 {valid_top1:.3f}")
            if valid_top1 > best_top1:
                best_top1, best, stale = valid_top1, self._snapshot(), 0
            else:
                stale += 1
                if stale >= self.train_cfg.patience:
                    self._print(f"No improvement for {stale} epochs, stopping.")
                    break
        self._restore(best)
        return evaluate(
            self.task,
            self.frontend,
            self.classifier,
            "test",
            self.train_cfg.segment_seconds,
            self.train_cfg.n_workers,
            curve=self.curve,
            seed=self.train_cfg.seed,
            variant=self.frontend.cfg.variant,
            train_stats=self.train_stats,
        )

    def checkpoint(self) -> ParamStore:
        """ Every weight plus the running statistics of both
        normalizations. """
        store = self.frontend.checkpoint()
        store.add(CLF_BN_MEAN, self.classifier.bn_stats.mean)
        store.add(CLF_BN_VAR, self.classifier.bn_stats.var)
        return store


def load_model(frontend_cfg: FrontendConfig, store: ParamStore) -> Tuple[Frontend, Classifier]:
    """ Front-end and classifier from a checkpoint written by
    Trainer.checkpoint, in float64.

    Raises:
        KeyError: If the checkpoint holds no classifier weights.
    """
    frontend = Frontend.from_checkpoint(frontend_cfg, store)
    hidden, n_classes = store[CLASSIFIER_PREFIX + "fc2.weight"].shape
    classifier = Classifier(
        frontend_cfg.n_channels * N_FEATURES_PER_CHANNEL,
        n_classes,
        frontend.params,
        hidden=hidden,
        prefix=CLASSIFIER_PREFIX,
    )
    if CLF_BN_MEAN in store:
        classifier.bn_stats.mean = store[CLF_BN_MEAN].value.astype(np.float64)
        classifier.bn_stats.var = store[CLF_BN_VAR].value.astype(np.float64)
    return frontend, classifier


def train(
    task: ToyTask,
    train_cfg: Optional[TrainConfig] = None,
    frontend_cfg: Optional[FrontendConfig] = None,
    verbose: bool = False,
) -> Tuple[ParamStore, EvalReport]:
    """ Train on a task and report test accuracy.

    Returns:
        Tuple[ParamStore, EvalReport]: Checkpoint of the best epoch and its
            test report.
    """
    trainer = Trainer(task, train_cfg, frontend_cfg, verbose)
    report = trainer.train()
    return trainer.checkpoint(), report


def evaluate_checkpoint(
    task: ToyTask,
    store: ParamStore,
    frontend_cfg: FrontendConfig,
    split: str = "test",
    segment_seconds: float = 1.0,
    n_workers: Optional[int] = None,
) -> EvalReport:
    """ evaluate with a front-end and classifier loaded from a checkpoint. """
    frontend, classifier = load_model(frontend_cfg, store)
    return evaluate(task, frontend, classifier, split, segment_seconds, n_workers)

# coding=utf-8
"""
Whole-clip evaluation by logit averaging over consecutive segments.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.metrics import top_k_accuracy_score

from ..analysis import curve_stability, pooled_q_energy_correlation, summarize_correlation
from ..audio import TARGET_RATE, Waveform, ensure_16k, frame_signal
from ..autodiff import Tensor
from ..base import BaseFrontendObj, worker_count
from ..features import features_op, flatten_op
from ..frontend import Frontend, QTrace
from .classifier import Classifier
from .tasks import ToyTask

# Segments run through the front-end together during evaluation.
SCORE_BATCH = 64


class EvalReport(BaseFrontendObj):
    """ Accuracy and adaptation statistics of a trained model.

    Args:
        top1 (float): Top-1 accuracy.
        top5 (float): Top-5 accuracy, None with fewer than 5 classes.
        curve (List[float]): Validation top-1 after every training epoch.
        q_energy_corr (List[float]): Per-channel correlation between energy
            and next-frame Q over the evaluated clips.
        seed (int): Training seed.
        variant (str): Front-end variant.
        n_clips (int): Number of evaluated clips.
        train_stats (List[Dict[str, Any]]): One entry per training epoch.
    """

    top1: float
    top5: Optional[float]
    curve: List[float]
    q_energy_corr: Optional[List[float]]
    seed: int
    variant: str
    n_clips: int
    train_stats: List[Dict[str, Any]]

    def __init__(
        self,
        top1: float,
        top5: Optional[float] = None,
        curve: Optional[List[float]] = None,
        q_energy_corr: Optional[Sequence[float]] = None,
        seed: int = 0,
        variant: str = "",
        n_clips: int = 0,
        train_stats: Optional[List[Dict[str, Any]]] = None,
    ) -> None:
        if not 0 <= top1 <= 1:
            raise ValueError(f"top1 must lie in [0, 1]. Got {top1}.")
        if top5 is not None and not top1 <= top5 <= 1:
            raise ValueError(f"top5 must lie in [top1, 1]. Got {top5}.")
        self.top1 = float(top1)
        self.top5 = None if top5 is None else float(top5)
        self.curve = [] if curve is None else [float(v) for v in curve]
        self.q_energy_corr = (
            None if q_energy_corr is None else [float(v) for v in q_energy_corr]
        )
        self.seed = seed
        self.variant = variant
        self.n_clips = n_clips
        self.train_stats = [] if train_stats is None else train_stats

    @property
    def epochs(self) -> int:
        return len(self.curve)

    def curve_as_df(self) -> pd.DataFrame:
        return pd.DataFrame(
            {"epoch": np.arange(1, len(self.curve) + 1), "valid_top1": self.curve}
        )

    def train_stats_as_df(self) -> pd.DataFrame:
        return pd.DataFrame(self.train_stats)

    def stability(self) -> Dict[str, float]:
        return curve_stability(self.curve)

    def correlation_summary(self) -> Dict[str, float]:
        if self.q_energy_corr is None:
            return summarize_correlation(np.array([]))
        return summarize_correlation(np.array(self.q_energy_corr))

    def as_row(self) -> Dict[str, Any]:
        """ One results-table row: variant, seed, top1, top5, epochs,
        q_energy_corr_median and the curve stability statistics. """
        stability = self.stability()
        return {
            "variant": self.variant,
            "seed": self.seed,
            "top1": self.top1,
            "top5": np.nan if self.top5 is None else self.top5,
            "epochs": self.epochs,
            "q_energy_corr_median": self.correlation_summary()["median"],
            "curve_variance": stability["variance"],
            "curve_max_drop": stability["max_drop"],
        }

    def _to_dict(self) -> Dict[str, Any]:
        return {
            "top1": self.top1,
            "top5": self.top5,
            "curve": self.curve,
            "q_energy_corr": self.q_energy_corr,
            "seed": self.seed,
            "variant": self.variant,
            "n_clips": self.n_clips,
            "train_stats": self.train_stats,
        }

    @classmethod
    def _from_dict(cls, attribute_dict: Dict[str, Any]) -> "EvalReport":
        return cls(**attribute_dict)


def pooled_features(frontend: Frontend, frames: np.ndarray) -> Tuple[np.ndarray, List[QTrace]]:
    """ Run the front-end over (B, T, F) frames and average the flattened
    frame features over time.

    Returns:
        Tuple[np.ndarray, List[QTrace]]: (B, C * 6) pooled features and the
            Q trace of every sequence.
    """
    run = frontend.run_frames(frames)
    energies, cm = features_op(Tensor(run.channels), fs=frontend.cfg.sample_rate)
    flat = flatten_op(energies, cm).value
    return flat.mean(axis=1), [run.trace(b) for b in range(run.channels.shape[0])]


def segment_frames(
    waveform: Waveform, segment_seconds: float, frame_len_ms: float
) -> np.ndarray:
    """ Frames of every consecutive non-overlapping segment of a clip,
    (S, T, F). A trailing partial segment is dropped unless the clip is
    shorter than one segment, in which case the whole clip is used. """
    waveform = ensure_16k(waveform)
    seg_len = int(round(segment_seconds * TARGET_RATE))
    n_segments = len(waveform) // seg_len
    if n_segments == 0:
        segments = [waveform]
    else:
        segments = [waveform.crop(i * seg_len, seg_len) for i in range(n_segments)]
    return np.stack([frame_signal(s, frame_len_ms).frames for s in segments])


def score_clips(
    frontend: Frontend,
    classifier: Classifier,
    clips: Sequence[Waveform],
    segment_seconds: float = 1.0,
    n_workers: Optional[int] = None,
) -> Tuple[np.ndarray, List[QTrace]]:
    """ Segment-averaged logits of every clip.

    Returns:
        Tuple[np.ndarray, List[QTrace]]: (N, K) scores and the Q traces of
            every evaluated segment.
    """
    segments = [segment_frames(w, segment_seconds, frontend.cfg.frame_len_ms) for w in clips]
    # Segments of equal length from different clips share a batch.
    by_length: Dict[int, List[Tuple[int, int]]] = {}
    for i, frames in enumerate(segments):
        for s in range(len(frames)):
            by_length.setdefault(frames.shape[1], []).append((i, s))
    batches = [
        keys[start : start + SCORE_BATCH]
        for _, keys in sorted(by_length.items())
        for start in range(0, len(keys), SCORE_BATCH)
    ]

    def score(keys):
        frames = np.stack([segments[i][s] for i, s in keys])
        pooled, traces = pooled_features(frontend, frames)
        return classifier.predict(pooled), traces

    with ThreadPoolExecutor(max_workers=worker_count(n_workers)) as executor:
        results = list(executor.map(score, batches))
    logits, traces = {}, {}
    for keys, (batch_logits, batch_traces) in zip(batches, results):
        for key, row, trace in zip(keys, batch_logits, batch_traces):
            logits[key] = row
            traces[key] = trace
    scores = np.stack(
        [np.mean([logits[(i, s)] for s in range(len(f))], axis=0) for i, f in enumerate(segments)]
    ).astype(np.float64)
    ordered = [traces[(i, s)] for i, f in enumerate(segments) for s in range(len(f))]
    return scores, ordered


def accuracy(labels: np.ndarray, scores: np.ndarray, k: int) -> float:
    """ Top-k accuracy of (N, K) scores. """
    if scores.shape[1] == 2:
        # top_k_accuracy_score wants 1-D scores for two classes.
        return 1.0 if k >= 2 else float(np.mean(scores.argmax(axis=1) == labels))
    return float(
        top_k_accuracy_score(labels, scores, k=k, labels=np.arange(scores.shape[1]))
    )


def report_from_scores(
    labels: np.ndarray,
    scores: np.ndarray,
    traces: Optional[Sequence[QTrace]] = None,
    **kwargs,
) -> EvalReport:
    """ EvalReport of (N, K) scores; top5 is left out with fewer than five
    classes. """
    n_classes = scores.shape[1]
    top1 = accuracy(labels, scores, 1)
    top5 = accuracy(labels, scores, 5) if n_classes >= 5 else None
    corr = None
    if traces:
        corr = pooled_q_energy_correlation(traces, lag=1)
    return EvalReport(top1, top5, q_energy_corr=corr, n_clips=len(labels), **kwargs)


def evaluate(
    task: ToyTask,
    frontend: Frontend,
    classifier: Classifier,
    split: str = "test",
    segment_seconds: float = 1.0,
    n_workers: Optional[int] = None,
    **kwargs,
) -> EvalReport:
    """ Whole-clip accuracy on a split of a task.

    Each clip is cut into consecutive non-overlapping segments; the logits
    of the segments are averaged before ranking.

    Args:
        task (ToyTask): Task to evaluate on.
        frontend (Frontend): Trained front-end, run in inference mode.
        classifier (Classifier): Trained classifier.
        split (str): Split to evaluate.
        segment_seconds (float): Segment length. [s]
        n_workers (int): Threads, capped by ADAFE_THREADS.
        kwargs: Passed on to EvalReport (curve, seed, variant, ...).

    Returns:
        EvalReport: Accuracies and the pooled Q-energy correlation.
    """
    clips = [w for w, _ in task.split(split)]
    scores, traces = score_clips(frontend, classifier, clips, segment_seconds, n_workers)
    kwargs.setdefault("variant", frontend.cfg.variant)
    traces = traces if frontend.cfg.adaptive else None
    return report_from_scores(task.labels(split), scores, traces, **kwargs)

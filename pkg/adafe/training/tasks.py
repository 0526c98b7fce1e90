# coding=utf-8
"""
Seeded synthetic classification tasks.

Every clip is generated from its own child seed, so a task is identical
whatever the number of worker threads.
"""
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence, Set, Tuple, Union, TextIO

import numpy as np
import pandas as pd
from scipy import signal

from ..audio import Waveform
from ..base import NpEncoder, worker_count

FS = 16000
# Largest absolute sample value of a generated clip.
PEAK_LIMIT = 0.999
SPLITS = ("train", "valid", "test")
LOUDNESS_TONES = "loudness_tones"
CHIRP_CLASSES = "chirp_classes"
NOISY_VOWELS = "noisy_vowels"
TASK_KINDS = (LOUDNESS_TONES, CHIRP_CLASSES, NOISY_VOWELS)

TONE_FREQS = np.geomspace(300.0, 4800.0, 8)
CHIRP_NAMES = ["up", "down", "flat", "fast_up", "fast_down"]
# First and second formant of each vowel. [Hz]
VOWEL_FORMANTS = {"a": (730.0, 1090.0), "i": (270.0, 2290.0), "u": (300.0, 870.0), "ae": (660.0, 1720.0)}
FORMANT_BANDWIDTHS = (90.0, 110.0)


class TaskTooSmall(ValueError):
    """ Raised when a split is empty or misses a class. """


class TestLeakageError(RuntimeError):
    """ Raised when the same clip appears in two splits. """


def level_db(samples: np.ndarray) -> float:
    """ RMS level relative to a full-scale sine. [dB FS] """
    rms = np.sqrt(np.mean(np.asarray(samples, dtype=np.float64) ** 2))
    return float(20 * np.log10(rms * np.sqrt(2) + 1e-300))


def clip_hash(waveform: Waveform) -> str:
    return hashlib.sha256(waveform.samples.astype("<f4").tobytes()).hexdigest()


class ToyTask:
    """ A labelled clip collection with fixed train/valid/test splits.

    Args:
        name (str): Task kind.
        classes (List[str]): Class names; label i is classes[i].
        clips (List[Tuple[Waveform, int]]): Every clip with its label.
        splits (Dict[str, np.ndarray]): Clip indices of each split.
        generator_seed (int): Seed the clips were generated from.
        clip_params (List[Dict[str, Any]]): Generator parameters of each clip.
    """

    name: str
    classes: List[str]
    clips: List[Tuple[Waveform, int]]
    splits: Dict[str, np.ndarray]
    generator_seed: int
    clip_params: List[Dict[str, Any]]

    def __init__(
        self,
        name: str,
        classes: List[str],
        clips: List[Tuple[Waveform, int]],
        splits: Dict[str, np.ndarray],
        generator_seed: int = 0,
        clip_params: Optional[List[Dict[str, Any]]] = None,
    ) -> None:
        self.name = name
        self.classes = list(classes)
        self.clips = clips
        self.splits = {k: np.asarray(v, dtype=int) for k, v in splits.items()}
        self.generator_seed = generator_seed
        self.clip_params = clip_params if clip_params is not None else [{} for _ in clips]

    def __repr__(self) -> str:
        sizes = ", ".join(f"{k}={len(v)}" for k, v in self.splits.items())
        return f"ToyTask({self.name}, {self.n_classes} classes, {sizes})"

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def split(self, name: str) -> List[Tuple[Waveform, int]]:
        return [self.clips[i] for i in self.splits[name]]

    def labels(self, name: str) -> np.ndarray:
        return np.array([self.clips[i][1] for i in self.splits[name]], dtype=int)

    def validate(self) -> None:
        """ Check that every split holds every class.

        Raises:
            TaskTooSmall: If a split is missing, empty or lacks a class.
        """
        for name in SPLITS:
            if name not in self.splits or len(self.splits[name]) == 0:
                raise TaskTooSmall(f"Split {name} of task {self.name} is empty.")
            missing = set(range(self.n_classes)) - set(self.labels(name))
            if missing:
                raise TaskTooSmall(
                    f"Split {name} of task {self.name} has no clips of classes "
                    f"{sorted(missing)}."
                )

    def split_hashes(self) -> Dict[str, Set[str]]:
        """ SHA-256 digests of the float32 samples of every clip, per split. """
        return {
            name: {clip_hash(self.clips[i][0]) for i in indices}
            for name, indices in self.splits.items()
        }

    def split_digest(self, name: str) -> str:
        """ One digest identifying the clip set of a split. """
        return hashlib.sha256("".join(sorted(self.split_hashes()[name])).encode()).hexdigest()

    def check_leakage(self) -> None:
        """ Raises:
            TestLeakageError: If any clip appears in two splits.
        """
        hashes = self.split_hashes()
        names = list(hashes)
        for i, first in enumerate(names):
            for second in names[i + 1 :]:
                shared = hashes[first] & hashes[second]
                if shared:
                    raise TestLeakageError(
                        f"{len(shared)} clips appear in both {first} and {second}."
                    )

    def manifest_as_df(self) -> pd.DataFrame:
        """ One row per clip: clip_id, label, class_name, split and the
        generator parameters as JSON. """
        split_of = {}
        for name, indices in self.splits.items():
            for i in indices:
                split_of[int(i)] = name
        rows = []
        for i, (waveform, label) in enumerate(self.clips):
            rows.append(
                {
                    "clip_id": waveform.source_id,
                    "label": label,
                    "class_name": self.classes[label],
                    "split": split_of.get(i),
                    "params": json.dumps(self.clip_params[i], cls=NpEncoder, sort_keys=True),
                }
            )
        return pd.DataFrame(rows)

    def write_manifest(self, path_or_buf: Union[str, TextIO]) -> None:
        """ JSON manifest: task name, seed, classes and one record per clip. """
        df = self.manifest_as_df()
        records = []
        for row, params in zip(df.to_dict("records"), self.clip_params):
            row["params"] = params
            records.append(row)
        document = {
            "task": self.name,
            "generator_seed": self.generator_seed,
            "classes": self.classes,
            "clips": records,
        }
        if isinstance(path_or_buf, str):
            with open(path_or_buf, "w") as f:
                json.dump(document, f, cls=NpEncoder, indent=2)
                f.write("\n")
        else:
            json.dump(document, path_or_buf, cls=NpEncoder, indent=2)


def _white_noise(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n)


def _mix(
    clean: np.ndarray,
    rng: np.random.Generator,
    level_range_db: Tuple[float, float],
    snr_range_db: Tuple[float, float],
) -> Tuple[np.ndarray, Dict[str, Any]]:
    """ Add white noise at a random SNR, then scale the mixture to a random
    level. Mixtures whose peak would leave [-1, 1] are turned down until it
    fits, so the recorded level_db is the level actually reached.
    """
    snr = rng.uniform(*snr_range_db)
    target = rng.uniform(*level_range_db)
    noise = _white_noise(rng, len(clean))
    noise *= np.sqrt(np.mean(clean ** 2) / np.mean(noise ** 2) / 10 ** (snr / 10))
    mixture = clean + noise
    mixture *= 10 ** ((target - level_db(mixture)) / 20)
    peak = np.max(np.abs(mixture))
    if peak > PEAK_LIMIT:
        mixture *= PEAK_LIMIT / peak
    return mixture, {
        "snr_db": snr,
        "target_level_db": target,
        "level_db": level_db(mixture),
        "peak_limited": bool(peak > PEAK_LIMIT),
    }


def _tone(label: int, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, Dict[str, float]]:
    freq = TONE_FREQS[label]
    phase = rng.uniform(0, 2 * np.pi)
    return np.sin(2 * np.pi * freq * np.arange(n) / FS + phase), {"freq_hz": freq}


def _chirp(label: int, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, Dict[str, float]]:
    name = CHIRP_NAMES[label]
    low = rng.uniform(400, 800)
    high = rng.uniform(2500, 3500)
    t = np.arange(n) / n
    if name == "flat":
        f_inst = np.full(n, rng.uniform(low, high))
    else:
        sweeps = 4 if name.startswith("fast") else 1
        ramp = (t * sweeps) % 1.0
        if name.endswith("down"):
            ramp = 1 - ramp
        f_inst = low + (high - low) * ramp
    phase = 2 * np.pi * np.cumsum(f_inst) / FS + rng.uniform(0, 2 * np.pi)
    return np.sin(phase), {"low_hz": low, "high_hz": high, "shape": name}


def _vowel(label: int, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, Dict[str, float]]:
    name = list(VOWEL_FORMANTS)[label]
    f0 = rng.uniform(100, 200)
    formants = [f * rng.uniform(0.95, 1.05) for f in VOWEL_FORMANTS[name]]
    source = np.zeros(n)
    source[(np.arange(0, n, FS / f0)).astype(int)] = 1.0
    out = np.zeros(n)
    for freq, bandwidth in zip(formants, FORMANT_BANDWIDTHS):
        radius = np.exp(-np.pi * bandwidth / FS)
        denominator = [1, -2 * radius * np.cos(2 * np.pi * freq / FS), radius ** 2]
        out += signal.lfilter([1 - radius], denominator, source)
    return out, {"f0_hz": f0, "f1_hz": formants[0], "f2_hz": formants[1], "vowel": name}


GENERATORS: Dict[str, Tuple[List[str], Callable]] = {
    LOUDNESS_TONES: ([f"tone_{f:.0f}hz" for f in TONE_FREQS], _tone),
    CHIRP_CLASSES: (CHIRP_NAMES, _chirp),
    NOISY_VOWELS: (list(VOWEL_FORMANTS), _vowel),
}


def gen_synthetic_task(
    kind: str,
    seed: int = 0,
    n_train: int = 600,
    n_valid: int = 100,
    n_test: int = 100,
    clip_seconds: float = 1.0,
    level_range_db: Sequence[float] = (-40.0, 0.0),
    snr_range_db: Sequence[float] = (0.0, 30.0),
    n_workers: Optional[int] = None,
) -> ToyTask:
    """ Generate a class-balanced synthetic task.

    Split sizes are rounded down to a multiple of the number of classes, so
    loudness_tones with the default sizes has 600 / 96 / 96 clips.

    Args:
        kind (str): 'loudness_tones' (8 tone frequencies), 'chirp_classes'
            (5 sweep shapes) or 'noisy_vowels' (4 two-formant vowels).
        seed (int): Generator seed.
        n_train (int): Requested training clips.
        n_valid (int): Requested validation clips.
        n_test (int): Requested test clips.
        clip_seconds (float): Clip duration. [s]
        level_range_db (Sequence[float]): Range of the uniform clip level.
            [dB FS]
        snr_range_db (Sequence[float]): Range of the uniform white-noise
            SNR. [dB]
        n_workers (int): Generator threads, capped by ADAFE_THREADS.

    Returns:
        ToyTask: The generated task.

    Raises:
        ValueError: If kind is unknown, clip_seconds is not positive or the
            level range is not increasing.
    """
    if kind not in GENERATORS:
        raise ValueError(f"Unknown task kind {kind}. Choose from {TASK_KINDS}.")
    classes, generate = GENERATORS[kind]
    n_classes = len(classes)
    counts = [n // n_classes * n_classes for n in (n_train, n_valid, n_test)]
    n_samples = int(round(clip_seconds * FS))
    if n_samples <= 0:
        raise ValueError(f"clip_seconds must be positive. Got {clip_seconds}.")
    level_range_db = tuple(float(v) for v in level_range_db)
    if not level_range_db[0] < level_range_db[1]:
        raise ValueError(f"Expected an increasing level range. Got {level_range_db}.")
    snr_range_db = tuple(float(v) for v in snr_range_db)

    jobs = []
    splits = {}
    for name, count in zip(SPLITS, counts):
        splits[name] = np.arange(len(jobs), len(jobs) + count)
        jobs.extend((name, i, i % n_classes) for i in range(count))
    seeds = np.random.SeedSequence(seed).spawn(len(jobs))

    def make(job):
        (split, i, label), child = job
        rng = np.random.default_rng(child)
        clean, params = generate(label, n_samples, rng)
        samples, mix_params = _mix(clean, rng, level_range_db, snr_range_db)
        params.update(mix_params)
        return (Waveform(samples, FS, f"{kind}-{split}-{i:04d}"), label), params

    with ThreadPoolExecutor(max_workers=worker_count(n_workers)) as executor:
        results = list(executor.map(make, zip(jobs, seeds)))
    clips = [clip for clip, _ in results]
    params = [p for _, p in results]
    return ToyTask(kind, classes, clips, splits, seed, params)

from .tasks import (
    ToyTask,
    gen_synthetic_task,
    TaskTooSmall,
    TestLeakageError,
    TASK_KINDS,
    LOUDNESS_TONES,
    CHIRP_CLASSES,
    NOISY_VOWELS,
    SPLITS,
    level_db,
    clip_hash,
)
from .classifier import Classifier
from .evaluation import (
    EvalReport,
    evaluate,
    score_clips,
    segment_frames,
    pooled_features,
    report_from_scores,
    accuracy,
)
from .trainer import TrainConfig, Trainer, EpochStats, train, load_model, evaluate_checkpoint
from .ablation import (
    ablation_matrix,
    summarize_runs,
    write_ablation,
    RUN_COLUMNS,
    RUNS_FILE,
    SUMMARY_FILE,
)

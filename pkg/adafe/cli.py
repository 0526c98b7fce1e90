# coding=utf-8
"""
Command-line interface: feature extraction, inspection dumps, toy-task
training and evaluation, the ablation matrix and the gradient suite.

Exit codes: 0 success, 1 failed check, 2 partial batch failure, 64 usage
error.
"""
import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .audio import encode_wav, load_audio
from .autodiff import OPS, ParamStore, inject_fault, run_suite
from .base import NpEncoder, worker_count
from .features import sequence_features, write_feature_csv, write_feature_file
from .frontend import VARIANTS, Frontend, FrontendConfig, frame_grad_case
from .frontend.trace import CSV_FLOAT_FORMAT
from .gabor import gabor_kernel, response_table
from .training import (
    LOUDNESS_TONES,
    TASK_KINDS,
    TrainConfig,
    ablation_matrix,
    evaluate_checkpoint,
    gen_synthetic_task,
    train,
    write_ablation,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARTIAL = 2
EXIT_USAGE = 64

COMMANDS = (
    "extract",
    "dump-filters",
    "dump-qtrace",
    "synth-task",
    "train",
    "eval",
    "ablate",
    "gradcheck",
)
EFFECTIVE_CONFIG = "effective_config.json"
ERROR_LOG = "errors.log"
CHECKPOINT_FILE = "params.adfp"
TASK_DEFAULTS = {
    "task": LOUDNESS_TONES,
    "task_seed": None,
    "n_train": 600,
    "n_valid": 100,
    "n_test": 100,
    "level_range_db": [-40.0, 0.0],
    "snr_range_db": [0.0, 30.0],
}


class UsageError(Exception):
    """ Raised for invalid command-line arguments or configuration. """


class CliParser(argparse.ArgumentParser):
    """ ArgumentParser that exits with the usage-error code. """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_override(text: str) -> Tuple[str, Any]:
    """ Split key=value; the value is read as JSON when it parses, as a
    plain string otherwise. """
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise UsageError(f"Overrides must look like key=value. Got {text!r}.")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


class CliConfig:
    """ One invocation's command and configuration sources.

    Settings come from the --config JSON object, then the --set overrides,
    then --seed. Every key must name a front-end, training or task setting;
    'variant' picks the front-end preset the other front-end settings are
    applied to.

    Args:
        command (str): Subcommand name.
        config_path (str): JSON file of key-value settings.
        overrides (List[str]): key=value strings.
        output_path (str): Output directory.
        seed (int): Seed for task generation, weight initialization and
            training.
    """

    command: str
    config_path: Optional[str]
    overrides: List[str]
    output_path: Optional[str]
    seed: Optional[int]

    def __init__(
        self,
        command: str,
        config_path: Optional[str] = None,
        overrides: Optional[Sequence[str]] = None,
        output_path: Optional[str] = None,
        seed: Optional[int] = None,
    ) -> None:
        if command not in COMMANDS:
            raise UsageError(f"Unknown command {command}.")
        self.command = command
        self.config_path = config_path
        self.overrides = list(overrides or [])
        self.output_path = output_path
        self.seed = seed

    def settings(self) -> Dict[str, Any]:
        """ Merged key-value settings.

        Raises:
            UsageError: If the config file is unreadable or not an object,
                or a key names no known setting.
        """
        settings: Dict[str, Any] = {}
        if self.config_path is not None:
            try:
                with open(self.config_path) as f:
                    loaded = json.load(f)
            except (OSError, json.JSONDecodeError) as e:
                raise UsageError(f"Cannot read config {self.config_path}: {e}") from e
            if not isinstance(loaded, dict):
                raise UsageError(f"Config {self.config_path} must hold a JSON object.")
            settings.update(loaded)
        settings.update(parse_override(o) for o in self.overrides)
        if self.seed is not None:
            settings["seed"] = self.seed
        known = set(FrontendConfig().keys()) | set(TrainConfig().keys()) | set(TASK_DEFAULTS)
        unknown = set(settings) - known
        if unknown:
            raise UsageError(f"Unknown settings {sorted(unknown)}.")
        return settings

    def resolve(self) -> Tuple[FrontendConfig, TrainConfig, Dict[str, Any]]:
        """ Front-end, training and task settings of this invocation.

        Raises:
            UsageError: If a setting is unknown or invalid.
        """
        settings = self.settings()
        variant = settings.get("variant", "ada_fe")
        frontend_keys = set(FrontendConfig().keys()) - {"variant"}
        train_keys = set(TrainConfig().keys()) - {"variant"}
        task = dict(TASK_DEFAULTS)
        task.update({k: v for k, v in settings.items() if k in TASK_DEFAULTS})
        if task["task"] not in TASK_KINDS:
            raise UsageError(f"Unknown task {task['task']}. Choose from {TASK_KINDS}.")
        try:
            frontend_cfg = FrontendConfig.from_preset(
                variant, **{k: v for k, v in settings.items() if k in frontend_keys}
            )
            train_cfg = TrainConfig(
                variant=variant, **{k: v for k, v in settings.items() if k in train_keys}
            )
        except (TypeError, ValueError) as e:
            raise UsageError(str(e)) from e
        if task["task_seed"] is None:
            task["task_seed"] = train_cfg.seed
        return frontend_cfg, train_cfg, task

    def effective(self) -> Dict[str, Any]:
        frontend_cfg, train_cfg, task = self.resolve()
        return {
            "command": self.command,
            "frontend": frontend_cfg._to_dict(),
            "train": train_cfg._to_dict(),
            "task": task,
        }

    def write_effective(self) -> None:
        """ Echo the effective configuration into the output directory. """
        if self.output_path is None:
            return
        os.makedirs(self.output_path, exist_ok=True)
        with open(os.path.join(self.output_path, EFFECTIVE_CONFIG), "w") as f:
            json.dump(self.effective(), f, cls=NpEncoder, indent=2, sort_keys=True)
            f.write("\n")


def _make_task(task: Dict[str, Any], train_cfg: TrainConfig):
    return gen_synthetic_task(
        task["task"],
        task["task_seed"],
        task["n_train"],
        task["n_valid"],
        task["n_test"],
        train_cfg.clip_seconds,
        task["level_range_db"],
        task["snr_range_db"],
        train_cfg.n_workers,
    )


def _load_frontend(args, frontend_cfg: FrontendConfig, seed: int) -> Frontend:
    if getattr(args, "params", None):
        return Frontend.from_checkpoint(frontend_cfg, ParamStore.load(args.params))
    return Frontend(frontend_cfg, seed=seed)


def _require_output(args) -> str:
    if not args.output:
        raise UsageError(f"{args.command} needs --output.")
    os.makedirs(args.output, exist_ok=True)
    return args.output


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def cmd_extract(args, cli: CliConfig) -> int:
    """ One feature file per input, plus a CSV with --csv. Failed inputs are
    listed in errors.log and do not stop the batch. """
    out_dir = _require_output(args)
    frontend_cfg, train_cfg, _ = cli.resolve()
    frontend = _load_frontend(args, frontend_cfg, train_cfg.seed)

    def extract(path):
        try:
            subbands, _ = frontend.run_utterance(load_audio(path))
            features = sequence_features(subbands)
            write_feature_file(features, os.path.join(out_dir, _stem(path) + ".adft"))
            if args.csv:
                write_feature_csv(features, os.path.join(out_dir, _stem(path) + ".csv"))
        except (OSError, RuntimeError, ValueError) as e:
            return f"{path}: {type(e).__name__}: {e}"
        return None

    with ThreadPoolExecutor(max_workers=worker_count()) as executor:
        errors = [e for e in executor.map(extract, args.inputs) if e is not None]
    if errors:
        with open(os.path.join(out_dir, ERROR_LOG), "w") as f:
            f.write("\n".join(errors) + "\n")
        for line in errors:
            print(line, file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_dump_filters(args, cli: CliConfig) -> int:
    """ Unnormalized responses of Gabor filters at one center frequency. """
    out_dir = _require_output(args)
    frontend_cfg, _, _ = cli.resolve()
    try:
        qs = [float(q) for q in args.q.split(",")]
    except ValueError as e:
        raise UsageError(f"--q takes comma-separated numbers. Got {args.q!r}.") from e
    filters = {
        f"q{q:g}": gabor_kernel(args.fc, q, args.taps or frontend_cfg.filter_len, frontend_cfg.sample_rate)
        for q in qs
    }
    table = response_table(filters, args.points, frontend_cfg.sample_rate)
    table.to_csv(os.path.join(out_dir, "filters.csv"), index=False, float_format=CSV_FLOAT_FORMAT)
    frontend_cfg.layout.as_df(frontend_cfg.diff_order).to_csv(
        os.path.join(out_dir, "channels.csv"), index=False, float_format=CSV_FLOAT_FORMAT
    )
    return EXIT_OK


def cmd_dump_qtrace(args, cli: CliConfig) -> int:
    """ Frame-by-frame Q, energy and Q terms of one input. """
    out_dir = _require_output(args)
    frontend_cfg, train_cfg, _ = cli.resolve()
    frontend = _load_frontend(args, frontend_cfg, train_cfg.seed)
    try:
        waveform = load_audio(args.input)
    except (OSError, ValueError) as e:
        print(f"{args.input}: {e}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    _, trace = frontend.run_utterance(waveform)
    trace.to_csv(os.path.join(out_dir, _stem(args.input) + "_qtrace.csv"), components=True)
    return EXIT_OK


def cmd_synth_task(args, cli: CliConfig) -> int:
    """ Generate a task and write its manifest, and the clips with --audio. """
    out_dir = _require_output(args)
    _, train_cfg, task_settings = cli.resolve()
    task = _make_task(task_settings, train_cfg)
    task.write_manifest(os.path.join(out_dir, "manifest.json"))
    if args.audio:
        clip_dir = os.path.join(out_dir, "clips")
        os.makedirs(clip_dir, exist_ok=True)
        for waveform, _ in task.clips:
            with open(os.path.join(clip_dir, waveform.source_id + ".wav"), "wb") as f:
                f.write(encode_wav(waveform, subtype="FLOAT"))
    return EXIT_OK


def _write_report(report, out_dir: str) -> None:
    report.to_json(os.path.join(out_dir, "report.json"))
    report.curve_as_df().to_csv(
        os.path.join(out_dir, "curve.csv"), index=False, float_format=CSV_FLOAT_FORMAT
    )


def cmd_train(args, cli: CliConfig) -> int:
    out_dir = _require_output(args)
    frontend_cfg, train_cfg, task_settings = cli.resolve()
    task = _make_task(task_settings, train_cfg)
    store, report = train(task, train_cfg, frontend_cfg, verbose=args.verbose)
    store.save(os.path.join(out_dir, CHECKPOINT_FILE))
    _write_report(report, out_dir)
    if report.train_stats:
        report.train_stats_as_df().to_csv(
            os.path.join(out_dir, "train_stats.csv"), index=False, float_format=CSV_FLOAT_FORMAT
        )
    print(f"test top-1 {report.top1:.4f} after {report.epochs} epochs")
    return EXIT_OK


def cmd_eval(args, cli: CliConfig) -> int:
    out_dir = _require_output(args)
    frontend_cfg, train_cfg, task_settings = cli.resolve()
    task = _make_task(task_settings, train_cfg)
    report = evaluate_checkpoint(
        task,
        ParamStore.load(args.params),
        frontend_cfg,
        args.split,
        train_cfg.segment_seconds,
        train_cfg.n_workers,
    )
    _write_report(report, out_dir)
    print(f"{args.split} top-1 {report.top1:.4f}")
    return EXIT_OK


def cmd_ablate(args, cli: CliConfig) -> int:
    out_dir = _require_output(args)
    _, train_cfg, task_settings = cli.resolve()
    try:
        seeds = [int(s) for s in args.seeds.split(",")]
    except ValueError as e:
        raise UsageError(f"--seeds takes comma-separated integers. Got {args.seeds!r}.") from e
    settings = cli.settings()
    overrides = {
        k: v for k, v in settings.items() if k in set(FrontendConfig().keys()) - {"variant"}
    }
    task = _make_task(task_settings, train_cfg)
    runs, summary = ablation_matrix(
        task, seeds, train_cfg, VARIANTS, overrides, verbose=args.verbose
    )
    write_ablation(runs, summary, out_dir)
    return EXIT_OK


def cmd_gradcheck(args, cli: CliConfig) -> int:
    """ Every registered op plus one full front-end frame against central
    differences; prints the worst relative error of each. """
    frontend_cfg, train_cfg, _ = cli.resolve()
    if args.corrupt_op is not None and args.corrupt_op not in OPS:
        raise UsageError(f"Unknown op {args.corrupt_op}.")
    extra = [frame_grad_case(frontend_cfg, train_cfg.seed)]
    if args.corrupt_op is not None:
        with inject_fault(args.corrupt_op):
            report = run_suite(extra, train_cfg.seed)
    else:
        report = run_suite(extra, train_cfg.seed)
    for row in report.itertuples():
        status = "ok" if row.passed else "FAILED"
        print(f"{row.op:<24} {row.max_rel_error:.3e}  {status}")
    if args.output:
        os.makedirs(args.output, exist_ok=True)
        report.to_csv(
            os.path.join(args.output, "gradcheck.csv"), index=False, float_format=CSV_FLOAT_FORMAT
        )
    failed = report.loc[~report["passed"], "op"].tolist()
    if failed:
        print(f"Gradient check failed for: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    return EXIT_OK


HANDLERS = {
    "extract": cmd_extract,
    "dump-filters": cmd_dump_filters,
    "dump-qtrace": cmd_dump_qtrace,
    "synth-task": cmd_synth_task,
    "train": cmd_train,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "gradcheck": cmd_gradcheck,
}


def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--config", help="JSON file of key-value settings.")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override one setting; repeatable.",
    )
    common.add_argument("--output", "-o", help="Output directory.")
    common.add_argument("--seed", type=int, help="Seed of every random choice.")
    common.add_argument("--verbose", "-v", action="store_true", help="Report progress.")

    parser = CliParser(
        prog="adafe", description="Adaptive Gabor filterbank front-end."
    )
    commands = parser.add_subparsers(dest="command", metavar="command", required=True)

    p = commands.add_parser("extract", parents=[common], help="Write feature files.")
    p.add_argument("inputs", nargs="+", help="WAV or ADFE raw audio files.")
    p.add_argument("--params", help="Front-end checkpoint.")
    p.add_argument("--csv", action="store_true", help="Also write long-format CSVs.")

    p = commands.add_parser("dump-filters", parents=[common], help="Write filter responses.")
    p.add_argument("--fc", type=float, default=3000.0, help="Center frequency in Hz.")
    p.add_argument("--q", default="1.5,2.0,2.5", help="Comma-separated Q-factors.")
    p.add_argument("--taps", type=int, help="Filter length; filter_len by default.")
    p.add_argument("--points", type=int, default=512, help="Frequency grid size.")

    p = commands.add_parser("dump-qtrace", parents=[common], help="Write a Q trace.")
    p.add_argument("input", help="WAV or ADFE raw audio file.")
    p.add_argument("--params", help="Front-end checkpoint.")

    p = commands.add_parser("synth-task", parents=[common], help="Generate a toy task.")
    p.add_argument("--audio", action="store_true", help="Also write every clip as WAV.")

    commands.add_parser("train", parents=[common], help="Train on a toy task.")

    p = commands.add_parser("eval", parents=[common], help="Evaluate a checkpoint.")
    p.add_argument("--params", required=True, help="Checkpoint written by train.")
    p.add_argument("--split", default="test", choices=("train", "valid", "test"))

    p = commands.add_parser("ablate", parents=[common], help="Run every variant and seed.")
    p.add_argument("--seeds", default="0,1,2", help="Comma-separated seeds.")

    p = commands.add_parser("gradcheck", parents=[common], help="Run the gradient suite.")
    p.add_argument("--corrupt-op", help=argparse.SUPPRESS)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cli = CliConfig(args.command, args.config, args.overrides, args.output, args.seed)
    try:
        cli.write_effective()
        return HANDLERS[args.command](args, cli)
    except UsageError as e:
        print(f"adafe {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())

"""
Command-line entry point.

    gafdetect gendata --bars 200000 --out raw.csv
    gafdetect build-dataset --input-csv raw.csv --out-dir data/
    gafdetect build-dataset --seed 7 --bars 200000 --out-dir data/
    gafdetect train --dataset data/ --epochs 300
    gafdetect eval --dataset data/ --checkpoint data/model.ckpt
    gafdetect detect --input stream.csv --checkpoint data/model.ckpt --out detections.csv
    gafdetect render --dataset data/ --index 0 --out chart.svg

Usage errors exit with 2, pipeline errors with 1.
"""

from dataclasses import replace
from typing import List, Optional
import argparse
import hashlib
import logging
import os
import sys

from . import __version__
from .config import default_seed
from .core.io import iter_candles, read_csv, to_csv
from .core.patterns import FeatureSet
from .dataset import (
    DatasetConfig,
    Split,
    SyntheticConfig,
    build_dataset,
    generate_synthetic,
    load_dataset,
    save_dataset,
)
from .detector import (
    DetectionArrays,
    DetectorArchitecture,
    DetectorModel,
    TrainConfig,
    train,
)
from .encoding.gaf import encode_window
from .errors import GafDetectError, InvalidInput
from .evaluation import RenderSpec, evaluate, render_chart, render_gaf, write_svg
from .infer import decode, detect_stream, write_detections_csv
from .infer.stream import infer_window
from .rules.thresholds import RuleThresholds

logger = logging.getLogger(__name__)

CHECKPOINT_NAME = "model.ckpt"
LOG_NAME = "train_log.csv"
THRESHOLDS_NAME = "thresholds.txt"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def _seed(args) -> int:
    return default_seed() if args.seed is None else args.seed


def _file_digest(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as file:
        for block in iter(lambda: file.read(1 << 20), b""):
            digest.update(block)
    return f"sha256:{digest.hexdigest()}"


def _load_config(cls, path: Optional[str]):
    if path is None:
        return cls()
    try:
        return cls.from_json(path)
    except (TypeError, ValueError) as e:
        raise InvalidInput(f"Bad {cls.__name__} file {path}: {e}") from e


def _records_of(records, split_label: Optional[str]):
    if split_label is None or split_label == "all":
        return records
    split = next(s for s in Split if s.label == split_label)
    return [r for r in records if r.split == split]


def cmd_gendata(args) -> None:
    cfg = SyntheticConfig(
        seed=_seed(args), n_bars=args.bars, volatility=args.volatility
    )
    series = generate_synthetic(cfg)
    to_csv(series, args.out, timestamp_format=args.timestamps)
    logger.info("Wrote %d candles to %s", len(series), args.out)


def cmd_build_dataset(args) -> None:
    cfg = _load_config(DatasetConfig, args.config)
    overrides = {
        "dtw_percentile": args.percentile,
        "top_k": args.top_k,
        "max_per_class": args.max_per_class,
    }
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    thresholds = RuleThresholds.from_text(args.thresholds) if args.thresholds else None
    if args.input is None:
        seed = _seed(args)
        corpus = generate_synthetic(SyntheticConfig(seed=seed, n_bars=args.bars))
        provenance = f"synthetic:seed={seed},bars={args.bars}"
    else:
        corpus = read_csv(args.input)
        provenance = _file_digest(args.input)
    manifest, records = build_dataset(
        corpus,
        FeatureSet.parse(args.feature_set),
        cfg,
        thresholds=thresholds,
        provenance=provenance,
    )
    save_dataset(args.out, manifest, records)
    manifest.thresholds.to_text(os.path.join(args.out, THRESHOLDS_NAME))


def cmd_train(args) -> None:
    manifest, records = load_dataset(args.dataset)
    cfg = _load_config(TrainConfig, args.config)
    overrides = {
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "learning_rate": args.learning_rate,
        "seed": args.seed,
    }
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    architecture = DetectorArchitecture(feature_set=manifest.feature_set)
    result = train(
        DetectionArrays.from_records(records, Split.TRAIN),
        DetectionArrays.from_records(records, Split.VAL),
        cfg,
        architecture,
    )
    checkpoint = args.checkpoint or os.path.join(args.dataset, CHECKPOINT_NAME)
    log_path = args.log or os.path.join(os.path.dirname(checkpoint) or ".", LOG_NAME)
    result.model.save(checkpoint)
    result.log.to_csv(log_path)
    logger.info("Saved checkpoint to %s and training log to %s", checkpoint, log_path)


def cmd_eval(args) -> None:
    _, records = load_dataset(args.dataset)
    model = DetectorModel.load(args.checkpoint)
    report = evaluate(model, _records_of(records, args.split))
    sys.stdout.write(report.to_text())
    if args.report_out:
        report.to_json(args.report_out)
    if args.confusion_out:
        report.confusion_to_csv(args.confusion_out)


def cmd_detect(args) -> None:
    model = DetectorModel.load(args.checkpoint)
    detections = detect_stream(iter_candles(args.input), model, args.threshold)
    write_detections_csv(detections, args.out)


def cmd_render(args) -> None:
    _, records = load_dataset(args.dataset)
    if not 0 <= args.index < len(records):
        raise GafDetectError(
            f"Index {args.index} outside the {len(records)} stored samples"
        )
    record = records[args.index]
    sample = record.sample
    if args.checkpoint:
        model = DetectorModel.load(args.checkpoint)
        detection = decode(
            infer_window(sample.window, model), 0.0, sample.end_timestamp
        )
        spec = RenderSpec.for_detection(sample.window, detection)
        tensor = encode_window(sample.window, model.architecture.feature_set)
    else:
        spec = RenderSpec.for_sample(sample)
        tensor = record.tensor
    write_svg(render_chart(spec), args.out)
    if args.gaf_out:
        write_svg(
            render_gaf(tensor.channels[args.channel], spec.window_size, spec.caption),
            args.gaf_out,
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gafdetect",
        description="Candlestick pattern detection on GAF-encoded windows.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v", "--verbose", action="store_true", help="log at DEBUG level"
    )
    verbosity.add_argument(
        "-q", "--quiet", action="store_true", help="log warnings only"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gendata", help="generate a synthetic OHLC corpus")
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--bars", type=int, default=200_000)
    gen.add_argument("--volatility", type=float, default=0.0005)
    gen.add_argument("--timestamps", choices=["iso", "epoch_ms"], default="iso")
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=cmd_gendata, inputs=())

    build = commands.add_parser("build-dataset", help="label and encode a corpus")
    build.add_argument(
        "--input-csv",
        "--input",
        dest="input",
        default=None,
        help="OHLC CSV file; a synthetic corpus is generated when omitted",
    )
    build.add_argument("--out-dir", "--out", dest="out", required=True)
    build.add_argument("--feature-set", choices=["ohlc", "culr"], default="ohlc")
    build.add_argument(
        "--dtw-percentile", "--percentile", dest="percentile", type=float, default=None
    )
    build.add_argument("--seed", type=int, default=None, help="synthetic corpus seed")
    build.add_argument("--bars", type=int, default=200_000, help="synthetic bars")
    build.add_argument("--top-k", type=int, default=None)
    build.add_argument("--max-per-class", type=int, default=None)
    build.add_argument("--thresholds", default=None, help="key=value thresholds file")
    build.add_argument("--config", default=None, help="DatasetConfig JSON file")
    build.set_defaults(
        handler=cmd_build_dataset, inputs=("input", "thresholds", "config")
    )

    fit = commands.add_parser("train", help="train the detector")
    fit.add_argument("--dataset", required=True)
    fit.add_argument("--epochs", type=int, default=None)
    fit.add_argument("--batch-size", type=int, default=None)
    fit.add_argument("--learning-rate", type=float, default=None)
    fit.add_argument("--seed", type=int, default=None)
    fit.add_argument("--config", default=None, help="TrainConfig JSON file")
    fit.add_argument("--checkpoint", default=None, help="checkpoint output path")
    fit.add_argument("--log", default=None, help="training log CSV output path")
    fit.set_defaults(handler=cmd_train, inputs=("dataset", "config"))

    score = commands.add_parser("eval", help="evaluate a checkpoint on a dataset split")
    score.add_argument("--dataset", required=True)
    score.add_argument("--checkpoint", required=True)
    score.add_argument(
        "--split", choices=[s.label for s in Split] + ["all"], default=Split.TEST.label
    )
    score.add_argument("--report-out", default=None, help="JSON report output path")
    score.add_argument(
        "--confusion-out", default=None, help="confusion matrix CSV path"
    )
    score.set_defaults(handler=cmd_eval, inputs=("dataset", "checkpoint"))

    detect = commands.add_parser("detect", help="stream a CSV through the detector")
    detect.add_argument("--input", required=True)
    detect.add_argument("--checkpoint", required=True)
    detect.add_argument("--out", required=True)
    detect.add_argument("--threshold", type=float, default=0.5)
    detect.set_defaults(handler=cmd_detect, inputs=("input", "checkpoint"))

    draw = commands.add_parser("render", help="render a stored sample as SVG")
    draw.add_argument("--dataset", required=True)
    draw.add_argument("--index", type=int, required=True)
    draw.add_argument("--out", required=True)
    draw.add_argument("--checkpoint", default=None, help="draw the model's detection")
    draw.add_argument("--gaf-out", default=None, help="also draw one GAF channel")
    draw.add_argument("--channel", type=int, choices=range(4), default=3)
    draw.set_defaults(handler=cmd_render, inputs=("dataset", "checkpoint"))
    return parser


def _check_inputs(parser: argparse.ArgumentParser, args) -> None:
    for name in args.inputs:
        path = getattr(args, name)
        if path is not None and not os.path.exists(path):
            parser.error(f"--{name.replace('_', '-')}: {path} does not exist")


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger("gafdetect").setLevel(level)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv (Optional[List[str]]): Arguments without the program name; `sys.argv[1:]` if None.

    Returns:
        int: 0 on success, 1 on a pipeline error, 2 on a usage error.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_inputs(parser, args)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    configure_logging(args.verbose, args.quiet)
    try:
        args.handler(args)
    except (GafDetectError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

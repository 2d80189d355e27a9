"""
Labelled dataset construction.

calibrate thresholds -> scan rule matches -> pick the steepest matches per class as
targets -> collect every window within the DTW percentile of a class's targets ->
drop near-duplicates -> balance classes -> assign window sizes -> encode -> split by time.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple
import logging
import math
import warnings

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..core.candles import OhlcSeries
from ..core.patterns import FeatureSet, PatternClass, TrendDirection
from ..core.samples import MIN_WINDOW, WINDOW, LabeledSample
from ..core.serialization import JsonSerializable
from ..encoding.dtw import multichannel_dtw_batch, normalized_channels
from ..encoding.gaf import GafTensor, encode_batch, minmax_normalize
from ..errors import DatasetQualityWarning, InsufficientData, InvalidInput
from ..rules.patterns import DEFAULT_RULES, PatternRuleSet, RuleScan
from ..rules.thresholds import RuleThresholds, calibrate_thresholds

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class Split(Enum):
    TRAIN = 0
    VAL = 1
    TEST = 2

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class DatasetConfig(JsonSerializable):
    """
    Parameters of the labelling pipeline.

    Attributes:
        dtw_percentile (float): Windows at or below this percentile of a class's DTW distances are kept.
        top_k (int): Rule matches per class used as DTW targets.
        dedup_bars (int): Collected windows whose ends are closer than this keep only the lowest-DTW one.
        max_per_class (Optional[int]): Cap applied after balancing, lowest DTW distance first.
        split (Tuple[float, float, float]): Train, validation and test fractions.
        window (int): Window length in bars.
        chunk_size (int): Candidate windows per vectorised DTW pass.
    """

    dtw_percentile: float = 20.0
    top_k: int = 10
    dedup_bars: int = 3
    max_per_class: Optional[int] = None
    split: Tuple[float, float, float] = (0.64, 0.16, 0.20)
    window: int = WINDOW
    chunk_size: int = 65_536

    _casters = {"split": tuple}

    def __post_init__(self):
        if not 0 < self.dtw_percentile <= 100:
            raise InvalidInput(
                f"dtw_percentile must lie in (0, 100], got {self.dtw_percentile}"
            )
        if self.top_k < 1 or self.dedup_bars < 1 or self.chunk_size < 1:
            raise InvalidInput("top_k, dedup_bars and chunk_size must be at least 1")
        if self.max_per_class is not None and self.max_per_class < 1:
            raise InvalidInput(
                f"max_per_class must be at least 1, got {self.max_per_class}"
            )
        if len(self.split) != 3 or any(r <= 0 for r in self.split):
            raise InvalidInput(
                f"split needs three positive fractions, got {self.split}"
            )
        if not math.isclose(sum(self.split), 1.0, abs_tol=1e-9):
            raise InvalidInput(f"split fractions must sum to 1, got {self.split}")
        if self.window != WINDOW:
            raise InvalidInput(
                f"Only {WINDOW}-bar windows are supported, got {self.window}"
            )


@dataclass(frozen=True)
class Target:
    """A rule-matching window chosen as a DTW reference."""

    pattern_class: PatternClass
    end_index: int
    slope: float


@dataclass(frozen=True)
class Candidate:
    """A collected window and its DTW distance to the nearest target of its class."""

    pattern_class: PatternClass
    end_index: int
    distance: float


@dataclass(frozen=True)
class SampleRecord:
    """
    One stored sample: the labelled window, its encoding and its split.

    Attributes:
        sample (LabeledSample): The window, class and window size.
        tensor (GafTensor): The GAF encoding of `sample.window`.
        split (Split): Which partition the sample belongs to.
    """

    sample: LabeledSample
    tensor: GafTensor
    split: Split

    @property
    def end_timestamp(self) -> int:
        return self.sample.end_timestamp


@dataclass(frozen=True)
class DatasetManifest(JsonSerializable):
    """
    Metadata stored next to the sample file.

    Attributes:
        feature_set (FeatureSet): Which feature series the tensors encode.
        class_counts (Dict[str, int]): Samples per class display name.
        split_counts (Dict[str, int]): Samples per split.
        split_boundaries (Tuple[int, int]): First validation and first test end timestamps.
        window_size_histogram (Dict[str, int]): Samples per window size.
        thresholds (RuleThresholds): The calibrated thresholds that labelled the data.
        provenance (str): Generator seed or source file hash.
        config (DatasetConfig): The pipeline parameters.
        bar_interval_ms (int): Spacing of candles inside a window.
        record_count (int): Number of stored samples.
        format_version (int): Version of the sample file layout.
    """

    feature_set: FeatureSet
    class_counts: Dict[str, int]
    split_counts: Dict[str, int]
    split_boundaries: Tuple[int, int]
    window_size_histogram: Dict[str, int]
    thresholds: RuleThresholds
    provenance: str
    config: DatasetConfig
    bar_interval_ms: int
    record_count: int
    format_version: int = FORMAT_VERSION

    _casters = {
        "feature_set": FeatureSet.parse,
        "split_boundaries": tuple,
        "thresholds": RuleThresholds.from_dict,
        "config": DatasetConfig.from_dict,
    }

    def __post_init__(self):
        if not self.split_boundaries[0] < self.split_boundaries[1]:
            raise InvalidInput(
                f"Split boundaries must increase: {self.split_boundaries}"
            )

    @classmethod
    def describe(
        cls,
        records: List[SampleRecord],
        feature_set: FeatureSet,
        thresholds: RuleThresholds,
        provenance: str,
        config: DatasetConfig,
        bar_interval_ms: int,
    ) -> "DatasetManifest":
        """Summarise `records` into a manifest."""
        class_counts = {c.display_name: 0 for c in PatternClass}
        split_counts = {s.label: 0 for s in Split}
        histogram = {str(w): 0 for w in range(MIN_WINDOW, WINDOW + 1)}
        first = {}
        for record in records:
            class_counts[record.sample.pattern_class.display_name] += 1
            split_counts[record.split.label] += 1
            histogram[str(record.sample.window_size)] += 1
            first.setdefault(record.split, record.end_timestamp)
        if Split.VAL not in first or Split.TEST not in first:
            raise InsufficientData("Every split needs at least one sample")
        return cls(
            feature_set=feature_set,
            class_counts=class_counts,
            split_counts=split_counts,
            split_boundaries=(first[Split.VAL], first[Split.TEST]),
            window_size_histogram=histogram,
            thresholds=thresholds,
            provenance=provenance,
            config=config,
            bar_interval_ms=bar_interval_ms,
            record_count=len(records),
        )


def _window_at(corpus: OhlcSeries, end_index: int, window: int = WINDOW) -> OhlcSeries:
    return corpus[end_index - window + 1 : end_index + 1]


def select_top_targets(
    corpus: OhlcSeries,
    rules: Optional[PatternRuleSet],
    thresholds: RuleThresholds,
    top_k: int = 10,
    window: int = WINDOW,
    scan: Optional[RuleScan] = None,
) -> Dict[PatternClass, List[Target]]:
    """
    Pick, per class, the rule matches with the steepest trend.

    Args:
        corpus (OhlcSeries): The labelled series.
        rules (Optional[PatternRuleSet]): Rule set; the shipped rules by default.
        thresholds (RuleThresholds): Calibrated thresholds.
        top_k (int): Targets per class.
        window (int): Window length.
        scan (Optional[RuleScan]): A precomputed scan of `corpus` to reuse.

    Returns:
        Dict[PatternClass, List[Target]]: `top_k` targets per class, steepest first; equal
                                          slopes keep the earlier window first.

    Raises:
        InsufficientData: If a class has fewer than `top_k` matches.
    """
    rules = rules or DEFAULT_RULES
    scan = scan or rules.scan(corpus, thresholds, window)
    targets = {}
    for rule in rules:
        mask = scan.matches[rule.pattern_class]
        ends = scan.end_indices[mask]
        slopes = scan.slopes[mask]
        if len(ends) < top_k:
            raise InsufficientData(
                f"{rule.pattern_class.display_name} has {len(ends)} rule matches, "
                f"{top_k} targets are needed",
                pattern_class=rule.pattern_class,
            )
        order = np.lexsort((ends, -np.abs(slopes)))[:top_k]
        targets[rule.pattern_class] = [
            Target(rule.pattern_class, int(ends[i]), float(slopes[i])) for i in order
        ]
        logger.debug(
            "%s: %d matches, steepest target slope %.3g",
            rule.pattern_class.display_name,
            len(ends),
            abs(slopes[order[0]]),
        )
    return targets


def nearest_target_distances(
    corpus: OhlcSeries,
    targets: Dict[PatternClass, List[Target]],
    window: int = WINDOW,
    chunk_size: int = 65_536,
) -> Tuple[np.ndarray, Dict[PatternClass, np.ndarray]]:
    """
    Minimum multichannel DTW distance of every sliding window to each class's targets.

    Returns:
        Tuple[np.ndarray, Dict[PatternClass, np.ndarray]]: The window end indices and,
                                                           per class, one distance per window.
    """
    ohlc = corpus.ohlc()
    count = len(corpus) - window + 1
    if count < 1:
        raise InsufficientData(
            f"Corpus of {len(corpus)} bars has no {window}-bar window"
        )
    references = {
        cls: [normalized_channels(_window_at(corpus, t.end_index, window)) for t in ts]
        for cls, ts in targets.items()
    }
    distances = {cls: np.empty(count) for cls in targets}
    views = sliding_window_view(ohlc, window, axis=0)  # (count, 4, window)
    for start in range(0, count, chunk_size):
        stop = min(start + chunk_size, count)
        candidates = minmax_normalize(views[start:stop], axis=-1)
        for cls, refs in references.items():
            best = np.full(stop - start, np.inf)
            for ref in refs:
                best = np.minimum(best, multichannel_dtw_batch(ref, candidates))
            distances[cls][start:stop] = best
        logger.debug("DTW scan %d / %d windows", stop, count)
    return np.arange(window - 1, window - 1 + count), distances


def collect_similar(
    corpus: OhlcSeries,
    targets: Dict[PatternClass, List[Target]],
    percentile: float = 20.0,
    window: int = WINDOW,
    chunk_size: int = 65_536,
) -> Dict[PatternClass, List[Candidate]]:
    """
    Collect, per class, the windows whose DTW distance to the class's nearest target lies at
    or below the given percentile of that class's distances.

    Args:
        corpus (OhlcSeries): The series to scan.
        targets (Dict[PatternClass, List[Target]]): Reference windows per class.
        percentile (float): Percentile of the per-class distance distribution used as cutoff.
        window (int): Window length.
        chunk_size (int): Windows per vectorised DTW pass.

    Returns:
        Dict[PatternClass, List[Candidate]]: Collected windows per class, in corpus order.

    Raises:
        InvalidInput: If a class has no targets.
    """
    for cls, ts in targets.items():
        if not ts:
            raise InvalidInput(f"{cls.display_name} has no targets")
    ends, distances = nearest_target_distances(corpus, targets, window, chunk_size)
    collected = {}
    for cls, d in distances.items():
        cutoff = np.percentile(d, percentile)
        keep = np.flatnonzero(d <= cutoff)
        collected[cls] = [Candidate(cls, int(ends[i]), float(d[i])) for i in keep]
        logger.info(
            "%s: collected %d of %d windows (DTW cutoff %.4f)",
            cls.display_name,
            len(keep),
            len(d),
            cutoff,
        )
    return collected


def assign_window_size(window: OhlcSeries, trend_direction: TrendDirection) -> int:
    """
    Number of trailing bars a pattern occupies.

    Scans from the fifth-from-last bar towards older bars for the first candle whose
    color opposes the trend (black or Doji in an uptrend, white in a downtrend); the
    pattern starts there. Without such a bar the pattern spans the whole window.

    Args:
        window (OhlcSeries): 16 candles, oldest first.
        trend_direction (TrendDirection): UP or DOWN.

    Returns:
        int: The window size, 5 to 16.

    Raises:
        InvalidInput: If the trend direction is NONE or the window is not 16 bars long.
    """
    if len(window) != WINDOW:
        raise InvalidInput(
            f"Window sizes are assigned on {WINDOW}-bar windows, got {len(window)}"
        )
    if trend_direction is TrendDirection.UP:
        opposing = window.close <= window.open
    elif trend_direction is TrendDirection.DOWN:
        opposing = window.close > window.open
    else:
        raise InvalidInput("A window size needs an UP or DOWN trend")
    for start in range(WINDOW - MIN_WINDOW, -1, -1):
        if opposing[start]:
            return WINDOW - start
    return WINDOW


def deduplicate(
    candidates: List[Candidate], dedup_bars: int, n_bars: int
) -> List[Candidate]:
    """
    Keep the lowest-distance candidate among any whose end indices differ by less than
    `dedup_bars`, across all classes. Ties go to the earlier window, then the lower class id.
    """
    blocked = np.zeros(n_bars, dtype=bool)
    kept = []
    for candidate in sorted(
        candidates, key=lambda c: (c.distance, c.end_index, c.pattern_class.id)
    ):
        if blocked[candidate.end_index]:
            continue
        kept.append(candidate)
        lo = max(candidate.end_index - dedup_bars + 1, 0)
        blocked[lo : candidate.end_index + dedup_bars] = True
    return kept


def balance(
    candidates: List[Candidate], max_per_class: Optional[int] = None
) -> List[Candidate]:
    """
    Trim every class to the size of the smallest one, keeping the lowest distances.

    Raises:
        InsufficientData: If a class has no candidates left.
    """
    by_class = {cls: [] for cls in PatternClass}
    for candidate in candidates:
        by_class[candidate.pattern_class].append(candidate)
    for cls, items in by_class.items():
        if not items:
            raise InsufficientData(
                f"No {cls.display_name} windows survived collection", pattern_class=cls
            )
    cap = min(len(items) for items in by_class.values())
    if max_per_class is not None:
        cap = min(cap, max_per_class)
    trimmed = {cls.display_name: len(items) - cap for cls, items in by_class.items()}
    if any(trimmed.values()):
        logger.info("Balancing to %d samples per class (dropped %s)", cap, trimmed)
    kept = []
    for items in by_class.values():
        kept.extend(sorted(items, key=lambda c: (c.distance, c.end_index))[:cap])
    return kept


def split_counts(
    total: int, ratios: Tuple[float, float, float]
) -> Tuple[int, int, int]:
    """Chronological partition sizes: floor of the train and validation shares, the rest is test."""
    n_train = int(math.floor(total * ratios[0]))
    n_val = int(math.floor(total * ratios[1]))
    return n_train, n_val, total - n_train - n_val


def build_dataset(
    corpus: OhlcSeries,
    feature_set: FeatureSet = FeatureSet.OHLC,
    cfg: Optional[DatasetConfig] = None,
    thresholds: Optional[RuleThresholds] = None,
    rules: Optional[PatternRuleSet] = None,
    provenance: str = "",
) -> Tuple[DatasetManifest, List[SampleRecord]]:
    """
    Run the full labelling pipeline on a corpus.

    Args:
        corpus (OhlcSeries): The raw series.
        feature_set (FeatureSet): Which feature series to encode.
        cfg (Optional[DatasetConfig]): Pipeline parameters; defaults otherwise.
        thresholds (Optional[RuleThresholds]): Precomputed thresholds; calibrated on `corpus` if omitted.
        rules (Optional[PatternRuleSet]): Rule set; the shipped rules by default.
        provenance (str): Recorded in the manifest, e.g. `seed=7` or a file hash.

    Returns:
        Tuple[DatasetManifest, List[SampleRecord]]: The manifest and the records in time order.

    Raises:
        InsufficientData: If a class cannot be served or a split would be empty.
    """
    cfg = cfg or DatasetConfig()
    rules = rules or DEFAULT_RULES
    feature_set = FeatureSet.parse(feature_set)
    thresholds = thresholds or calibrate_thresholds(corpus, cfg.window)
    scan = rules.scan(corpus, thresholds, cfg.window)
    targets = select_top_targets(corpus, rules, thresholds, cfg.top_k, cfg.window, scan)
    collected = collect_similar(
        corpus, targets, cfg.dtw_percentile, cfg.window, cfg.chunk_size
    )
    pooled = [c for items in collected.values() for c in items]
    unique = deduplicate(pooled, cfg.dedup_bars, len(corpus))
    logger.info(
        "Deduplication kept %d of %d collected windows", len(unique), len(pooled)
    )
    kept = sorted(
        balance(unique, cfg.max_per_class),
        key=lambda c: (c.end_index, c.pattern_class.id),
    )
    n_train, n_val, n_test = split_counts(len(kept), cfg.split)
    if min(n_train, n_val, n_test) < 1:
        raise InsufficientData(
            f"{len(kept)} samples cannot fill train, validation and test splits"
        )
    splits = [Split.TRAIN] * n_train + [Split.VAL] * n_val + [Split.TEST] * n_test

    ohlc = corpus.ohlc()
    stacked = np.stack(
        [ohlc[c.end_index - cfg.window + 1 : c.end_index + 1] for c in kept]
    )
    tensors = encode_batch(stacked, feature_set)
    records = []
    for candidate, split, tensor in zip(kept, splits, tensors):
        window = _window_at(corpus, candidate.end_index, cfg.window)
        size = assign_window_size(window, candidate.pattern_class.trend)
        records.append(
            SampleRecord(
                LabeledSample(window, candidate.pattern_class, size),
                GafTensor(tensor, feature_set),
                split,
            )
        )
    _warn_missing_classes(records)
    interval = int(np.median(np.diff(corpus.timestamps))) if len(corpus) > 1 else 0
    manifest = DatasetManifest.describe(
        records, feature_set, thresholds, provenance, cfg, interval
    )
    logger.info(
        "Built %d samples (%s) with splits %s",
        len(records),
        feature_set.value,
        manifest.split_counts,
    )
    return manifest, records


def _warn_missing_classes(records: List[SampleRecord]):
    seen = {(r.split, r.sample.pattern_class) for r in records}
    for split in Split:
        missing = [c.display_name for c in PatternClass if (split, c) not in seen]
        if missing:
            warnings.warn(
                f"The {split.label} split has no samples of {', '.join(missing)}",
                DatasetQualityWarning,
            )

from .model import (
    N_OUTPUTS,
    DetectorArchitecture,
    DetectorModel,
    DetectorOutput,
    activate,
    predicted_labels,
    window_size_from_norm,
)
from .loss import LossTerms, detection_loss, iou_1d, responsible_pairs, sample_loss
from .training import (
    DetectionArrays,
    EpochRecord,
    TrainConfig,
    TrainingLog,
    TrainResult,
    score,
    train,
)

__all__ = [
    "N_OUTPUTS",
    "DetectorArchitecture",
    "DetectorModel",
    "DetectorOutput",
    "activate",
    "predicted_labels",
    "window_size_from_norm",
    "LossTerms",
    "detection_loss",
    "iou_1d",
    "responsible_pairs",
    "sample_loss",
    "DetectionArrays",
    "EpochRecord",
    "TrainConfig",
    "TrainingLog",
    "TrainResult",
    "score",
    "train",
]

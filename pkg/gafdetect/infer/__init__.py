from .decode import DEFAULT_THRESHOLD, Detection, decode
from .stream import (
    StreamDetector,
    WindowBuffer,
    detect_stream,
    detections_to_dataframe,
    infer_window,
    step,
    write_detections_csv,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "Detection",
    "decode",
    "StreamDetector",
    "WindowBuffer",
    "detect_stream",
    "detections_to_dataframe",
    "infer_window",
    "step",
    "write_detections_csv",
]

from .metrics import (
    EvalReport,
    evaluate,
    evaluate_predictions,
    predict_labels,
    window_confusion,
)
from .render import RenderSpec, render_chart, render_gaf, write_svg

__all__ = [
    "EvalReport",
    "evaluate",
    "evaluate_predictions",
    "predict_labels",
    "window_confusion",
    "RenderSpec",
    "render_chart",
    "render_gaf",
    "write_svg",
]

"""
SVG rendering of detections.

Charts are drawn with matplotlib's SVG backend on a standalone `Figure`, so no pyplot
state is touched. The hash salt is fixed and the date metadata dropped, which makes the
same input render to the same bytes. Every drawn element carries an id:

    candle-<i>   body of the i-th candle
    wick-<i>     high-low line of the i-th candle
    detection    the box around the detected bars (or the w x w GAF block)
    label        class name and score
"""

from dataclasses import dataclass
from typing import Optional, TextIO, Tuple, Union
import io
import logging
import os

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure
from matplotlib.lines import Line2D
from matplotlib.patches import Rectangle
import numpy as np

from ..core.candles import OhlcSeries
from ..core.samples import LabeledSample
from ..errors import InvalidInput, ShapeError

logger = logging.getLogger(__name__)

DPI = 100
SVG_RC = {"svg.hashsalt": "gafdetect", "svg.fonttype": "none"}
BODY_WIDTH = 0.6
GAF_COLORMAP = "RdBu_r"


@dataclass(frozen=True)
class RenderSpec:
    """
    What to draw for one detection on a candlestick chart.

    Attributes:
        window (OhlcSeries): The candles, oldest first.
        window_size (int): Number of trailing candles inside the detection box.
        label (str): Pattern name shown above the box.
        score (Optional[float]): Detection score shown after the label.
        width (int): Output width in pixels.
        height (int): Output height in pixels.
        up_color (str): Body fill of white candles.
        down_color (str): Body fill of black candles and dojis.
        edge_color (str): Outline and wick color.
        box_color (str): Detection box and label color.
    """

    window: OhlcSeries
    window_size: int
    label: str = ""
    score: Optional[float] = None
    width: int = 640
    height: int = 360
    up_color: str = "#ffffff"
    down_color: str = "#000000"
    edge_color: str = "#000000"
    box_color: str = "#ff0000"

    def __post_init__(self):
        if len(self.window) == 0:
            raise InvalidInput("Cannot render an empty window")
        if not 1 <= self.window_size <= len(self.window):
            raise InvalidInput(
                f"window_size {self.window_size} "
                f"does not fit {len(self.window)} candles"
            )
        if self.width <= 0 or self.height <= 0:
            raise InvalidInput("Output size must be positive")

    @classmethod
    def for_sample(cls, sample: LabeledSample, **kwargs) -> "RenderSpec":
        return cls(
            sample.window,
            sample.window_size,
            sample.pattern_class.display_name,
            **kwargs,
        )

    @classmethod
    def for_detection(cls, window: OhlcSeries, detection, **kwargs) -> "RenderSpec":
        return cls(
            window,
            detection.window_size,
            detection.class_name,
            detection.score,
            **kwargs,
        )

    @property
    def box_span(self) -> Tuple[int, int]:
        """Index range [start, end) of the boxed candles."""
        return len(self.window) - self.window_size, len(self.window)

    @property
    def caption(self) -> str:
        text = self.label if self.score is None else f"{self.label} {self.score:.2f}"
        return f"{text} (w={self.window_size})".strip()


def _to_svg(figure: Figure) -> str:
    FigureCanvasSVG(figure)
    buffer = io.StringIO()
    figure.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def render_chart(spec: RenderSpec) -> str:
    """
    Draw the window as candlesticks with a box around the detected bars.

    Args:
        spec (RenderSpec): The window, detection and styling.

    Returns:
        str: The SVG document.
    """
    window = spec.window
    lo = float(window.low.min())
    hi = float(window.high.max())
    span = hi - lo if hi > lo else max(abs(hi) * 1e-3, 1e-9)
    pad = 0.05 * span
    start, end = spec.box_span

    with matplotlib.rc_context(SVG_RC):
        figure = Figure(figsize=(spec.width / DPI, spec.height / DPI), dpi=DPI)
        ax = figure.add_axes([0.1, 0.08, 0.86, 0.84])
        for i, candle in enumerate(window):
            fill = spec.up_color if candle.close > candle.open else spec.down_color
            ax.add_line(
                Line2D(
                    [i, i],
                    [candle.low, candle.high],
                    color=spec.edge_color,
                    linewidth=1.0,
                    zorder=1,
                    gid=f"wick-{i}",
                )
            )
            bottom = min(candle.open, candle.close)
            body = max(abs(candle.close - candle.open), 0.002 * span)
            ax.add_patch(
                Rectangle(
                    (i - BODY_WIDTH / 2, bottom),
                    BODY_WIDTH,
                    body,
                    facecolor=fill,
                    edgecolor=spec.edge_color,
                    linewidth=0.8,
                    zorder=2,
                    gid=f"candle-{i}",
                )
            )
        ax.add_patch(
            Rectangle(
                (start - 0.5, lo - pad),
                end - start,
                span + 2 * pad,
                fill=False,
                edgecolor=spec.box_color,
                linewidth=2.0,
                zorder=3,
                gid="detection",
            )
        )
        ax.text(
            start - 0.5,
            hi + 1.5 * pad,
            spec.caption,
            color=spec.box_color,
            fontsize=9,
            va="bottom",
            gid="label",
        )
        ax.set_xlim(-1, len(window))
        ax.set_ylim(lo - 2 * pad, hi + 5 * pad)
        ax.set_xticks([])
        svg = _to_svg(figure)
    logger.debug(
        "Rendered %d candles, box over the last %d", len(window), spec.window_size
    )
    return svg


def render_gaf(
    matrix: np.ndarray,
    window_size: int,
    label: str = "",
    size: int = 360,
    box_color: str = "#000000",
) -> str:
    """
    Draw one GAF channel as a heat map with the detected block outlined.

    Values run from blue at -1 to red at 1. The pattern of the last `window_size` bars sits
    in the bottom-right `window_size` x `window_size` block.

    Args:
        matrix (np.ndarray): A square GAF matrix.
        window_size (int): Side of the outlined block.
        label (str): Title above the map.
        size (int): Output width and height in pixels.
        box_color (str): Outline color.

    Returns:
        str: The SVG document.

    Raises:
        ShapeError: If `matrix` is not square.
        InvalidInput: If `window_size` does not fit the matrix.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ShapeError(f"Expected a square matrix, got shape {matrix.shape}")
    n = matrix.shape[0]
    if not 1 <= window_size <= n:
        raise InvalidInput(f"window_size {window_size} does not fit a {n}x{n} matrix")
    start = n - window_size

    with matplotlib.rc_context(SVG_RC):
        figure = Figure(figsize=(size / DPI, size / DPI), dpi=DPI)
        ax = figure.add_axes([0.08, 0.06, 0.84, 0.84])
        ax.imshow(
            matrix,
            cmap=GAF_COLORMAP,
            vmin=-1.0,
            vmax=1.0,
            interpolation="nearest",
            gid="gaf",
        )
        ax.add_patch(
            Rectangle(
                (start - 0.5, start - 0.5),
                window_size,
                window_size,
                fill=False,
                edgecolor=box_color,
                linewidth=2.0,
                gid="detection",
            )
        )
        if label:
            ax.set_title(label, fontsize=9, gid="label")
        ax.set_xticks([])
        ax.set_yticks([])
        return _to_svg(figure)


def write_svg(svg: str, path_or_file: Union[str, os.PathLike, TextIO]) -> None:
    if isinstance(path_or_file, (str, os.PathLike)):
        with open(path_or_file, "w") as file:
            file.write(svg)
        return
    path_or_file.write(svg)

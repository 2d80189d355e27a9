from .candles import Candle, CulrBar, OhlcSeries, candle_color, to_culr
from .patterns import CandleColor, FeatureSet, PatternClass, TrendDirection, N_CLASSES
from .samples import LabeledSample, WINDOW, MIN_WINDOW
from .io import read_csv, to_csv, iter_candles

__all__ = [
    "Candle",
    "CulrBar",
    "OhlcSeries",
    "candle_color",
    "to_culr",
    "CandleColor",
    "FeatureSet",
    "PatternClass",
    "TrendDirection",
    "N_CLASSES",
    "LabeledSample",
    "WINDOW",
    "MIN_WINDOW",
    "read_csv",
    "to_csv",
    "iter_candles",
]

from dataclasses import dataclass, field
import logging

import numpy as np

from ..config import check_positive, default_seed
from ..core.candles import OhlcSeries
from ..core.serialization import JsonSerializable
from ..errors import InvalidInput

logger = logging.getLogger(__name__)

MIN_BARS = 1000
SUB_STEPS = 4
START_TIMESTAMP = 946684800000  # 2000-01-01T00:00:00Z
BAR_INTERVAL_MS = 60_000


@dataclass(frozen=True)
class SyntheticConfig(JsonSerializable):
    """
    Parameters of the synthetic 1-minute price generator.

    Attributes:
        seed (int): Random seed; defaults to `GAFDETECT_SEED` or 7.
        n_bars (int): Number of candles, at least 1000.
        drift (float): Expected log return per bar.
        volatility (float): Standard deviation of the log return per bar.
        initial_price (float): Open of the first candle.
        start_timestamp (int): Epoch-ms timestamp of the first candle.
        bar_interval_ms (int): Spacing of candles in milliseconds.
    """

    seed: int = field(default_factory=default_seed)
    n_bars: int = 200_000
    drift: float = 0.0
    volatility: float = 0.0005
    initial_price: float = 1.1
    start_timestamp: int = START_TIMESTAMP
    bar_interval_ms: int = BAR_INTERVAL_MS

    def __post_init__(self):
        check_positive(
            type(self).__name__,
            volatility=self.volatility,
            initial_price=self.initial_price,
            bar_interval_ms=self.bar_interval_ms,
        )
        if self.n_bars < MIN_BARS:
            raise InvalidInput(f"n_bars must be at least {MIN_BARS}, got {self.n_bars}")


def generate_synthetic(cfg: SyntheticConfig) -> OhlcSeries:
    """
    Generate a geometric random walk of candles.

    Every bar is built from four intra-bar log-return sub-steps: the open is the previous
    close, the close is the last sub-step, high and low are the extremes of the open and
    all sub-steps.

    Args:
        cfg (SyntheticConfig): Generator parameters.

    Returns:
        OhlcSeries: `cfg.n_bars` valid candles, identical for identical configs.
    """
    rng = np.random.default_rng(cfg.seed)
    step_scale = cfg.volatility / np.sqrt(SUB_STEPS)
    steps = rng.normal(cfg.drift / SUB_STEPS, step_scale, size=(cfg.n_bars, SUB_STEPS))
    log_path = np.log(cfg.initial_price) + np.cumsum(steps.reshape(-1))
    log_path = log_path.reshape(cfg.n_bars, SUB_STEPS)
    log_open = np.concatenate([[np.log(cfg.initial_price)], log_path[:-1, -1]])
    prices = np.exp(log_path)
    open_ = np.exp(log_open)
    close = prices[:, -1]
    high = np.maximum(open_, prices.max(axis=1))
    low = np.minimum(open_, prices.min(axis=1))
    steps = np.arange(cfg.n_bars, dtype=np.int64)
    timestamps = cfg.start_timestamp + cfg.bar_interval_ms * steps
    series = OhlcSeries(timestamps, open_, high, low, close)
    logger.info(
        "Generated %d synthetic candles (seed %d, volatility %g)",
        cfg.n_bars,
        cfg.seed,
        cfg.volatility,
    )
    return series

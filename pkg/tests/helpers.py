import numpy as np

from gafdetect.core.candles import OhlcSeries

START = 946684800000
MINUTE = 60_000


def make_series(closes, spread=0.001, start=START, interval=MINUTE):
    """Candles opening at the previous close, with a fixed spread above and below."""
    closes = np.asarray(closes, dtype=np.float64)
    opens = np.concatenate([[closes[0]], closes[:-1]])
    highs = np.maximum(opens, closes) + spread
    lows = np.minimum(opens, closes) - spread
    timestamps = start + interval * np.arange(len(closes))
    return OhlcSeries(timestamps, opens, highs, lows, closes)


def random_window(rng, n=16):
    closes = 1.0 + np.cumsum(rng.normal(0, 0.01, n))
    return make_series(closes, spread=0.002)


def bars(rows, start=START, interval=MINUTE):
    """A series from explicit (open, high, low, close) rows."""
    rows = np.asarray(rows, dtype=np.float64)
    return OhlcSeries.from_array(start + interval * np.arange(len(rows)), rows)


def numerical_gradient(f, x, eps=1e-6, indices=None):
    """Central differences of the scalar `f()` with respect to `x`, perturbed in place."""
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    for i in range(flat.size) if indices is None else indices:
        original = flat[i]
        flat[i] = original + eps
        upper = f()
        flat[i] = original - eps
        lower = f()
        flat[i] = original
        grad.reshape(-1)[i] = (upper - lower) / (2 * eps)
    return grad

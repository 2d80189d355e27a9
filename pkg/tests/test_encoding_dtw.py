from functools import lru_cache
import itertools

import numpy as np
import pytest

from gafdetect.encoding.dtw import (
    dtw_distance,
    dtw_distance_batch,
    multichannel_dtw,
    multichannel_dtw_batch,
    normalized_channels,
)
from gafdetect.errors import InvalidInput, ShapeError

from .helpers import bars, random_window


@lru_cache(maxsize=None)
def recursive_dtw(a: tuple, b: tuple) -> int:
    """DTW from its recursive definition over suffixes of `a` and `b`."""
    local = abs(a[0] - b[0])
    if len(a) == 1 and len(b) == 1:
        return local
    if len(a) == 1:
        return local + recursive_dtw(a, b[1:])
    if len(b) == 1:
        return local + recursive_dtw(a[1:], b)
    return local + min(
        recursive_dtw(a[1:], b), recursive_dtw(a, b[1:]), recursive_dtw(a[1:], b[1:])
    )


@pytest.mark.parametrize(
    "a, b, expected",
    [
        ([1, 2, 3], [1, 2, 3], 0.0),
        ([0], [5], 5.0),
        ([1, 2, 3], [2, 2, 3], 1.0),
        ([0, 0, 1], [0, 1], 0.0),
        ([1, 1, 1], [3], 6.0),
    ],
)
def test__dtw_distance__must_return_optimal_path_cost(a, b, expected):
    assert dtw_distance(a, b) == pytest.approx(expected)


def test__dtw_distance__must_equal_recursive_definition_on_ten_thousand_pairs():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        a = tuple(int(v) for v in rng.integers(0, 3, rng.integers(1, 7)))
        b = tuple(int(v) for v in rng.integers(0, 3, rng.integers(1, 7)))
        assert dtw_distance(a, b) == recursive_dtw(a, b)


def test__dtw_distance__must_equal_recursive_definition_on_all_length_two_pairs():
    sequences = list(itertools.product(range(3), repeat=2))
    for a, b in itertools.product(sequences, sequences):
        assert dtw_distance(a, b) == recursive_dtw(a, b)


def test__dtw_distance__must_be_symmetric_and_non_negative():
    rng = np.random.default_rng(1)
    for _ in range(100):
        a = rng.normal(size=rng.integers(1, 17))
        b = rng.normal(size=rng.integers(1, 17))
        d = dtw_distance(a, b)
        assert d >= 0
        assert d == pytest.approx(dtw_distance(b, a))
        assert dtw_distance(a, a) == 0.0


@pytest.mark.parametrize("a, b", [([], [1.0]), ([1.0], [])])
def test__dtw_distance__must_raise_invalid_input__when_a_series_is_empty(a, b):
    with pytest.raises(InvalidInput):
        dtw_distance(a, b)


def test__dtw_distance_batch__must_equal_scalar_distance_per_row():
    rng = np.random.default_rng(2)
    target = rng.uniform(size=9)
    candidates = rng.uniform(size=(20, 12))
    expected = [dtw_distance(target, row) for row in candidates]
    np.testing.assert_array_equal(dtw_distance_batch(target, candidates), expected)


def test__dtw_distance_batch__must_raise_shape_error__when_candidates_are_flat():
    with pytest.raises(ShapeError):
        dtw_distance_batch([1.0, 2.0], [1.0, 2.0])


def test__multichannel_dtw__must_be_zero_for_identical_windows_and_symmetric():
    rng = np.random.default_rng(3)
    a = random_window(rng)
    b = random_window(rng, n=12)
    assert multichannel_dtw(a, a) == 0.0
    assert multichannel_dtw(a, b) == pytest.approx(multichannel_dtw(b, a))
    assert multichannel_dtw(a, b) > 0


def test__multichannel_dtw__must_ignore_price_level():
    a = bars([(1.0, 1.3, 0.9, 1.2), (1.2, 1.4, 1.0, 1.1), (1.1, 1.2, 0.8, 0.9)])
    scaled = bars(
        [(10.0, 13.0, 9.0, 12.0), (12.0, 14.0, 10.0, 11.0), (11.0, 12.0, 8.0, 9.0)]
    )
    assert multichannel_dtw(a, scaled) == pytest.approx(0.0, abs=1e-12)


def test__multichannel_dtw__must_equal_single_channel_distance__when_one_channel_differs():
    a = bars([(1.0, 1.3, 0.9, 1.2), (1.2, 1.4, 1.0, 1.1), (1.1, 1.2, 0.8, 0.9)])
    b = bars([(1.0, 1.3, 0.9, 1.2), (1.2, 1.4, 1.0, 1.1), (1.1, 1.2, 0.8, 0.85)])
    left = normalized_channels(a)
    right = normalized_channels(b)
    np.testing.assert_allclose(left[:3], right[:3])
    assert multichannel_dtw(a, b) == pytest.approx(dtw_distance(left[3], right[3]))


def test__multichannel_dtw_batch__must_equal_scalar_multichannel_dtw():
    rng = np.random.default_rng(4)
    target = random_window(rng, n=8)
    windows = [random_window(rng) for _ in range(6)]
    candidates = np.stack([normalized_channels(w) for w in windows])
    expected = [multichannel_dtw(target, w) for w in windows]
    actual = multichannel_dtw_batch(normalized_channels(target), candidates)
    np.testing.assert_allclose(actual, expected, rtol=0, atol=1e-12)


def test__multichannel_dtw_batch__must_raise_shape_error__when_channels_differ():
    with pytest.raises(ShapeError):
        multichannel_dtw_batch(np.zeros((4, 5)), np.zeros((2, 3, 5)))


def test__dtw_distance_batch__must_equal_recursive_definition_per_row():
    rng = np.random.default_rng(5)
    for _ in range(200):
        target = tuple(int(v) for v in rng.integers(0, 3, rng.integers(1, 7)))
        candidates = rng.integers(0, 3, (8, rng.integers(1, 7)))
        expected = [recursive_dtw(target, tuple(map(int, row))) for row in candidates]
        np.testing.assert_array_equal(dtw_distance_batch(target, candidates), expected)

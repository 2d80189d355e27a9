import numpy as np
import pytest

from gafdetect.core.patterns import FeatureSet
from gafdetect.encoding.gaf import (
    GafTensor,
    decode_tensor,
    encode_batch,
    encode_window,
    gaf_decode_diagonal,
    gaf_encode,
    gaf_encode_angular,
    minmax_normalize,
)
from gafdetect.errors import InvalidInput, ShapeError

from .helpers import bars, random_window


@pytest.mark.parametrize(
    "x, expected",
    [
        ([10, 20, 30], [0.0, 0.5, 1.0]),
        ([7, 7, 7], [0.5, 0.5, 0.5]),
        ([0, 1], [0.0, 1.0]),
        ([-3.0], [0.5]),
    ],
)
def test__minmax_normalize__must_scale_to_unit_interval(x, expected):
    np.testing.assert_allclose(minmax_normalize(x), expected)


def test__minmax_normalize__must_scale_each_row_independently():
    actual = minmax_normalize([[1.0, 2.0, 3.0], [5.0, 5.0, 5.0]], axis=-1)
    np.testing.assert_allclose(actual, [[0.0, 0.5, 1.0], [0.5, 0.5, 0.5]])


def test__minmax_normalize__must_raise_invalid_input__when_empty():
    with pytest.raises(InvalidInput):
        minmax_normalize([])


@pytest.mark.parametrize(
    "x, expected",
    [
        ([0.0, 1.0], [[-1.0, 0.0], [0.0, 1.0]]),
        (
            [0.0, 0.5, 1.0],
            [[-1.0, -0.86603, 0.0], [-0.86603, -0.5, 0.5], [0.0, 0.5, 1.0]],
        ),
        ([0.5, 0.5, 0.5], [[-0.5] * 3] * 3),
    ],
)
def test__gaf_encode__must_match_cosine_of_angle_sums(x, expected):
    np.testing.assert_allclose(gaf_encode(x), expected, atol=1e-5)


@pytest.mark.parametrize("x", [[-0.1, 0.5], [0.2, 1.01], [0.3, float("nan")]])
def test__gaf_encode__must_raise_invalid_input__when_values_leave_unit_interval(x):
    with pytest.raises(InvalidInput):
        gaf_encode(x)


def test__gaf_encode__must_absorb_rounding_just_outside_unit_interval():
    g = gaf_encode([-1e-12, 1 + 1e-12])
    np.testing.assert_allclose(g, [[-1.0, 0.0], [0.0, 1.0]], atol=1e-9)


def test__gaf_encode__must_be_symmetric_bounded_and_equal_to_angular_form():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        x = minmax_normalize(rng.normal(size=rng.integers(2, 33)))
        g = gaf_encode(x)
        assert np.array_equal(g, g.T)
        assert np.all(np.abs(g) <= 1 + 1e-12)
        np.testing.assert_allclose(g, gaf_encode_angular(x), rtol=0, atol=1e-9)
        np.testing.assert_allclose(gaf_decode_diagonal(g), x, rtol=0, atol=1e-9)


def test__gaf_encode__must_permute_diagonal_with_the_series():
    rng = np.random.default_rng(1)
    x = rng.uniform(size=10)
    order = rng.permutation(10)
    np.testing.assert_allclose(
        np.diag(gaf_encode(x[order])), np.diag(gaf_encode(x))[order]
    )


def test__gaf_encode__must_encode_leading_axes_as_batch():
    rng = np.random.default_rng(2)
    x = rng.uniform(size=(3, 4, 6))
    g = gaf_encode(x)
    assert g.shape == (3, 4, 6, 6)
    np.testing.assert_array_equal(g[1, 2], gaf_encode(x[1, 2]))


@pytest.mark.parametrize(
    "diagonal, expected",
    [
        ([-1.0, -0.5, 1.0], [0.0, 0.5, 1.0]),
        ([1.0, 1.0], [1.0, 1.0]),
    ],
)
def test__gaf_decode_diagonal__must_invert_diagonal(diagonal, expected):
    np.testing.assert_allclose(gaf_decode_diagonal(np.diag(diagonal)), expected)


def test__gaf_decode_diagonal__must_round_trip_example_series():
    np.testing.assert_allclose(gaf_decode_diagonal(gaf_encode([0.3, 0.7])), [0.3, 0.7])


def test__gaf_decode_diagonal__must_raise_invalid_input__when_diagonal_out_of_range():
    with pytest.raises(InvalidInput):
        gaf_decode_diagonal(np.diag([0.5, 1.5]))


def test__gaf_decode_diagonal__must_raise_shape_error__when_not_square():
    with pytest.raises(ShapeError):
        gaf_decode_diagonal(np.zeros((2, 3)))


@pytest.mark.parametrize("feature_set", [FeatureSet.OHLC, FeatureSet.CULR])
def test__encode_window__must_return_four_symmetric_channels(feature_set):
    tensor = encode_window(random_window(np.random.default_rng(4)), feature_set)
    assert tensor.feature_set is feature_set
    assert tensor.channels.shape == (4, 16, 16)
    assert tensor.n == 16
    np.testing.assert_array_equal(tensor.channels, np.swapaxes(tensor.channels, 1, 2))


@pytest.mark.parametrize("feature_set", ["ohlc", "culr"])
def test__encode_window__must_give_minus_half__when_candles_are_identical(feature_set):
    window = bars([(1.0, 1.2, 0.9, 1.1)] * 16)
    np.testing.assert_allclose(encode_window(window, feature_set).channels, -0.5)


def test__encode_window__must_differ_between_feature_sets():
    window = random_window(np.random.default_rng(5))
    ohlc = encode_window(window, FeatureSet.OHLC).channels
    culr = encode_window(window, FeatureSet.CULR).channels
    assert not np.allclose(ohlc, culr)


def test__encode_window__must_raise_invalid_input__when_window_is_not_sixteen_bars():
    with pytest.raises(InvalidInput):
        encode_window(random_window(np.random.default_rng(6), n=15))


def test__decode_tensor__must_recover_normalized_features():
    window = random_window(np.random.default_rng(7))
    decoded = decode_tensor(encode_window(window, FeatureSet.OHLC))
    np.testing.assert_allclose(decoded[3], minmax_normalize(window.close), atol=1e-9)
    np.testing.assert_allclose(decoded[0], minmax_normalize(window.open), atol=1e-9)


@pytest.mark.parametrize("feature_set", [FeatureSet.OHLC, FeatureSet.CULR])
def test__encode_batch__must_equal_encode_window_per_window(feature_set):
    rng = np.random.default_rng(8)
    windows = [random_window(rng) for _ in range(5)]
    batch = encode_batch(np.stack([w.ohlc() for w in windows]), feature_set)
    assert batch.shape == (5, 4, 16, 16)
    for window, encoded in zip(windows, batch):
        np.testing.assert_allclose(
            encoded, encode_window(window, feature_set).channels, atol=1e-9
        )


def test__encode_batch__must_raise_shape_error__when_not_ohlc_columns():
    with pytest.raises(ShapeError):
        encode_batch(np.zeros((2, 16, 3)), FeatureSet.OHLC)


def test__gaf_tensor__must_raise_shape_error__when_channels_are_not_square():
    with pytest.raises(ShapeError):
        GafTensor(np.zeros((4, 16, 15)), FeatureSet.OHLC)

import pytest

from gafdetect.core.patterns import FeatureSet, PatternClass, TrendDirection
from gafdetect.core.samples import LabeledSample
from gafdetect.errors import InvalidInput

from .helpers import make_series

NAMES = [
    "MorningStar",
    "EveningStar",
    "BullishEngulfing",
    "BearishEngulfing",
    "ShootingStar",
    "InvertedHammer",
    "BullishHarami",
    "BearishHarami",
]


def test__pattern_class__must_map_ids_to_names_in_fixed_order():
    assert [c.display_name for c in PatternClass] == NAMES
    assert [c.id for c in PatternClass] == list(range(1, 9))
    for cls in PatternClass:
        assert PatternClass.from_id(cls.id) is cls
        assert PatternClass.from_display_name(cls.display_name) is cls
        assert cls.index == cls.id - 1


@pytest.mark.parametrize("bad_id", [0, 9, -1])
def test__pattern_class_from_id__must_raise_invalid_input__when_id_is_unknown(bad_id):
    with pytest.raises(InvalidInput):
        PatternClass.from_id(bad_id)


def test__pattern_class_partner__must_pair_bullish_with_bearish():
    for cls in PatternClass:
        assert cls.partner.partner is cls
        assert cls.partner.bullish is not cls.bullish
        expected = TrendDirection.DOWN if cls.bullish else TrendDirection.UP
        assert cls.trend is expected


@pytest.mark.parametrize(
    "value, expected",
    [
        ("ohlc", FeatureSet.OHLC),
        ("CULR", FeatureSet.CULR),
        (FeatureSet.CULR, FeatureSet.CULR),
    ],
)
def test__feature_set_parse__must_accept_names_and_values(value, expected):
    assert FeatureSet.parse(value) is expected


def test__feature_set_parse__must_raise_invalid_input__when_unknown():
    with pytest.raises(InvalidInput):
        FeatureSet.parse("hlc")


def test__labeled_sample__must_expose_the_trailing_pattern_bars():
    window = make_series([1.0 + 0.01 * i for i in range(16)])
    sample = LabeledSample(window, PatternClass.BEARISH_HARAMI, 6)
    assert len(sample.pattern_window) == 6
    assert sample.pattern_window[-1] == window[-1]
    assert sample.end_timestamp == int(window.timestamps[-1])


@pytest.mark.parametrize("window_size, length", [(4, 16), (17, 16), (8, 15)])
def test__labeled_sample__must_raise_invalid_input__when_sizes_are_out_of_range(
    window_size, length
):
    window = make_series([1.0 + 0.01 * i for i in range(length)])
    with pytest.raises(InvalidInput):
        LabeledSample(window, PatternClass.MORNING_STAR, window_size)

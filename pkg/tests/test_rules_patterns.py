from dataclasses import replace

import numpy as np
import pytest

from gafdetect.core.patterns import CandleColor, PatternClass, TrendDirection
from gafdetect.dataset import SyntheticConfig, generate_synthetic
from gafdetect.errors import InvalidInput
from gafdetect.rules import (
    DEFAULT_RULES,
    PatternRule,
    PatternRuleSet,
    RuleThresholds,
    calibrate_thresholds,
    match_pattern,
    mirror_window,
    trend_slope,
)

from .helpers import bars

THRESHOLDS = RuleThresholds(
    trend_cutoff_up=0.001,
    trend_cutoff_down=0.001,
    long_body_cutoff=0.05,
    short_body_cutoff=0.02,
)

# (open, high, low, close) of b1, b2, b3 after a steady uptrend ending near 1.24
LAST_THREE = {
    PatternClass.EVENING_STAR: [
        (1.24, 1.33, 1.23, 1.32),
        (1.33, 1.35, 1.325, 1.34),
        (1.33, 1.335, 1.25, 1.26),
    ],
    PatternClass.BEARISH_ENGULFING: [
        (1.24, 1.27, 1.23, 1.26),
        (1.26, 1.31, 1.255, 1.30),
        (1.31, 1.32, 1.24, 1.25),
    ],
    PatternClass.SHOOTING_STAR: [
        (1.26, 1.305, 1.255, 1.30),
        (1.305, 1.35, 1.30, 1.31),
        (1.30, 1.305, 1.26, 1.27),
    ],
    PatternClass.BEARISH_HARAMI: [
        (1.22, 1.25, 1.21, 1.24),
        (1.24, 1.33, 1.235, 1.32),
        (1.30, 1.305, 1.285, 1.29),
    ],
}


def trend_rows(direction=1, count=13):
    rows = []
    for i in range(count):
        close = 1.0 + direction * 0.02 * i if direction else 1.0
        open = close - direction * 0.01 if direction else 1.0
        rows.append((open, max(open, close) + 0.005, min(open, close) - 0.005, close))
    return rows


def bearish_window(pattern_class, direction=1):
    return bars(trend_rows(direction) + LAST_THREE[pattern_class])


@pytest.mark.parametrize("pattern_class", list(LAST_THREE))
def test__match_pattern__must_match_only_the_built_class(pattern_class):
    window = bearish_window(pattern_class)
    assert match_pattern(window, pattern_class, THRESHOLDS)
    assert DEFAULT_RULES.classify(window, THRESHOLDS) == [pattern_class]


@pytest.mark.parametrize("pattern_class", list(LAST_THREE))
def test__match_pattern__must_match_partner__when_window_is_mirrored(pattern_class):
    mirrored = mirror_window(bearish_window(pattern_class))
    partner = pattern_class.partner
    assert partner.trend is TrendDirection.DOWN
    assert match_pattern(mirrored, partner, THRESHOLDS.mirrored())
    assert DEFAULT_RULES.classify(mirrored, THRESHOLDS.mirrored()) == [partner]


@pytest.fixture(scope="module")
def generated_matches():
    corpus = generate_synthetic(SyntheticConfig(seed=7, n_bars=200_000))
    c = calibrate_thresholds(corpus)
    cutoffs = (
        c.trend_cutoff_up,
        c.trend_cutoff_down,
        c.long_body_cutoff,
        c.short_body_cutoff,
    )
    # nudged off the sample values the percentiles can land on
    t = RuleThresholds(*(v * (1 + 1e-7) for v in cutoffs))
    scan = DEFAULT_RULES.scan(corpus, t)
    windows = []
    for pattern_class in PatternClass:
        for end in scan.matching(pattern_class):
            window = corpus[int(end) - 15 : int(end) + 1]
            if match_pattern(window, pattern_class, t):
                windows.append((pattern_class, window))
    return t, windows


def test__match_pattern__must_match_partner__on_every_mirrored_generated_match(
    generated_matches,
):
    t, windows = generated_matches
    assert len(windows) >= 100
    classes = {pattern_class for pattern_class, _ in windows}
    assert any(c.bullish for c in classes)
    assert any(not c.bullish for c in classes)
    mirrored_t = t.mirrored()
    failures = [
        (pattern_class.display_name, int(window.timestamps[-1]))
        for pattern_class, window in windows
        if not match_pattern(mirror_window(window), pattern_class.partner, mirrored_t)
    ]
    assert failures == []


@pytest.mark.parametrize("pattern_class", list(LAST_THREE))
def test__match_pattern__must_reject__when_trend_is_missing(pattern_class):
    flat = bearish_window(pattern_class, direction=0)
    assert not match_pattern(flat, pattern_class, THRESHOLDS)
    falling = bearish_window(pattern_class, direction=-1)
    assert not match_pattern(falling, pattern_class, THRESHOLDS)


def test__match_pattern__must_reject_every_class__when_last_three_bars_are_doji():
    dojis = [(1.3, 1.31, 1.29, 1.3)] * 3
    for direction in (1, -1):
        window = bars(trend_rows(direction) + dojis)
        assert DEFAULT_RULES.classify(window, THRESHOLDS) == []


def test__match_pattern__must_use_the_whole_window_before_the_last_three():
    short = bars(trend_rows(count=2) + LAST_THREE[PatternClass.EVENING_STAR])
    assert len(short) == 5
    assert match_pattern(short, PatternClass.EVENING_STAR, THRESHOLDS)


def test__match_pattern__must_raise_invalid_input__when_window_is_too_short():
    window = bars(trend_rows(count=1) + LAST_THREE[PatternClass.EVENING_STAR])
    with pytest.raises(InvalidInput):
        match_pattern(window, PatternClass.EVENING_STAR, THRESHOLDS)


def test__match_pattern__must_reject__when_long_body_cutoff_rises_above_the_body():
    window = bearish_window(PatternClass.EVENING_STAR)
    raised = replace(THRESHOLDS, long_body_cutoff=0.1)
    assert not match_pattern(window, PatternClass.EVENING_STAR, raised)


def test__mirror_window__must_keep_slope_magnitude_and_flip_colors():
    window = bearish_window(PatternClass.EVENING_STAR)
    mirrored = mirror_window(window)
    assert trend_slope(mirrored.close[:13], 13) == pytest.approx(
        -trend_slope(window.close[:13], 13)
    )
    assert [c.color for c in mirrored[13:]] == [
        CandleColor.BLACK,
        CandleColor.BLACK,
        CandleColor.WHITE,
    ]


def test__pattern_rule_set__scan_must_agree_with_match(corpus, loose_thresholds):
    sample = corpus[:700]
    scan = DEFAULT_RULES.scan(sample, loose_thresholds)
    assert len(scan.end_indices) == 700 - 15
    for end in range(15, 700):
        window = sample[end - 15 : end + 1]
        row = end - 15
        for pattern_class in PatternClass:
            expected = DEFAULT_RULES.match(window, pattern_class, loose_thresholds)
            assert bool(scan.matches[pattern_class][row]) is expected


def test__pattern_rule_set__scan_must_never_match_both_stars(corpus, loose_thresholds):
    scan = DEFAULT_RULES.scan(corpus, loose_thresholds)
    evening = scan.matches[PatternClass.EVENING_STAR]
    both = evening & scan.matches[PatternClass.MORNING_STAR]
    assert not both.any()
    assert scan.matches[PatternClass.EVENING_STAR].any()


def test__pattern_rule_set__scan_must_only_lose_matches__when_long_body_cutoff_rises(
    corpus, loose_thresholds
):
    cutoff = 2 * loose_thresholds.long_body_cutoff
    raised = replace(loose_thresholds, long_body_cutoff=cutoff)
    before = DEFAULT_RULES.scan(corpus, loose_thresholds)
    after = DEFAULT_RULES.scan(corpus, raised)
    for pattern_class in PatternClass:
        assert not np.any(after.matches[pattern_class] & ~before.matches[pattern_class])


def test__pattern_rule_set__scan_must_reject_windows_shorter_than_five(corpus):
    with pytest.raises(InvalidInput):
        DEFAULT_RULES.scan(corpus[:50], THRESHOLDS, window=4)


def test__default_rules__must_define_every_class_with_partner_trends():
    assert len(DEFAULT_RULES) == 8
    for rule in DEFAULT_RULES:
        assert rule.trend is rule.pattern_class.trend
        partner = DEFAULT_RULES.rule(rule.pattern_class.partner)
        assert partner.trend is rule.trend.opposite()


def test__pattern_rule_set__must_raise_invalid_input__when_class_is_not_registered():
    rules = PatternRuleSet([DEFAULT_RULES.rule(PatternClass.EVENING_STAR)])
    assert PatternClass.EVENING_STAR in rules
    with pytest.raises(InvalidInput):
        rules.match(
            bearish_window(PatternClass.EVENING_STAR),
            PatternClass.MORNING_STAR,
            THRESHOLDS,
        )


def test__pattern_rule_set__register_must_replace_rule_of_same_class():
    rules = PatternRuleSet(DEFAULT_RULES)
    original = rules.rule(PatternClass.EVENING_STAR)
    loosened = PatternRule(
        PatternClass.EVENING_STAR, TrendDirection.UP, original.clauses[:1]
    )
    rules.register(loosened)
    assert len(rules) == 8
    assert rules.rule(PatternClass.EVENING_STAR) is loosened


def test__pattern_rule__must_raise_invalid_input__when_trend_or_clauses_are_missing():
    clauses = DEFAULT_RULES.rule(PatternClass.EVENING_STAR).clauses
    with pytest.raises(InvalidInput):
        PatternRule(PatternClass.EVENING_STAR, TrendDirection.NONE, clauses)
    with pytest.raises(InvalidInput):
        PatternRule(PatternClass.EVENING_STAR, TrendDirection.UP, ())


def test__default_rules_describe__must_match_the_shipped_reference():
    text = DEFAULT_RULES.describe()
    assert text.startswith("## MorningStar\n\n- trend: Down\n- b1 black: close1 < open1")
    assert "- b3 inside b2: top3 <= top2 and bottom3 > bottom2" in text
    assert text.count("## ") == 8

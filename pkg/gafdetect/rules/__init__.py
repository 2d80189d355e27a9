from .trend import TrendAssessment, assess_trend, trend_slope, window_trend_slopes
from .thresholds import RuleThresholds, calibrate_thresholds
from .patterns import (
    DEFAULT_RULES,
    Bars,
    Clause,
    PatternRule,
    PatternRuleSet,
    RuleScan,
    build_default_rules,
    match_pattern,
    mirror_window,
)

__all__ = [
    "TrendAssessment",
    "assess_trend",
    "trend_slope",
    "window_trend_slopes",
    "RuleThresholds",
    "calibrate_thresholds",
    "DEFAULT_RULES",
    "Bars",
    "Clause",
    "PatternRule",
    "PatternRuleSet",
    "RuleScan",
    "build_default_rules",
    "match_pattern",
    "mirror_window",
]

"""
Rule definitions of the eight candlestick patterns.

Every pattern is a trend requirement on the bars before the last three plus a list of
clauses on the last three bars (b1, b2, b3, oldest first). Clauses are numpy predicates
over columns of bars, so one definition serves both a single window and a vectorised
scan over every window of a corpus.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, NamedTuple, Optional, Tuple
import logging

import numpy as np

from ..core.candles import OhlcSeries
from ..core.patterns import PatternClass, TrendDirection
from ..core.samples import MIN_WINDOW, WINDOW
from ..errors import InvalidInput
from .thresholds import RuleThresholds
from .trend import direction_code, direction_codes, ols_slopes, window_trend_slopes

logger = logging.getLogger(__name__)


class Bars(NamedTuple):
    """Columns of one bar position across many windows."""

    open: np.ndarray
    high: np.ndarray
    low: np.ndarray
    close: np.ndarray

    @property
    def body(self) -> np.ndarray:
        return np.abs(self.close - self.open)

    @property
    def top(self) -> np.ndarray:
        return np.maximum(self.open, self.close)

    @property
    def bottom(self) -> np.ndarray:
        return np.minimum(self.open, self.close)

    @property
    def upper(self) -> np.ndarray:
        return self.high - self.top

    @property
    def lower(self) -> np.ndarray:
        return self.bottom - self.low

    @property
    def mid(self) -> np.ndarray:
        return (self.open + self.close) / 2.0

    @property
    def white(self) -> np.ndarray:
        return self.close > self.open

    @property
    def black(self) -> np.ndarray:
        return self.close < self.open

    @classmethod
    def at(cls, series: OhlcSeries, index) -> "Bars":
        return cls(
            series.open[index],
            series.high[index],
            series.low[index],
            series.close[index],
        )


Predicate = Callable[[Bars, Bars, Bars, RuleThresholds], np.ndarray]


@dataclass(frozen=True)
class Clause:
    """One named condition on the three decisive bars."""

    name: str
    description: str
    predicate: Predicate


@dataclass(frozen=True)
class PatternRule:
    """
    The complete rule of one pattern class.

    Attributes:
        pattern_class (PatternClass): The class the rule labels.
        trend (TrendDirection): The trend required before the three decisive bars.
        clauses (Tuple[Clause, ...]): Conditions that must all hold on the last three bars.
    """

    pattern_class: PatternClass
    trend: TrendDirection
    clauses: Tuple[Clause, ...]

    def __post_init__(self):
        if self.trend not in (TrendDirection.UP, TrendDirection.DOWN):
            raise InvalidInput(
                f"{self.pattern_class.display_name} needs an UP or DOWN trend"
            )
        if not self.clauses:
            raise InvalidInput(f"{self.pattern_class.display_name} has no clauses")

    def bars_hold(self, b1: Bars, b2: Bars, b3: Bars, t: RuleThresholds) -> np.ndarray:
        result = np.ones(np.shape(b1.close), dtype=bool)
        for clause in self.clauses:
            result &= clause.predicate(b1, b2, b3, t)
        return result


@dataclass(frozen=True)
class RuleScan:
    """
    Rule evaluation over every sliding window of a corpus.

    Attributes:
        end_indices (np.ndarray): Corpus index of each window's last bar.
        slopes (np.ndarray): Trend slope of each window.
        directions (np.ndarray): Trend direction code per window (1 up, -1 down, 0 none).
        matches (Dict[PatternClass, np.ndarray]): Boolean match mask per class.
    """

    end_indices: np.ndarray
    slopes: np.ndarray
    directions: np.ndarray
    matches: Dict[PatternClass, np.ndarray]

    def matching(self, pattern_class: PatternClass) -> np.ndarray:
        """End indices of the windows matching `pattern_class`."""
        return self.end_indices[self.matches[pattern_class]]


class PatternRuleSet:
    """
    Registry of pattern rules, one per class.

    Attributes:
        _rules (Dict[PatternClass, PatternRule]): Registered rules keyed by class.
    """

    def __init__(self, rules=()):
        self._rules: Dict[PatternClass, PatternRule] = {}
        for rule in rules:
            self.register(rule)

    def register(self, rule: PatternRule) -> None:
        """
        Add a rule, replacing any earlier rule of the same class.

        Args:
            rule (PatternRule): The rule to register.
        """
        if rule.pattern_class in self._rules:
            logger.debug("Replacing rule for %s", rule.pattern_class.display_name)
        self._rules[rule.pattern_class] = rule

    def rule(self, pattern_class: PatternClass) -> PatternRule:
        try:
            return self._rules[pattern_class]
        except KeyError as e:
            raise InvalidInput(
                f"No rule registered for {pattern_class.display_name}"
            ) from e

    def __iter__(self) -> Iterator[PatternRule]:
        return iter(sorted(self._rules.values(), key=lambda r: r.pattern_class.id))

    def __len__(self) -> int:
        return len(self._rules)

    def __contains__(self, pattern_class) -> bool:
        return pattern_class in self._rules

    def match(
        self, window: OhlcSeries, pattern_class: PatternClass, t: RuleThresholds
    ) -> bool:
        """
        Whether a window matches one pattern class.

        The trend requirement is checked on every bar except the last three, the clauses
        on the last three bars.

        Raises:
            InvalidInput: If the window has fewer than 5 candles or no rule is registered.
        """
        rule = self.rule(pattern_class)
        code = self._window_direction(window, t)
        if code != direction_code(rule.trend):
            return False
        return bool(rule.bars_hold(*self._last_three(window), t)[0])

    def classify(self, window: OhlcSeries, t: RuleThresholds) -> List[PatternClass]:
        """
        Every registered class the window matches, in id order.

        Raises:
            InvalidInput: If the window has fewer than 5 candles.
        """
        code = self._window_direction(window, t)
        bars = self._last_three(window)
        return [
            rule.pattern_class
            for rule in self
            if code == direction_code(rule.trend) and bool(rule.bars_hold(*bars, t)[0])
        ]

    def scan(
        self, corpus: OhlcSeries, t: RuleThresholds, window: int = WINDOW
    ) -> RuleScan:
        """
        Evaluate every registered rule on every sliding window of a corpus.

        Gives the same answer as `match` on each window.

        Args:
            corpus (OhlcSeries): The series to scan.
            t (RuleThresholds): Calibrated thresholds.
            window (int): Window length.

        Returns:
            RuleScan: Per-window slopes, trend directions and match masks.
        """
        if window < MIN_WINDOW:
            raise InvalidInput(
                f"Windows need at least {MIN_WINDOW} candles, got {window}"
            )
        slopes = window_trend_slopes(corpus.close, window)
        end_indices = np.arange(window - 1, window - 1 + len(slopes))
        codes = direction_codes(slopes, t.trend_cutoff_up, t.trend_cutoff_down)
        b1 = Bars.at(corpus, end_indices - 2)
        b2 = Bars.at(corpus, end_indices - 1)
        b3 = Bars.at(corpus, end_indices)
        matches = {}
        for rule in self:
            trending = codes == direction_code(rule.trend)
            matches[rule.pattern_class] = trending & rule.bars_hold(b1, b2, b3, t)
            logger.debug(
                "%s matches %d of %d windows",
                rule.pattern_class.display_name,
                int(matches[rule.pattern_class].sum()),
                len(slopes),
            )
        return RuleScan(end_indices, slopes, codes, matches)

    def describe(self) -> str:
        """A markdown listing of every rule's trend requirement and clauses."""
        lines = []
        for rule in self:
            lines.append(f"## {rule.pattern_class.display_name}")
            lines.append("")
            lines.append(f"- trend: {rule.trend.value}")
            for clause in rule.clauses:
                lines.append(f"- {clause.name}: {clause.description}")
            lines.append("")
        return "\n".join(lines)

    @staticmethod
    def _window_direction(window: OhlcSeries, t: RuleThresholds) -> int:
        if len(window) < MIN_WINDOW:
            raise InvalidInput(
                f"Pattern windows need at least {MIN_WINDOW} candles, got {len(window)}"
            )
        slope = ols_slopes(window.close[None, : len(window) - 3])
        return int(direction_codes(slope, t.trend_cutoff_up, t.trend_cutoff_down)[0])

    @staticmethod
    def _last_three(window: OhlcSeries) -> Tuple[Bars, Bars, Bars]:
        n = len(window)
        return tuple(Bars.at(window, np.array([i])) for i in (n - 3, n - 2, n - 1))


def _clause(name: str, description: str, predicate: Predicate) -> Clause:
    return Clause(name, description, predicate)


def _long(x, t):
    return x > t.long_body_cutoff


def _short(x, t):
    return x < t.short_body_cutoff


def build_default_rules() -> PatternRuleSet:
    """
    The shipped rule set.

    Bullish and bearish partners are exact price mirrors of each other: white and black
    swap, tops and bottoms swap, upper and lower shadows swap.
    """
    up, down = TrendDirection.UP, TrendDirection.DOWN
    rules = [
        PatternRule(
            PatternClass.EVENING_STAR,
            up,
            (
                _clause("b1 white", "close1 > open1", lambda b1, b2, b3, t: b1.white),
                _clause(
                    "b1 long",
                    "body1 > long_body_cutoff",
                    lambda b1, b2, b3, t: _long(b1.body, t),
                ),
                _clause(
                    "b2 short",
                    "body2 < short_body_cutoff",
                    lambda b1, b2, b3, t: _short(b2.body, t),
                ),
                _clause(
                    "b2 gaps up",
                    "bottom2 >= top1",
                    lambda b1, b2, b3, t: b2.bottom >= b1.top,
                ),
                _clause("b3 black", "close3 < open3", lambda b1, b2, b3, t: b3.black),
                _clause(
                    "b3 closes deep",
                    "close3 < mid1",
                    lambda b1, b2, b3, t: b3.close < b1.mid,
                ),
            ),
        ),
        PatternRule(
            PatternClass.MORNING_STAR,
            down,
            (
                _clause("b1 black", "close1 < open1", lambda b1, b2, b3, t: b1.black),
                _clause(
                    "b1 long",
                    "body1 > long_body_cutoff",
                    lambda b1, b2, b3, t: _long(b1.body, t),
                ),
                _clause(
                    "b2 short",
                    "body2 < short_body_cutoff",
                    lambda b1, b2, b3, t: _short(b2.body, t),
                ),
                _clause(
                    "b2 gaps down",
                    "top2 <= bottom1",
                    lambda b1, b2, b3, t: b2.top <= b1.bottom,
                ),
                _clause("b3 white", "close3 > open3", lambda b1, b2, b3, t: b3.white),
                _clause(
                    "b3 closes deep",
                    "close3 > mid1",
                    lambda b1, b2, b3, t: b3.close > b1.mid,
                ),
            ),
        ),
        PatternRule(
            PatternClass.BEARISH_ENGULFING,
            up,
            (
                _clause("b1 white", "close1 > open1", lambda b1, b2, b3, t: b1.white),
                _clause("b2 white", "close2 > open2", lambda b1, b2, b3, t: b2.white),
                _clause(
                    "b2 not short",
                    "body2 >= short_body_cutoff",
                    lambda b1, b2, b3, t: ~_short(b2.body, t),
                ),
                _clause("b3 black", "close3 < open3", lambda b1, b2, b3, t: b3.black),
                _clause(
                    "b3 covers top",
                    "top3 >= top2",
                    lambda b1, b2, b3, t: b3.top >= b2.top,
                ),
                _clause(
                    "b3 breaks bottom",
                    "bottom3 < bottom2",
                    lambda b1, b2, b3, t: b3.bottom < b2.bottom,
                ),
            ),
        ),
        PatternRule(
            PatternClass.BULLISH_ENGULFING,
            down,
            (
                _clause("b1 black", "close1 < open1", lambda b1, b2, b3, t: b1.black),
                _clause("b2 black", "close2 < open2", lambda b1, b2, b3, t: b2.black),
                _clause(
                    "b2 not short",
                    "body2 >= short_body_cutoff",
                    lambda b1, b2, b3, t: ~_short(b2.body, t),
                ),
                _clause("b3 white", "close3 > open3", lambda b1, b2, b3, t: b3.white),
                _clause(
                    "b3 covers bottom",
                    "bottom3 <= bottom2",
                    lambda b1, b2, b3, t: b3.bottom <= b2.bottom,
                ),
                _clause(
                    "b3 breaks top",
                    "top3 > top2",
                    lambda b1, b2, b3, t: b3.top > b2.top,
                ),
            ),
        ),
        PatternRule(
            PatternClass.SHOOTING_STAR,
            up,
            (
                _clause("b1 white", "close1 > open1", lambda b1, b2, b3, t: b1.white),
                _clause(
                    "b2 short",
                    "body2 < short_body_cutoff",
                    lambda b1, b2, b3, t: _short(b2.body, t),
                ),
                _clause(
                    "b2 gaps up",
                    "bottom2 >= top1",
                    lambda b1, b2, b3, t: b2.bottom >= b1.top,
                ),
                _clause(
                    "b2 long upper shadow",
                    "upper2 > long_body_cutoff / 2 and upper2 >= 2 * body2",
                    lambda b1, b2, b3, t: (b2.upper > t.long_body_cutoff / 2)
                    & (b2.upper >= 2 * b2.body),
                ),
                _clause(
                    "b2 small lower shadow",
                    "lower2 < short_body_cutoff",
                    lambda b1, b2, b3, t: _short(b2.lower, t),
                ),
                _clause("b3 black", "close3 < open3", lambda b1, b2, b3, t: b3.black),
                _clause(
                    "b3 closes below star",
                    "close3 < bottom2",
                    lambda b1, b2, b3, t: b3.close < b2.bottom,
                ),
            ),
        ),
        PatternRule(
            PatternClass.INVERTED_HAMMER,
            down,
            (
                _clause("b1 black", "close1 < open1", lambda b1, b2, b3, t: b1.black),
                _clause(
                    "b2 short",
                    "body2 < short_body_cutoff",
                    lambda b1, b2, b3, t: _short(b2.body, t),
                ),
                _clause(
                    "b2 gaps down",
                    "top2 <= bottom1",
                    lambda b1, b2, b3, t: b2.top <= b1.bottom,
                ),
                _clause(
                    "b2 long lower shadow",
                    "lower2 > long_body_cutoff / 2 and lower2 >= 2 * body2",
                    lambda b1, b2, b3, t: (b2.lower > t.long_body_cutoff / 2)
                    & (b2.lower >= 2 * b2.body),
                ),
                _clause(
                    "b2 small upper shadow",
                    "upper2 < short_body_cutoff",
                    lambda b1, b2, b3, t: _short(b2.upper, t),
                ),
                _clause("b3 white", "close3 > open3", lambda b1, b2, b3, t: b3.white),
                _clause(
                    "b3 closes above star",
                    "close3 > top2",
                    lambda b1, b2, b3, t: b3.close > b2.top,
                ),
            ),
        ),
        PatternRule(
            PatternClass.BEARISH_HARAMI,
            up,
            (
                _clause("b1 white", "close1 > open1", lambda b1, b2, b3, t: b1.white),
                _clause("b2 white", "close2 > open2", lambda b1, b2, b3, t: b2.white),
                _clause(
                    "b2 long",
                    "body2 > long_body_cutoff",
                    lambda b1, b2, b3, t: _long(b2.body, t),
                ),
                _clause("b3 black", "close3 < open3", lambda b1, b2, b3, t: b3.black),
                _clause(
                    "b3 short",
                    "body3 < short_body_cutoff",
                    lambda b1, b2, b3, t: _short(b3.body, t),
                ),
                _clause(
                    "b3 inside b2",
                    "top3 <= top2 and bottom3 > bottom2",
                    lambda b1, b2, b3, t: (b3.top <= b2.top) & (b3.bottom > b2.bottom),
                ),
            ),
        ),
        PatternRule(
            PatternClass.BULLISH_HARAMI,
            down,
            (
                _clause("b1 black", "close1 < open1", lambda b1, b2, b3, t: b1.black),
                _clause("b2 black", "close2 < open2", lambda b1, b2, b3, t: b2.black),
                _clause(
                    "b2 long",
                    "body2 > long_body_cutoff",
                    lambda b1, b2, b3, t: _long(b2.body, t),
                ),
                _clause("b3 white", "close3 > open3", lambda b1, b2, b3, t: b3.white),
                _clause(
                    "b3 short",
                    "body3 < short_body_cutoff",
                    lambda b1, b2, b3, t: _short(b3.body, t),
                ),
                _clause(
                    "b3 inside b2",
                    "bottom3 >= bottom2 and top3 < top2",
                    lambda b1, b2, b3, t: (b3.bottom >= b2.bottom) & (b3.top < b2.top),
                ),
            ),
        ),
    ]
    return PatternRuleSet(rules)


DEFAULT_RULES = build_default_rules()


def match_pattern(
    window: OhlcSeries,
    pattern_class: PatternClass,
    t: RuleThresholds,
    rules: Optional[PatternRuleSet] = None,
) -> bool:
    """
    Whether a window matches a pattern class under the given thresholds.

    Args:
        window (OhlcSeries): At least 5 candles, oldest first.
        pattern_class (PatternClass): The class to test.
        t (RuleThresholds): Calibrated thresholds.
        rules (Optional[PatternRuleSet]): Rule set to use; the shipped rules by default.

    Returns:
        bool: True iff the trend requirement and every clause hold.

    Raises:
        InvalidInput: If the window has fewer than 5 candles.
    """
    return (rules or DEFAULT_RULES).match(window, pattern_class, t)


def mirror_window(window: OhlcSeries) -> OhlcSeries:
    """
    Reflect a window's prices about the mean close of its trend segment.

    The reflection keeps the trend segment's mean, so the scale-free slope keeps its
    magnitude and flips its sign. A match of one class becomes a match of its partner
    under `RuleThresholds.mirrored()`.

    Raises:
        InvalidInput: If the window has fewer than 5 candles or a reflected price is not positive.
    """
    if len(window) < MIN_WINDOW:
        raise InvalidInput(
            f"Pattern windows need at least {MIN_WINDOW} candles, got {len(window)}"
        )
    pivot = 2.0 * float(np.mean(window.close[: len(window) - 3]))
    return window.mirrored(pivot)

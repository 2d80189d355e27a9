from enum import Enum

from ..errors import InvalidInput


class CandleColor(Enum):
    WHITE = "White"
    BLACK = "Black"
    DOJI = "Doji"


class TrendDirection(Enum):
    UP = "Up"
    DOWN = "Down"
    NONE = "None"

    def opposite(self) -> "TrendDirection":
        if self is TrendDirection.UP:
            return TrendDirection.DOWN
        elif self is TrendDirection.DOWN:
            return TrendDirection.UP
        return TrendDirection.NONE


class FeatureSet(Enum):
    """The two four-channel feature representations of a candlestick window."""

    OHLC = "ohlc"
    CULR = "culr"

    @classmethod
    def parse(cls, value) -> "FeatureSet":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            try:
                return cls[str(value).upper()]
            except KeyError as e:
                raise InvalidInput(f"Unknown feature set: {value!r}") from e


class PatternClass(Enum):
    """
    The eight detectable candlestick patterns.

    Each member carries a fixed numeric id (1-8) and the display name used in reports
    and detection output. Bullish patterns follow a downtrend, bearish patterns an uptrend.

    Attributes:
        id (int): The class id used on disk and in model outputs (zero-based index is `id - 1`).
        display_name (str): The human readable name, e.g. ``MorningStar``.
        bullish (bool): Whether the pattern signals an upward reversal.
    """

    MORNING_STAR = (1, "MorningStar", True)
    EVENING_STAR = (2, "EveningStar", False)
    BULLISH_ENGULFING = (3, "BullishEngulfing", True)
    BEARISH_ENGULFING = (4, "BearishEngulfing", False)
    SHOOTING_STAR = (5, "ShootingStar", False)
    INVERTED_HAMMER = (6, "InvertedHammer", True)
    BULLISH_HARAMI = (7, "BullishHarami", True)
    BEARISH_HARAMI = (8, "BearishHarami", False)

    def __init__(self, id, display_name, bullish):
        self.id = id
        self.display_name = display_name
        self.bullish = bullish

    @property
    def index(self) -> int:
        return self.id - 1

    @classmethod
    def from_id(cls, id: int) -> "PatternClass":
        """
        Look up a member by its numeric id.

        Raises:
            InvalidInput: If no member has this id.
        """
        for member in cls:
            if member.id == int(id):
                return member
        raise InvalidInput(f"No {cls.__name__} with id {id}")

    @classmethod
    def from_display_name(cls, display_name: str) -> "PatternClass":
        for member in cls:
            if member.display_name == display_name:
                return member
        raise InvalidInput(f"No {cls.__name__} named {display_name!r}")

    @property
    def partner(self) -> "PatternClass":
        """The pattern of opposite direction that this one maps to under price mirroring."""
        return _PARTNERS[self]

    @property
    def trend(self) -> TrendDirection:
        """The trend that must precede the pattern's three decisive bars."""
        return TrendDirection.DOWN if self.bullish else TrendDirection.UP


_PARTNERS = {
    PatternClass.MORNING_STAR: PatternClass.EVENING_STAR,
    PatternClass.EVENING_STAR: PatternClass.MORNING_STAR,
    PatternClass.BULLISH_ENGULFING: PatternClass.BEARISH_ENGULFING,
    PatternClass.BEARISH_ENGULFING: PatternClass.BULLISH_ENGULFING,
    PatternClass.SHOOTING_STAR: PatternClass.INVERTED_HAMMER,
    PatternClass.INVERTED_HAMMER: PatternClass.SHOOTING_STAR,
    PatternClass.BULLISH_HARAMI: PatternClass.BEARISH_HARAMI,
    PatternClass.BEARISH_HARAMI: PatternClass.BULLISH_HARAMI,
}

N_CLASSES = len(PatternClass)

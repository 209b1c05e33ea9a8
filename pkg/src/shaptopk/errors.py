"""Exception types shared across the library."""


class ShapTopkError(Exception):
    """Base class for all library errors."""


class BudgetExhausted(ShapTopkError):
    """A charged evaluation was requested at the budget limit."""


class InvalidSize(ShapTopkError):
    """A game constructor received an invalid player count."""


class InvalidCarrier(ShapTopkError):
    """A carrier game was requested with an empty or out-of-range carrier."""


class FormatError(ShapTopkError):
    """A tabular game file or experiment config is malformed."""


class SizeError(ShapTopkError):
    """The player count exceeds what an exhaustive computation supports."""


class InvalidK(ShapTopkError):
    """A top-k size outside 1..n, or a coalition of the wrong cardinality."""


class LengthMismatch(ShapTopkError):
    """Two player-indexed vectors of different length were combined."""


class SamePlayer(ShapTopkError):
    """A pairwise quantity was requested for a player paired with itself."""


class DomainError(ShapTopkError):
    """A numeric argument lies outside the function's domain."""


class NotMultiple(ShapTopkError):
    """A budget was required to be a multiple of n+1 but is not."""


class ConfigError(ShapTopkError):
    """An experiment configuration is invalid; message carries line info."""

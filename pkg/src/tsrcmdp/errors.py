"""Exception hierarchy shared by every module."""


class CmdpError(Exception):
    """Base class for all solver errors."""


class InvalidInstance(CmdpError, ValueError):
    pass


class UndefinedAction(CmdpError, LookupError):
    """A policy has no action for a history reached during evaluation."""


class CapExceeded(CmdpError):
    """The instance is too large for an exhaustive path (exact solve or oracle)."""


class MissingEntry(CmdpError, LookupError):
    """An augmented policy has no admissible action at a visited augmented state."""


class NegativeRewards(CmdpError, ValueError):
    """Relative rounding requires every reward to be non-negative."""


class NonPositiveEpsilon(CmdpError, ValueError):
    pass


class OutOfRange(CmdpError, ValueError):
    """A value lies below the additive grid's partial-sum floor."""


class LengthMismatch(CmdpError, ValueError):
    pass


class DimensionMismatch(CmdpError, ValueError):
    """A policy file does not fit the instance it is executed on."""


class FormatError(CmdpError, ValueError):
    """An instance, problem or policy file cannot be parsed."""

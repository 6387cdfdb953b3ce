"""Shared exception types."""


class GenusKitError(Exception):
    """Base class for every error raised by this package."""


class FamilyError(GenusKitError, ValueError):
    """A partition family failed validation; the message names the offender."""


class DomainError(GenusKitError):
    """An operation was applied outside its stated domain of definition."""


class VerificationError(GenusKitError):
    """A randomized or exact verification suite found a violation."""

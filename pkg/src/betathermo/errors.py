"""Exception hierarchy.

Every error raised for a well-formed request that the mathematics (or the
available digit depth / precision) cannot satisfy derives from
:class:`BetaThermoError`.  The CLI maps these to exit status 2.
"""

from __future__ import annotations


class BetaThermoError(Exception):
    """Base class for domain errors."""

    kind = "BetaThermoError"

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self)}


class PrecisionExhausted(BetaThermoError):
    kind = "PrecisionExhausted"


class IntegerBeta(BetaThermoError):
    kind = "IntegerBeta"


class NoRoot(BetaThermoError):
    kind = "NoRoot"


class DepthExceeded(BetaThermoError):
    kind = "DepthExceeded"


class NotInLanguage(BetaThermoError):
    """A word is not in the language; ``position`` is the index of the
    rejected letter and ``suffix_start`` where the offending suffix begins."""

    kind = "NotInLanguage"

    def __init__(self, message: str, position: int | None = None,
                 suffix_start: int | None = None):
        super().__init__(message)
        self.position = position
        self.suffix_start = suffix_start

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["position"] = self.position
        d["suffix_start"] = self.suffix_start
        return d


class WindowTooLarge(BetaThermoError):
    kind = "WindowTooLarge"


class WindowTooSmall(BetaThermoError):
    kind = "WindowTooSmall"


class NotEventuallyPeriodic(BetaThermoError):
    kind = "NotEventuallyPeriodic"

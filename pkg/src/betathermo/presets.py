"""Named digit sequences used as fixtures and CLI shortcuts."""

from __future__ import annotations

from .digits import USER, DigitSeq, ZeroRunSchedule, expand_one

GOLDEN_BETA = "(1+sqrt 5)/2"
RATIONAL_BETA = "3/2"


def golden(depth: int = 16) -> DigitSeq:
    """``c = (10)^inf``, computed from the exact golden ratio."""
    return expand_one(GOLDEN_BETA, depth)


def tribonacci() -> DigitSeq:
    """``c = (110)^inf``: the quasi-greedy expansion for the tribonacci
    constant ``x^3 = x^2 + x + 1`` (its greedy expansion is ``111``)."""
    return DigitSeq((1, 1, 0), 2, USER, period=(0, 3))


def rational(depth: int = 64) -> DigitSeq:
    """Digits of ``beta = 3/2``; not eventually periodic, so finite depth."""
    return expand_one(RATIONAL_BETA, depth)


def witness(depth: int = 32) -> DigitSeq:
    """``c = 1 0^2 1 0^4 1 0^8 ...``: zero runs double, so ``zbar(n)/n``
    does not tend to 0."""
    schedule = ZeroRunSchedule(2, 2)
    return DigitSeq(schedule.prefix(depth), 2, USER, schedule=schedule)


PRESETS = {
    "golden": golden,
    "tribonacci": tribonacci,
    "rational": rational,
    "3/2": rational,
    "witness": witness,
}

BETA_PRESETS = {"golden": GOLDEN_BETA, "rational": RATIONAL_BETA, "3/2": RATIONAL_BETA}


def preset(name: str) -> DigitSeq:
    try:
        return PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


__all__ = ["golden", "tribonacci", "rational", "witness", "preset", "PRESETS"]

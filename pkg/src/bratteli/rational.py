"""Exact rational parsing and formatting shared by the library and the CLI.

Probabilities in this package are arbitrary-precision rationals throughout;
floats are rejected at the boundary instead of being silently truncated.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import IncompatibleData


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions, and 'num/den' strings; refuse floats."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise IncompatibleData(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise IncompatibleData(f"not a rational: {value!r} ({exc})") from None
    raise IncompatibleData(
        f"not an exact rational: {value!r} (floats are not accepted; use 'num/den')"
    )


def format_fraction(q: Fraction) -> str:
    """Canonical 'num/den' form, denominator always present ('3/1', '-1/2')."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"

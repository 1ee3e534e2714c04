"""Conversions between exact rationals, user strings and mpmath numbers."""

import math
from fractions import Fraction

import mpmath

INF = math.inf


def is_exact(value):
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def is_inf(value):
    if isinstance(value, (int, Fraction)):
        return False
    try:
        return bool(mpmath.isinf(value))
    except TypeError:
        return False


def parse_number(value):
    """
    Parses ints, floats, decimal strings and "p/q" rationals into exact Fractions.
    "inf" maps to math.inf, complex strings such as "1+2j" to mpc.
    """
    if isinstance(value, bool):
        raise ValueError(f"Expected a number, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return INF
        return Fraction(value)
    if isinstance(value, (mpmath.mpf, mpmath.mpc)):
        return value
    if isinstance(value, complex):
        return mpmath.mpc(value.real, value.imag)
    text = str(value).strip().replace(" ", "")
    if text.lower() in ("inf", "+inf", "infinity"):
        return INF
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        pass
    try:
        c = complex(text)
    except ValueError:
        raise ValueError(f"Could not parse number {value!r}") from None
    return mpmath.mpc(c.real, c.imag)


def to_mp(value):
    """Converts to an mpmath number at the working precision."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return mpmath.mpf(value.numerator)
        return mpmath.mpf(value.numerator) / value.denominator
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (mpmath.mpf, mpmath.mpc)):
        # Re-rounds to the working precision
        return +value
    return mpmath.mpmathify(value)


def magnitude(value):
    """|value| as an exact Fraction when possible, else as mpf."""
    if is_exact(value):
        return abs(Fraction(value))
    if is_inf(value):
        return INF
    return abs(to_mp(value))


def lt(left, right):
    """left < right across Fraction, mpf and infinity."""
    if is_inf(right):
        return not is_inf(left)
    if is_inf(left):
        return False
    if is_exact(left) and is_exact(right):
        return left < right
    return to_mp(left) < to_mp(right)


def smallest(values):
    """Minimum over mixed exact and mp values, keeping the winner's own type."""
    best = None
    for value in values:
        if best is None or lt(value, best):
            best = value
    return best


def as_plain(value):
    """Exact integral Fractions become ints; everything else is returned as is."""
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    return value


def largest(values, default=None):
    best = default
    for value in values:
        if best is None or lt(best, value):
            best = value
    return best


def total(values):
    """Sum that stays exact when every term is exact."""
    values = list(values)
    if all(is_exact(v) for v in values):
        return sum((Fraction(v) for v in values), Fraction(0))
    return mpmath.fsum(to_mp(v) for v in values)

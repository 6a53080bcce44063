"""Extended nonnegative values: exact rationals plus a distinguished infinity.

Finite values are :class:`fractions.Fraction`; infinity is ``math.inf``.
Python already orders, maxes and adds these correctly; the only trap is
``0 * inf``, which :func:`scale` handles.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Union

INF = math.inf

ExtValue = Union[Fraction, float]


def is_inf(v) -> bool:
    return v == INF


def to_rational(text) -> Fraction:
    """Parse ``"p/q"``, an integer or a decimal string into an exact Fraction.

    Binary floats are refused so that values never pick up rounding noise.
    """
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        raise ValueError(f"binary float {text!r} is not exact; pass it as a string")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational: {text!r}") from exc


def parse_value(text) -> ExtValue:
    if isinstance(text, str) and text.strip().lower() in ("inf", "infinity", "∞"):
        return INF
    return to_rational(text)


def format_value(v) -> str:
    if is_inf(v):
        return "inf"
    return str(Fraction(v))


def scale(factor: Fraction, v) -> ExtValue:
    # factor * inf is inf even for factor 0: a mismatch anywhere in a trace
    # makes the guarded distance infinite regardless of discounting
    if is_inf(v):
        return INF
    return factor * v


def ext_sub(a, b) -> ExtValue:
    """|a - b| with inf - inf taken as 0 (both diverge together)."""
    if is_inf(a) and is_inf(b):
        return Fraction(0)
    if is_inf(a) or is_inf(b):
        return INF
    return abs(a - b)

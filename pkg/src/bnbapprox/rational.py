"""Exact rational arithmetic shared by every solver component.

All bounds, profits, processing times and profile coordinates are
`fractions.Fraction` values. Fraction already guarantees the invariants the
solvers rely on: canonical form after every operation (positive denominator,
gcd-reduced), arbitrary-precision integers underneath, and a total order
consistent with the reals. This module adds the small set of operations the
rest of the package needs on top of that: exact comparison, floor division,
integer powers, common-denominator computation and the "num/den" text form
used in instance and result files.

Values are immutable; sharing them across threads is safe.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Union

Rat = Fraction

RatLike = Union[Rat, int, str]

LESS = -1
EQUAL = 0
GREATER = 1


def rat(value: RatLike, den: int | None = None) -> Rat:
    """Build a canonical rational from an int, a Fraction or "num/den" text."""
    if den is not None:
        return Fraction(value, den)
    if isinstance(value, str):
        return parse_rat(value)
    return Fraction(value)


def parse_rat(text: str) -> Rat:
    """Parse the canonical text form: "num" or "num/den"."""
    body = text.strip()
    if not body:
        raise ValueError("empty rational literal")
    num, sep, den = body.partition("/")
    try:
        if not sep:
            return Fraction(int(num))
        return Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad rational literal {text!r}") from exc


def format_rat(value: Rat) -> str:
    """Canonical text form; integers print without the "/1" suffix."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def compare(a: RatLike, b: RatLike) -> int:
    """Exact three-way comparison: LESS, EQUAL or GREATER. Never rounds."""
    a, b = rat(a), rat(b)
    if a < b:
        return LESS
    if a == b:
        return EQUAL
    return GREATER


def floor_div(a: RatLike, b: RatLike) -> int:
    """Exact floor(a / b) for rational a, b with b != 0."""
    a, b = rat(a), rat(b)
    if b == 0:
        raise ZeroDivisionError("floor_div by zero")
    q = a / b
    return q.numerator // q.denominator


def rat_pow(base: RatLike, exponent: int) -> Rat:
    """Exact integer power of a rational (negative exponents allowed)."""
    return rat(base) ** exponent


def lcm_denominators(values: Iterable[RatLike]) -> int:
    """Least common denominator of a collection of rationals (1 if empty)."""
    out = 1
    for v in values:
        out = math.lcm(out, rat(v).denominator)
    return out


def is_integral(value: RatLike) -> bool:
    return rat(value).denominator == 1

"""Exact-rational helpers: rounding, integer roots, decimal rendering.

Everything here works on int/Fraction only.  No floats: the sweep's
determinism and the bit-exact replay guarantee depend on it.
"""

from __future__ import annotations

from fractions import Fraction
from math import floor, gcd, isqrt

HALF = Fraction(1, 2)


def nearest_int(x: Fraction, drift: int = 0) -> int:
    """Nearest integer to x.

    Exact half-integer ties are broken by `drift`: drift < 0 treats x as
    sitting infinitesimally below the given value, drift > 0 above, and
    drift == 0 rounds toward zero.
    """
    two = 2 * Fraction(x)
    if two.denominator == 1 and two.numerator % 2 != 0:
        k = (two.numerator - 1) // 2  # x == k + 1/2 exactly
        if drift < 0:
            return k
        if drift > 0:
            return k + 1
        return k if x > 0 else k + 1
    return floor(x + HALF)


def sign(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def isqrt_floor(x: Fraction) -> int:
    """Largest integer m >= 0 with m*m <= x (x >= 0)."""
    if x < 0:
        raise ValueError("negative radicand")
    return isqrt(floor(x))


def nth_root_floor(x: int, n: int) -> int:
    """Largest integer r >= 0 with r**n <= x (x >= 0, n >= 1)."""
    if x < 0 or n < 1:
        raise ValueError("nth_root_floor needs x >= 0, n >= 1")
    if x == 0:
        return 0
    if n == 1:
        return x
    r = 1 << (x.bit_length() // n + 1)
    while True:  # Newton descent, monotone from above
        nr = ((n - 1) * r + x // r ** (n - 1)) // n
        if nr >= r:
            break
        r = nr
    while r ** n > x:
        r -= 1
    return r


def fraction_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(text: str) -> Fraction:
    """Parse "p/q", integer, or decimal literals exactly (never via float)."""
    return Fraction(text.strip())


def decimal_str(x: Fraction, sig: int = 12) -> str:
    """Fixed-form scientific rendering with `sig` significant digits.

    Rounding is half-up on the last digit; the format is deterministic so
    serialized traces compare byte-for-byte.
    """
    x = Fraction(x)
    if x == 0:
        return "0"
    neg = x < 0
    a = -x if neg else x
    # exponent e with 10^e <= a < 10^(e+1)
    e = len(str(a.numerator)) - len(str(a.denominator))
    while 10 ** e > a:
        e -= 1
    while 10 ** (e + 1) <= a:
        e += 1
    scaled = a * Fraction(10) ** (sig - 1 - e)
    m = floor(scaled + HALF)
    if m >= 10 ** sig:  # rounding rolled the mantissa over
        m //= 10
        e += 1
    digits = str(m)
    mantissa = digits[0] + "." + digits[1:]
    return f"{'-' if neg else ''}{mantissa}e{e:+03d}"


def vec_gcd(xs) -> int:
    g = 0
    for x in xs:
        g = gcd(g, abs(x))
    return g

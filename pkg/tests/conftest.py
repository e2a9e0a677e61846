import random
from fractions import Fraction
from math import isqrt

import pytest

from geocf.qform import FormMatrix, form_from_matrix


def random_int_form(rng: random.Random, n: int, spread: int = 4) -> FormMatrix:
    """Random positive definite integer form via G^t G."""
    while True:
        g = [[rng.randint(-spread, spread) for _ in range(n)] for _ in range(n)]
        grid = [
            [sum(g[k][i] * g[k][j] for k in range(n)) for j in range(n)]
            for i in range(n)
        ]
        try:
            return form_from_matrix(grid)
        except Exception:
            continue  # singular draw, try again


def trunc_sqrt(k: int, digits: int = 60) -> Fraction:
    """sqrt(k) truncated to the given number of decimal digits, exactly."""
    return Fraction(isqrt(k * 10 ** (2 * digits)), 10 ** digits)


# 80 decimal digits of pi as an exact rational; tests truncate it further.
PI_80 = Fraction(
    "3.1415926535897932384626433832795028841971693993751058209749445923078164062862089986"
)


def pi_trunc(digits: int = 60) -> Fraction:
    scale = 10 ** digits
    return Fraction((PI_80.numerator * scale) // PI_80.denominator, scale)


@pytest.fixture(scope="session")
def rng():
    return random.Random(0xC0FFEE)

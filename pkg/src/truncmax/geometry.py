"""Exact geometric constants and the binomial correction series.

Unit-ball volumes are kept as rational multiples of powers of pi so that the
closed-form norms downstream carry no approximation error beyond the final
float conversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParameterError

MAX_DIM = 8

# V_n = coefficient * pi**power, from V_n = pi^(n/2) / Gamma(n/2 + 1)
_BALL_VOLUME = {
    1: (Fraction(2), 0),
    2: (Fraction(1), 1),
    3: (Fraction(4, 3), 1),
    4: (Fraction(1, 2), 2),
    5: (Fraction(8, 15), 2),
    6: (Fraction(1, 6), 3),
    7: (Fraction(16, 105), 3),
    8: (Fraction(1, 24), 4),
}


def _check_dim(n: int, lowest: int = 1) -> None:
    if not isinstance(n, (int,)) or isinstance(n, bool):
        raise ParameterError(f"dimension must be an integer, got {n!r}")
    if n < lowest or n > MAX_DIM:
        raise ParameterError(f"dimension n={n} outside supported range [{lowest}, {MAX_DIM}]")


def ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n, for 1 <= n <= 8."""
    _check_dim(n)
    coeff, power = _BALL_VOLUME[n]
    return float(coeff) * math.pi**power


def sphere_area(n: int) -> float:
    """Surface area of the unit sphere bounding the unit ball of R^n."""
    _check_dim(n)
    coeff, power = _BALL_VOLUME[n]
    return float(coeff * n) * math.pi**power


@dataclass(frozen=True)
class DimensionConstants:
    n: int
    ball_volume: float
    sphere_area: float

    @classmethod
    def of(cls, n: int) -> "DimensionConstants":
        return cls(n, ball_volume(n), sphere_area(n))


def _radial_series(delta: float, a: float, b: float, n: int) -> float:
    # sum_{i=0}^{n-2} C(n-1,i) delta^(n-1-i) (b^(i+1-n) - a^(i+1-n)) / (i+1-n)
    total = 0.0
    for i in range(n - 1):
        p = n - 1 - i
        c = math.comb(n - 1, i) * delta**p
        total += c / (-p * b**p) - c / (-p * a**p)
    return total


def _check_ab(a: float, b: float) -> None:
    if not (a > 0 and b >= a and math.isfinite(b)):
        raise ParameterError(f"need 0 < a <= b < inf, got a={a}, b={b}")


def series_A(s: float, a: float, b: float, n: int) -> float:
    """Correction series of the upper control function.

    ``n * (log(b/a) + series_A(s, a, b, n))`` equals
    ``n * integral_a^b (r + sqrt(n) s)^(n-1) / r^n dr``.
    """
    _check_dim(n, lowest=2)
    _check_ab(a, b)
    if s < 0:
        raise ParameterError(f"s must be non-negative, got {s}")
    return _radial_series(math.sqrt(n) * s, a, b, n)


def series_B(m: float, a: float, b: float, n: int) -> float:
    """Correction series of the lower control function (``series_A`` with sqrt(n) s -> -1/m)."""
    _check_dim(n, lowest=2)
    _check_ab(a, b)
    if not m > 0:
        raise ParameterError(f"m must be positive, got {m}")
    return _radial_series(-1.0 / m, a, b, n)

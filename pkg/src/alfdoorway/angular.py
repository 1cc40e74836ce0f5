"""Exact angular momentum coupling coefficients for half-integer arguments.

All quantum numbers are carried internally as twice their value (integers),
so half-integers like F1 = 7/2 never touch floating point until the final
square root. Wigner symbols are evaluated with Racah sums over exact
rational terms and cached on the twice-value key, which keeps repeated
Hamiltonian builds cheap.
"""

from __future__ import annotations

import threading
from fractions import Fraction
from math import factorial, isqrt, sqrt


class HalfInt:
    """An exact integer or half-integer angular momentum quantum number.

    Stores twice the value so that arithmetic and triangle tests are exact.
    """

    __slots__ = ("twice",)

    def __init__(self, value):
        if isinstance(value, HalfInt):
            self.twice = value.twice
            return
        twice = round(2 * value)
        if abs(2 * value - twice) > 1e-9:
            raise ValueError(f"{value!r} is not an integer or half-integer")
        self.twice = int(twice)

    @classmethod
    def from_twice(cls, twice: int) -> "HalfInt":
        obj = cls.__new__(cls)
        obj.twice = int(twice)
        return obj

    def __float__(self):
        return self.twice / 2.0

    def __repr__(self):
        if self.twice % 2 == 0:
            return str(self.twice // 2)
        return f"{self.twice}/2"

    def __hash__(self):
        return hash(("HalfInt", self.twice))

    def __eq__(self, other):
        return self.twice == _twice(other)

    def __lt__(self, other):
        return self.twice < _twice(other)

    def __le__(self, other):
        return self.twice <= _twice(other)

    def __gt__(self, other):
        return self.twice > _twice(other)

    def __ge__(self, other):
        return self.twice >= _twice(other)

    def __add__(self, other):
        return HalfInt.from_twice(self.twice + _twice(other))

    __radd__ = __add__

    def __sub__(self, other):
        return HalfInt.from_twice(self.twice - _twice(other))

    def __rsub__(self, other):
        return HalfInt.from_twice(_twice(other) - self.twice)

    def __neg__(self):
        return HalfInt.from_twice(-self.twice)

    def __abs__(self):
        return HalfInt.from_twice(abs(self.twice))

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0


def _twice(j) -> int:
    """Twice-value of an int, float or HalfInt argument."""
    if isinstance(j, HalfInt):
        return j.twice
    twice = round(2 * j)
    if abs(2 * j - twice) > 1e-9:
        raise ValueError(f"{j!r} is not an integer or half-integer")
    return int(twice)


def _triangle_ok(tj1: int, tj2: int, tj3: int) -> bool:
    if (tj1 + tj2 + tj3) % 2 != 0:
        return False
    return abs(tj1 - tj2) <= tj3 <= tj1 + tj2


def _sqrt_fraction(fr: Fraction) -> float:
    """sqrt of a non-negative Fraction, exact when num/den are squares."""
    if fr == 0:
        return 0.0
    num, den = fr.numerator, fr.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return rn / rd
    return sqrt(num) / sqrt(den)


def _delta_sq(tj1: int, tj2: int, tj3: int) -> Fraction:
    """Squared triangle coefficient as an exact Fraction."""
    return Fraction(
        factorial((tj1 + tj2 - tj3) // 2)
        * factorial((tj1 - tj2 + tj3) // 2)
        * factorial((-tj1 + tj2 + tj3) // 2),
        factorial((tj1 + tj2 + tj3) // 2 + 1),
    )


_w3j_cache: dict = {}
_w6j_cache: dict = {}
_cache_lock = threading.Lock()


def _wigner3j_twice(tj1, tj2, tj3, tm1, tm2, tm3) -> float:
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tm3) > tj3:
        return 0.0
    if (tj1 + tm1) % 2 or (tj2 + tm2) % 2 or (tj3 + tm3) % 2:
        return 0.0
    if not _triangle_ok(tj1, tj2, tj3):
        return 0.0

    key = (tj1, tj2, tj3, tm1, tm2, tm3)
    with _cache_lock:
        hit = _w3j_cache.get(key)
    if hit is not None:
        return hit

    # Racah sum; every factorial argument below is an exact integer.
    kmin = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    kmax = min(
        (tj1 + tj2 - tj3) // 2,
        (tj1 - tm1) // 2,
        (tj2 + tm2) // 2,
    )
    total = Fraction(0)
    for k in range(kmin, kmax + 1):
        den = (
            factorial(k)
            * factorial((tj1 + tj2 - tj3) // 2 - k)
            * factorial((tj1 - tm1) // 2 - k)
            * factorial((tj2 + tm2) // 2 - k)
            * factorial((tj3 - tj2 + tm1) // 2 + k)
            * factorial((tj3 - tj1 - tm2) // 2 + k)
        )
        term = Fraction((-1) ** k, den)
        total += term
    if total == 0:
        with _cache_lock:
            _w3j_cache[key] = 0.0
        return 0.0

    norm = _delta_sq(tj1, tj2, tj3) * Fraction(
        factorial((tj1 + tm1) // 2)
        * factorial((tj1 - tm1) // 2)
        * factorial((tj2 + tm2) // 2)
        * factorial((tj2 - tm2) // 2)
        * factorial((tj3 + tm3) // 2)
        * factorial((tj3 - tm3) // 2)
    )
    sign = 1 if total > 0 else -1
    phase = -1 if ((tj1 - tj2 - tm3) // 2) % 2 else 1
    value = phase * sign * _sqrt_fraction(norm * total * total)
    with _cache_lock:
        _w3j_cache[key] = value
    return value


def _wigner6j_twice(tj1, tj2, tj3, tj4, tj5, tj6) -> float:
    for triad in (
        (tj1, tj2, tj3),
        (tj1, tj5, tj6),
        (tj4, tj2, tj6),
        (tj4, tj5, tj3),
    ):
        if not _triangle_ok(*triad):
            return 0.0

    key = (tj1, tj2, tj3, tj4, tj5, tj6)
    with _cache_lock:
        hit = _w6j_cache.get(key)
    if hit is not None:
        return hit

    def f(*tjs):
        # (sum of half-values) as exact int
        s = sum(tjs)
        assert s % 2 == 0
        return s // 2

    a1 = f(tj1, tj2, tj3)
    a2 = f(tj1, tj5, tj6)
    a3 = f(tj4, tj2, tj6)
    a4 = f(tj4, tj5, tj3)
    b1 = f(tj1, tj2, tj4, tj5)
    b2 = f(tj2, tj3, tj5, tj6)
    b3 = f(tj3, tj1, tj6, tj4)

    total = Fraction(0)
    for t in range(max(a1, a2, a3, a4), min(b1, b2, b3) + 1):
        den = (
            factorial(t - a1)
            * factorial(t - a2)
            * factorial(t - a3)
            * factorial(t - a4)
            * factorial(b1 - t)
            * factorial(b2 - t)
            * factorial(b3 - t)
        )
        total += Fraction((-1) ** t * factorial(t + 1), den)
    if total == 0:
        with _cache_lock:
            _w6j_cache[key] = 0.0
        return 0.0

    norm = (
        _delta_sq(tj1, tj2, tj3)
        * _delta_sq(tj1, tj5, tj6)
        * _delta_sq(tj4, tj2, tj6)
        * _delta_sq(tj4, tj5, tj3)
    )
    sign = 1 if total > 0 else -1
    value = sign * _sqrt_fraction(norm * total * total)
    with _cache_lock:
        _w6j_cache[key] = value
    return value


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3-j symbol; zero (not an error) when selection rules fail."""
    return _wigner3j_twice(
        _twice(j1), _twice(j2), _twice(j3), _twice(m1), _twice(m2), _twice(m3)
    )


def wigner6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6-j symbol {j1 j2 j3 / j4 j5 j6}; zero on triangle violations."""
    return _wigner6j_twice(
        _twice(j1), _twice(j2), _twice(j3), _twice(j4), _twice(j5), _twice(j6)
    )


def clebsch_gordan(j1, m1, j2, m2, j3, m3) -> float:
    """<j1 m1 j2 m2 | j3 m3> from the 3-j symbol."""
    tj1, tj2, tj3 = _twice(j1), _twice(j2), _twice(j3)
    tm3 = _twice(m3)
    phase = -1 if ((tj1 - tj2 + tm3) // 2) % 2 else 1
    return (
        phase
        * sqrt(tj3 + 1.0)
        * _wigner3j_twice(tj1, tj2, tj3, _twice(m1), _twice(m2), -tm3)
    )


def warm_cache(jmax=8) -> None:
    """Pre-fill the symbol caches up to jmax for lock-free concurrent reads."""
    tmax = _twice(jmax)
    for tj1 in range(tmax + 1):
        for tj2 in range(tmax + 1):
            for tj3 in range(abs(tj1 - tj2), min(tj1 + tj2, tmax) + 1, 2):
                for tm1 in range(-tj1, tj1 + 1, 2):
                    for tm2 in range(-tj2, tj2 + 1, 2):
                        _wigner3j_twice(tj1, tj2, tj3, tm1, tm2, -tm1 - tm2)


# ---------------------------------------------------------------------------
# Composite-system reduced matrix elements (Edmonds conventions).
#
# Reduced elements follow the Wigner-Eckart convention
#   <j' m'|T^k_q|j m> = (-1)^(j'-m') (j' k j; -m' q m) <j'||T^k||j>.
# The three routines below are the only recoupling formulas the hyperfine
# and transition-moment builders need (sequential coupling j1 + j2 = J).
# ---------------------------------------------------------------------------


def scalar_product_element(j1p, j2p, j1, j2, jtot, k, red1: float, red2: float) -> float:
    """<(j1' j2') J | T^k(1) . U^k(2) | (j1 j2) J> for a scalar product.

    red1, red2 are the subsystem reduced matrix elements of T^k and U^k.
    """
    tj1p, tj2p, tj1, tj2, tJ = (
        _twice(j1p),
        _twice(j2p),
        _twice(j1),
        _twice(j2),
        _twice(jtot),
    )
    tk = _twice(k)
    six = _wigner6j_twice(tj1p, tj1, tk, tj2, tj2p, tJ)
    if six == 0.0:
        return 0.0
    phase = -1 if ((tj1 + tj2p + tJ) // 2) % 2 else 1
    return phase * six * red1 * red2


def reduced_on_first(j1p, j1, j2, jtotp, jtot, k, red1: float) -> float:
    """<(j1' j2) J'||T^k(1)||(j1 j2) J> for a tensor acting on subsystem 1."""
    tj1p, tj1, tj2 = _twice(j1p), _twice(j1), _twice(j2)
    tJp, tJ, tk = _twice(jtotp), _twice(jtot), _twice(k)
    six = _wigner6j_twice(tj1p, tJp, tj2, tJ, tj1, tk)
    if six == 0.0:
        return 0.0
    phase = -1 if ((tj1p + tj2 + tJ + tk) // 2) % 2 else 1
    return phase * sqrt((tJp + 1.0) * (tJ + 1.0)) * six * red1


def reduced_on_second(j1, j2p, j2, jtotp, jtot, k, red2: float) -> float:
    """<(j1 j2') J'||T^k(2)||(j1 j2) J> for a tensor acting on subsystem 2."""
    tj1, tj2p, tj2 = _twice(j1), _twice(j2p), _twice(j2)
    tJp, tJ, tk = _twice(jtotp), _twice(jtot), _twice(k)
    six = _wigner6j_twice(tj2p, tJp, tj1, tJ, tj2, tk)
    if six == 0.0:
        return 0.0
    phase = -1 if ((tj1 + tj2 + tJp + tk) // 2) % 2 else 1
    return phase * sqrt((tJp + 1.0) * (tJ + 1.0)) * six * red2


def spin_reduced(j) -> float:
    """<j||T^1(J)||j> = sqrt(j(j+1)(2j+1)) for an angular momentum operator."""
    x = _twice(j) / 2.0
    return sqrt(x * (x + 1.0) * (2.0 * x + 1.0))


def quadrupole_reduced(i) -> float:
    """<I||T^2(Q)||I> normalized so <I, m=I|T^2_0|I, m=I> = 1/2.

    The conventional eqQ parameters multiply this element, so the factor
    eQ is carried by the parameter value itself.
    """
    ti = _twice(i)
    if ti < 2:
        return 0.0
    w = _wigner3j_twice(ti, 4, ti, -ti, 0, ti)
    return 0.5 / w

"""Wigner 3j/6j symbols and Clebsch-Gordan coefficients.

Evaluated with the Racah factorial sums in double precision, which is exact
to roundoff for the small angular momenta used here (j <= 3).  Quantum
numbers may be integers or half-integers; anything that violates the
triangle or projection rules returns 0.0 by convention.
"""
from __future__ import annotations

from functools import lru_cache
from math import factorial, sqrt

__all__ = ["wigner3j", "wigner6j", "clebsch_gordan"]


def _twice(x) -> int:
    """Map an integer or half-integer to an exact integer 2*x."""
    t = round(2 * x)
    if abs(2 * x - t) > 1e-9:
        raise ValueError(f"quantum number {x} is not a half-integer")
    return t


def _triangle_ok(tj1: int, tj2: int, tj3: int) -> bool:
    return (
        abs(tj1 - tj2) <= tj3 <= tj1 + tj2
        and (tj1 + tj2 + tj3) % 2 == 0
        and tj1 >= 0
        and tj2 >= 0
        and tj3 >= 0
    )


def _delta(tj1: int, tj2: int, tj3: int) -> float:
    """Triangle coefficient sqrt(Delta) with doubled-integer arguments."""
    a = (tj1 + tj2 - tj3) // 2
    b = (tj1 - tj2 + tj3) // 2
    c = (-tj1 + tj2 + tj3) // 2
    d = (tj1 + tj2 + tj3) // 2 + 1
    return sqrt(factorial(a) * factorial(b) * factorial(c) / factorial(d))


@lru_cache(maxsize=4096)
def _wigner3j_t(tj1, tj2, tj3, tm1, tm2, tm3) -> float:
    if tm1 + tm2 + tm3 != 0:
        return 0.0
    if not _triangle_ok(tj1, tj2, tj3):
        return 0.0
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        if abs(tm) > tj or (tj - tm) % 2 != 0:
            return 0.0

    # Racah sum over k; all arguments below are genuine integers.
    kmin = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    kmax = min(
        (tj1 + tj2 - tj3) // 2,
        (tj1 - tm1) // 2,
        (tj2 + tm2) // 2,
    )
    total = 0.0
    for k in range(kmin, kmax + 1):
        denom = (
            factorial(k)
            * factorial((tj1 + tj2 - tj3) // 2 - k)
            * factorial((tj1 - tm1) // 2 - k)
            * factorial((tj2 + tm2) // 2 - k)
            * factorial((tj3 - tj2 + tm1) // 2 + k)
            * factorial((tj3 - tj1 - tm2) // 2 + k)
        )
        total += (-1.0) ** k / denom
    norm = _delta(tj1, tj2, tj3) * sqrt(
        factorial((tj1 + tm1) // 2)
        * factorial((tj1 - tm1) // 2)
        * factorial((tj2 + tm2) // 2)
        * factorial((tj2 - tm2) // 2)
        * factorial((tj3 + tm3) // 2)
        * factorial((tj3 - tm3) // 2)
    )
    phase = (-1.0) ** ((tj1 - tj2 - tm3) // 2)
    return phase * norm * total


def wigner3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol; 0.0 whenever a selection rule fails."""
    return _wigner3j_t(
        _twice(j1), _twice(j2), _twice(j3), _twice(m1), _twice(m2), _twice(m3)
    )


@lru_cache(maxsize=4096)
def _wigner6j_t(tj1, tj2, tj3, tj4, tj5, tj6) -> float:
    triads = (
        (tj1, tj2, tj3),
        (tj1, tj5, tj6),
        (tj4, tj2, tj6),
        (tj4, tj5, tj3),
    )
    for t in triads:
        if not _triangle_ok(*t):
            return 0.0
    f = factorial
    # Racah formula; sums run over integers once doubled arguments divide out.
    t1 = (tj1 + tj2 + tj3) // 2
    t2 = (tj1 + tj5 + tj6) // 2
    t3 = (tj4 + tj2 + tj6) // 2
    t4 = (tj4 + tj5 + tj3) // 2
    q1 = (tj1 + tj2 + tj4 + tj5) // 2
    q2 = (tj2 + tj3 + tj5 + tj6) // 2
    q3 = (tj3 + tj1 + tj6 + tj4) // 2
    kmin = max(t1, t2, t3, t4)
    kmax = min(q1, q2, q3)
    total = 0.0
    for k in range(kmin, kmax + 1):
        num = (-1.0) ** k * f(k + 1)
        den = (
            f(k - t1) * f(k - t2) * f(k - t3) * f(k - t4)
            * f(q1 - k) * f(q2 - k) * f(q3 - k)
        )
        total += num / den
    pref = 1.0
    for t in triads:
        pref *= _delta(*t)
    return pref * total


def wigner6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol {j1 j2 j3; j4 j5 j6}; 0.0 on triangle violations."""
    return _wigner6j_t(
        _twice(j1), _twice(j2), _twice(j3), _twice(j4), _twice(j5), _twice(j6)
    )


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """<j1 m1; j2 m2 | J M> in the Condon-Shortley convention."""
    tJ, tM = _twice(J), _twice(M)
    phase = (-1.0) ** ((_twice(j1) - _twice(j2) + tM) // 2)
    return phase * sqrt(tJ + 1.0) * wigner3j(j1, j2, J, m1, m2, -M)

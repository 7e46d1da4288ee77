"""Angular-momentum coefficients against frozen exact values.

Expected numbers were computed once with sympy.physics.wigner (exact
rationals) and frozen here; the implementation under test is the
independent Racah factorial sum.
"""
import itertools

import numpy as np
import pytest

from eitcbs.angular import clebsch_gordan, wigner3j, wigner6j

SQRT3INV = 0.5773502691896257


@pytest.mark.parametrize(
    "args,expected",
    [
        ((1, 1, 1, 0, 0, 0), 0.0),  # odd j-sum, all m zero
        ((1, 1, 2, 0, 0, 1), 0.0),  # m-sum violated
        ((1, 1, 0, 1, -1, 0), SQRT3INV),
        ((1, 1, 1, 1, -1, 0), 0.40824829046386296),  # 1/sqrt(6)
        ((2, 1, 1, -1, 1, 0), -0.31622776601683794),  # -1/sqrt(10)
        ((2, 1, 1, -2, 1, 1), 0.4472135954999579),  # 1/sqrt(5)
        ((0.5, 0.5, 1, 0.5, 0.5, -1), -0.5773502691896257),
        ((1, 1, 3, 0, 0, 0), 0.0),  # triangle violated
    ],
)
def test_wigner3j_frozen(args, expected):
    assert wigner3j(*args) == pytest.approx(expected, abs=1e-14)


def test_wigner3j_column_permutation_phase():
    # even permutation invariance, odd permutation gives (-1)^(j1+j2+j3)
    j = (2, 1, 1)
    m = (-1, 1, 0)
    base = wigner3j(j[0], j[1], j[2], m[0], m[1], m[2])
    even = wigner3j(j[1], j[2], j[0], m[1], m[2], m[0])
    odd = wigner3j(j[1], j[0], j[2], m[1], m[0], m[2])
    assert even == pytest.approx(base, abs=1e-14)
    assert odd == pytest.approx((-1) ** sum(j) * base, abs=1e-14)


def test_wigner3j_m_negation_symmetry():
    for j1, j2, j3 in [(1, 1, 1), (1, 1, 2), (2, 1, 1), (2, 2, 2)]:
        for m1 in range(-j1, j1 + 1):
            for m2 in range(-j2, j2 + 1):
                m3 = -m1 - m2
                if abs(m3) > j3:
                    continue
                a = wigner3j(j1, j2, j3, m1, m2, m3)
                b = wigner3j(j1, j2, j3, -m1, -m2, -m3)
                assert b == pytest.approx((-1) ** (j1 + j2 + j3) * a, abs=1e-13)


@pytest.mark.parametrize(
    "args,expected",
    [
        ((0.5, 0.5, 1, 1, 1, 1.5), -1.0 / 6.0),  # {1/2 1/2 1; 1 1 3/2}
        ((0.5, 0.5, 1, 2, 1, 1.5), 0.28867513459481287),  # sqrt(3)/6
        ((1, 1, 1, 1, 1, 1), 0.16666666666666666),
        ((1, 1, 0, 1, 1, 3), 0.0),  # triangle violated
    ],
)
def test_wigner6j_frozen(args, expected):
    assert wigner6j(*args) == pytest.approx(expected, abs=1e-14)


def test_clebsch_gordan_frozen():
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    assert clebsch_gordan(1, -1, 1, 1, 1, 0) == pytest.approx(-inv_sqrt2, abs=1e-14)
    assert clebsch_gordan(1, 0, 1, 0, 1, 0) == 0.0
    assert clebsch_gordan(2, -1, 1, 1, 1, 0) == pytest.approx(0.5477225575051661, abs=1e-14)
    assert clebsch_gordan(2, -2, 1, 1, 1, -1) == pytest.approx(0.7745966692414834, abs=1e-14)
    assert clebsch_gordan(2, 0, 1, 1, 1, 1) == pytest.approx(0.31622776601683794, abs=1e-14)


def test_clebsch_gordan_orthogonality():
    # sum_{m1 m2} <j1 m1 j2 m2|J M><j1 m1 j2 m2|J' M'> = delta_JJ' delta_MM'
    j1, j2 = 1, 1
    for J, Jp in itertools.product((0, 1, 2), repeat=2):
        for M in range(-min(J, Jp), min(J, Jp) + 1):
            total = sum(
                clebsch_gordan(j1, m1, j2, M - m1, J, M)
                * clebsch_gordan(j1, m1, j2, M - m1, Jp, M)
                for m1 in range(-j1, j1 + 1)
                if abs(M - m1) <= j2
            )
            assert total == pytest.approx(1.0 if J == Jp else 0.0, abs=1e-13)


def test_half_integer_rejection():
    with pytest.raises(ValueError):
        wigner3j(1.2, 1, 1, 0, 0, 0)

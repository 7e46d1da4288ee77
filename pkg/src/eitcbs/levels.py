"""Level scheme and dipole couplings for the probed D1-type transition.

Internal units: the natural linewidth of the excited state is 1, hbar is 1,
and the reduced dipole element of the probed F=1 -> F'=1 line is 1.  The
F=2 -> F'=1 reduced element then equals -sqrt(5) (fixed by building both
hyperfine manifolds from the same electronic J=1/2 -> J'=1/2 element with
nuclear spin I=3/2; only its square enters any observable).

Selection conventions: spherical dipole components q = -1, 0, +1 with
e_{+-1} = -+(x +- i y)/sqrt(2), e_0 = z, Condon-Shortley phases throughout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import sqrt

import numpy as np

from .angular import clebsch_gordan, wigner6j

__all__ = [
    "LevelScheme",
    "ZeemanTransition",
    "ControlCoupling",
    "dipole_element",
    "control_matrix_element",
    "zeeman_transitions",
    "hyperfine_branching",
    "RB87_D1_WAVELENGTH_CM",
    "RB87_HYPERFINE_SPLITTING",
    "REDUCED_RATIO_F2",
]

# Vacuum wavelength of the Rb-87 D1 line, in cm (a config input; this is
# only the default).
RB87_D1_WAVELENGTH_CM = 794.979e-7

# Ground hyperfine splitting ~ 2pi * 6.83 GHz expressed in units of the
# natural linewidth Gamma = 2pi * 5.75 MHz.
RB87_HYPERFINE_SPLITTING = 6.834682e9 / 5.75e6

# Gamma / c in 1/cm for the default linewidth; converts leg lengths to the
# light-propagation phase per unit detuning.
RB87_GAMMA_OVER_C = 2.0 * 3.141592653589793 * 5.75e6 / 2.99792458e10

# (F'=1||d||F=2) / (F'=1||d||F=1) for J=1/2 -> J'=1/2, I=3/2.
REDUCED_RATIO_F2 = -sqrt(5.0)


class QuantumNumberError(ValueError):
    """Raised for out-of-range hyperfine or Zeeman quantum numbers."""


@dataclass(frozen=True)
class LevelScheme:
    """Hyperfine level data for the probed transition.

    The probe couples ground F=1 to the single excited F'=1 sublevel set;
    the control field couples ground F=2 to the same excited state.
    """

    probed_ground_F: int = 1
    control_ground_F: int = 2
    excited_F: int = 1
    nuclear_spin: float = 1.5
    hyperfine_splitting_ground: float = RB87_HYPERFINE_SPLITTING
    gamma: float = 1.0
    wavelength: float = RB87_D1_WAVELENGTH_CM
    gamma_over_c: float = RB87_GAMMA_OVER_C

    def __post_init__(self):
        if self.excited_F != 1:
            raise ValueError("only one excited hyperfine sublevel (F'=1) is modeled")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")

    @property
    def wavenumber(self) -> float:
        """Probe wavenumber 2*pi/lambda in 1/cm."""
        return 2.0 * np.pi / self.wavelength

    @property
    def branching_to_probed(self) -> float:
        """Fraction of excited-state decay returning to the probed F=1 level."""
        return hyperfine_branching(
            self.nuclear_spin, 0.5, 0.5, self.excited_F, self.probed_ground_F
        )


@dataclass(frozen=True)
class ZeemanTransition:
    """One ground (F, m) to excited (F', n) dipole link."""

    ground: tuple[int, int]
    excited: tuple[int, int]
    spherical_component: int
    amplitude: float


def dipole_element(ground: tuple[int, int], excited: tuple[int, int], q: int) -> float:
    """Dipole matrix element <F' n| d_q |F m> in reduced-dipole units.

    ground = (F, m) with F in {1, 2}; excited = (F', n) with F' = 1.
    Vanishes unless n = m + q.
    """
    F, m = ground
    Fp, n = excited
    if F not in (1, 2) or Fp != 1:
        raise QuantumNumberError(f"unsupported levels F={F}, F'={Fp}")
    if abs(m) > F or abs(n) > Fp:
        raise QuantumNumberError(f"m={m} or n={n} out of range")
    if q not in (-1, 0, 1):
        raise QuantumNumberError(f"q={q} not a spherical index")
    if n != m + q:
        return 0.0
    reduced = 1.0 if F == 1 else REDUCED_RATIO_F2
    return reduced * clebsch_gordan(F, m, 1, q, Fp, n)


def zeeman_transitions(scheme: LevelScheme | None = None) -> list[ZeemanTransition]:
    """All probe-driven links F=1 -> F'=1 with nonzero amplitude."""
    out = []
    for m in (-1, 0, 1):
        for q in (-1, 0, 1):
            n = m + q
            if abs(n) > 1:
                continue
            amp = dipole_element((1, m), (1, n), q)
            if amp != 0.0:
                out.append(ZeemanTransition((1, m), (1, n), q, amp))
    return out


@lru_cache(maxsize=64)
def hyperfine_branching(I, J, Jp, Fp, F) -> float:
    """Branching fraction of excited (Jp, Fp) decay into ground (J, F).

    Standard 6j reduction of the hyperfine dipole strengths; the fractions
    over F sum to 1 for each Fp.
    """
    def strength(Fg):
        w = wigner6j(Jp, J, 1, Fg, Fp, I)
        return (2 * Fp + 1) * (2 * Fg + 1) * w * w

    fmin = abs(I - J)
    total, this = 0.0, 0.0
    Fg = fmin
    while Fg <= I + J + 1e-9:
        s = strength(Fg)
        total += s
        if abs(Fg - F) < 1e-9:
            this = s
        Fg += 1
    return this / total


@dataclass(frozen=True)
class ControlCoupling:
    """Sigma-plus control field on F=2 -> F'=1.

    rabi_frequency is Omega_c in units of Gamma, defined on the reference
    transition |F=2, m'=-1> -> |F'=1, n=0> as Omega_c = 2|V|.  All matrix
    elements are taken real and non-negative (a global control phase
    cancels in every cross section).
    """

    rabi_frequency: float
    detuning_control: float = 0.0
    polarization: str = "sigma+"
    _reference_cg: float = field(init=False, repr=False, default=0.0)

    def __post_init__(self):
        if self.rabi_frequency < 0:
            raise ValueError("rabi_frequency must be >= 0")
        if self.polarization != "sigma+":
            raise ValueError("only the sigma+ control configuration is modeled")
        object.__setattr__(
            self, "_reference_cg", abs(clebsch_gordan(2, -1, 1, 1, 1, 0))
        )

    def matrix_element(self, n: int, m_prime: int) -> complex:
        return control_matrix_element(n, m_prime, self)

    def coupled_rabi(self, n: int) -> float:
        """|V_{n, m'=n-1}|: the only nonzero coupling into excited n."""
        return abs(control_matrix_element(n, n - 1, self))

    def matrix_elements(self) -> dict[tuple[int, int], complex]:
        """Map (n, m') -> V for all nonzero couplings."""
        out = {}
        for n in (-1, 0, 1):
            v = control_matrix_element(n, n - 1, self)
            if v != 0:
                out[(n, n - 1)] = v
        return out


def control_matrix_element(n: int, m_prime: int, coupling: ControlCoupling) -> complex:
    """Control-mode coupling V_{n m'} between |F'=1, n> and |F=2, m'>.

    Zero unless m' = n - 1 (sigma+ selection); scaled so the reference
    transition has |V| = Omega_c / 2.
    """
    if n not in (-1, 0, 1) or m_prime not in (-2, -1, 0, 1, 2):
        return 0.0 + 0.0j
    if m_prime != n - 1:
        return 0.0 + 0.0j
    cg = clebsch_gordan(2, m_prime, 1, 1, 1, n)
    ratio = abs(cg) / coupling._reference_cg
    return complex(0.5 * coupling.rabi_frequency * ratio)

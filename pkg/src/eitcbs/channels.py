"""Helicity channels, ray frames, and the detection filter.

Helicity is defined with respect to each beam's own propagation direction
(the experimental convention for backscattering channel names).  In the ray
frame with transverse axes (x_f, y_f) the helicity unit vectors are
e_{+-1} = -+(x_f +- i y_f)/sqrt(2).

Lab-frame bookkeeping for backscattering along -z (probe along +z):

    ==============  =======================  =========================
    beam            helicity +1              helicity -1
    ==============  =======================  =========================
    probe (+z)      -(x + iy)/sqrt(2) = e+1  (x - iy)/sqrt(2)  = e-1
    detected (-z)   (x - iy)/sqrt(2)  = e-1  -(x + iy)/sqrt(2) = e+1
    ==============  =======================  =========================

so the helicity-preserving channel pairs orthogonal lab circular components.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PolarizationChannel",
    "HelicityBasis",
    "CHANNELS",
    "frame_for_direction",
    "helicity_components",
    "helicity_basis",
    "channel_vectors",
    "raman_filter",
]

_INV_SQRT2 = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class PolarizationChannel:
    """One of the four circular in/out detection schemes H+- -> H+-."""

    input_helicity: int
    output_helicity: int

    def __post_init__(self):
        if self.input_helicity not in (-1, 1) or self.output_helicity not in (-1, 1):
            raise ValueError("helicities must be +1 or -1")

    @property
    def preserving(self) -> bool:
        return self.input_helicity == self.output_helicity

    @property
    def label(self) -> str:
        s = {1: "H+", -1: "H-"}
        return f"{s[self.input_helicity]}->{s[self.output_helicity]}"

    @classmethod
    def from_label(cls, text: str) -> "PolarizationChannel":
        t = text.replace(" ", "").replace("->", "")
        if len(t) != 4 or t[0] != "H" or t[2] != "H" or t[1] not in "+-" or t[3] not in "+-":
            raise ValueError(f"cannot parse channel {text!r}")
        sign = {"+": 1, "-": -1}
        return cls(sign[t[1]], sign[t[3]])


CHANNELS = (
    PolarizationChannel(1, 1),
    PolarizationChannel(1, -1),
    PolarizationChannel(-1, 1),
    PolarizationChannel(-1, -1),
)


def frame_for_direction(u) -> np.ndarray:
    """Right-handed orthonormal triad (columns x_f, y_f, u) for a ray.

    Deterministic polar convention: x_f is the polar unit vector and y_f the
    azimuthal one, with the azimuth taken as 0 when u is within roundoff of
    +-z.  Never involves trig functions of recovered angles, so it is cheap
    and reproducible across backends.
    """
    u = np.asarray(u, dtype=float)
    norm = np.linalg.norm(u)
    if norm == 0.0:
        raise ValueError("zero direction vector")
    u = u / norm
    rho = np.hypot(u[0], u[1])
    if rho < 1e-12:
        sign = 1.0 if u[2] > 0 else -1.0
        f1 = np.array([sign, 0.0, 0.0])
        f2 = np.array([0.0, 1.0, 0.0])
        return np.column_stack([f1, f2, np.array([0.0, 0.0, sign])])
    ca, sa = u[0] / rho, u[1] / rho
    cb, sb = u[2], rho
    f1 = np.array([cb * ca, cb * sa, -sb])
    f2 = np.array([-sa, ca, 0.0])
    return np.column_stack([f1, f2, u])


def helicity_components(h: int) -> np.ndarray:
    """Components of the helicity-h unit vector on the ray frame axes (x_f, y_f)."""
    if h == 1:
        return np.array([-_INV_SQRT2, -1j * _INV_SQRT2])
    if h == -1:
        return np.array([_INV_SQRT2, -1j * _INV_SQRT2])
    raise ValueError("helicity must be +1 or -1")


@dataclass(frozen=True)
class HelicityBasis:
    """Propagation direction with its two transverse helicity vectors."""

    direction: np.ndarray
    e_plus: np.ndarray
    e_minus: np.ndarray


def helicity_basis(direction) -> HelicityBasis:
    frame = frame_for_direction(direction)
    f12 = frame[:, :2]
    return HelicityBasis(
        frame[:, 2],
        f12 @ helicity_components(1),
        f12 @ helicity_components(-1),
    )


def channel_vectors(channel: PolarizationChannel, k_in) -> tuple[np.ndarray, np.ndarray]:
    """Lab-frame polarization vectors (input at k_in, output at -k_in)."""
    k_in = np.asarray(k_in, dtype=float)
    if np.linalg.norm(k_in) == 0.0:
        raise ValueError("zero direction vector")
    bi = helicity_basis(k_in)
    bo = helicity_basis(-k_in)
    e_in = bi.e_plus if channel.input_helicity == 1 else bi.e_minus
    e_out = bo.e_plus if channel.output_helicity == 1 else bo.e_minus
    return e_in, e_out


def raman_filter(final_state: tuple[int, int]) -> bool:
    """True when the final atomic state keeps the photon in the detected band.

    Final F=2 states shift the photon by the ground hyperfine splitting and
    are rejected by spectral selection at the detector.
    """
    F, m = final_state
    if F not in (1, 2) or abs(m) > F:
        raise ValueError(f"invalid final state (F={F}, m={m})")
    return F == 1

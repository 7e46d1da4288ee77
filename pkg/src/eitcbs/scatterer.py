"""Single-atom scattering tensor dressed by the control field.

The amplitude for one scattering event |F=1, m> -> |F, m''> at probe
detuning Delta (units of Gamma) is a complex 3x3 tensor in lab Cartesian
coordinates, with the first index contracting toward the emitted photon
and the second toward the absorbed one.  The control field modifies each
intermediate excited sublevel n by the factor

    brace_n(Delta) = 1 - |V_n|^2 / [(Delta + i/2) (Delta_c - Delta + Sigma_n)]

with the radiative self-energy Sigma_n = |V_n|^2 / (Delta + i/2).  For
Delta = Delta_c = 0 the brace vanishes identically: the EIT dark point.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .levels import ControlCoupling, dipole_element

__all__ = [
    "ScatteringTensor",
    "self_energy",
    "eit_brace",
    "scattering_tensor",
    "alpha_table",
    "transverse_restriction",
]

# Spherical basis vectors in lab Cartesian components, index order q = -1, 0, +1.
SPHERICAL_BASIS = np.array(
    [
        [1.0 / np.sqrt(2.0), -1.0j / np.sqrt(2.0), 0.0],
        [0.0, 0.0, 1.0],
        [-1.0 / np.sqrt(2.0), -1.0j / np.sqrt(2.0), 0.0],
    ],
    dtype=complex,
)


class FrameError(ValueError):
    """Raised when a propagation frame is not orthonormal."""


@dataclass(frozen=True)
class ScatteringTensor:
    """Dressed amplitude tensor for one Zeeman channel at one detuning."""

    ground_initial: tuple[int, int]
    ground_final: tuple[int, int]
    detuning: float
    components: np.ndarray  # (3, 3) complex, [emission, absorption]


def self_energy(n: int, m_prime: int, delta: float, coupling: ControlCoupling) -> complex:
    """Radiative self-energy Sigma_{n m'}(Delta) = |V|^2 / (Delta + i/2)."""
    v = coupling.matrix_element(n, m_prime)
    return (abs(v) ** 2) / (delta + 0.5j)


def eit_brace(n: int, delta: float, coupling: ControlCoupling) -> complex:
    """Control-field dressing factor for intermediate excited sublevel n."""
    v2 = coupling.coupled_rabi(n) ** 2
    if v2 == 0.0:
        return 1.0 + 0.0j
    d = delta + 0.5j
    sigma = v2 / d
    return 1.0 - (v2 / d) / (coupling.detuning_control - delta + sigma)


def _absorption_vector(n: int, m: int, F: int = 1) -> np.ndarray:
    """Cartesian components of <F'=1 n| d |F m> (photon absorbed)."""
    vec = np.zeros(3, dtype=complex)
    for qi, q in enumerate((-1, 0, 1)):
        amp = dipole_element((F, m), (1, n), q)
        if amp != 0.0:
            vec += amp * SPHERICAL_BASIS[qi].conj()
    return vec


def _emission_vector(m_final: int, n: int, F_final: int) -> np.ndarray:
    """Cartesian components of <F m''| d |F'=1 n> (photon emitted)."""
    vec = np.zeros(3, dtype=complex)
    for qi, q in enumerate((-1, 0, 1)):
        amp = dipole_element((F_final, m_final), (1, n), q)
        if amp != 0.0:
            vec += amp * SPHERICAL_BASIS[qi]
    return vec


def scattering_tensor(
    m: int,
    m_final: int,
    delta: float,
    coupling: ControlCoupling,
    final_F: int = 1,
) -> ScatteringTensor:
    """Dressed tensor for |F=1, m> -> |F=final_F, m''> at detuning Delta.

    final_F = 1 keeps the photon in the detected elastic band; final_F = 2
    is the inelastic Raman channel (computed for completeness, rejected by
    the detection filter).
    """
    if abs(m) > 1 or abs(m_final) > final_F:
        raise ValueError("Zeeman label out of range")
    comp = np.zeros((3, 3), dtype=complex)
    d = delta + 0.5j
    for n in (-1, 0, 1):
        v_abs = _absorption_vector(n, m)
        if not v_abs.any():
            continue
        w_emit = _emission_vector(m_final, n, final_F)
        if not w_emit.any():
            continue
        comp += np.outer(w_emit, v_abs) * (eit_brace(n, delta, coupling) / d)
    return ScatteringTensor((1, m), (final_F, m_final), delta, -comp)


@lru_cache(maxsize=512)
def _alpha_table_cached(delta: float, rabi: float, delta_c: float) -> np.ndarray:
    coupling = ControlCoupling(rabi_frequency=rabi, detuning_control=delta_c)
    table = np.zeros((3, 3, 3, 3), dtype=complex)
    for mi, m in enumerate((-1, 0, 1)):
        for fi, mf in enumerate((-1, 0, 1)):
            table[mi, fi] = scattering_tensor(m, mf, delta, coupling).components
    table.setflags(write=False)
    return table


def alpha_table(delta: float, coupling: ControlCoupling) -> np.ndarray:
    """All nine detected-channel tensors, indexed [m+1, m''+1, emit, absorb].

    Memoized per (detuning, Rabi frequency, control detuning); the returned
    array is read-only and safe to share across workers.
    """
    return _alpha_table_cached(float(delta), coupling.rabi_frequency, coupling.detuning_control)


def _check_frame(frame: np.ndarray) -> np.ndarray:
    frame = np.asarray(frame, dtype=float)
    if frame.shape != (3, 3) or not np.allclose(frame.T @ frame, np.eye(3), atol=1e-10):
        raise FrameError("frame must be a 3x3 orthonormal triad (columns)")
    return frame


def dipole_pair_tensor(n: int, m: int, m_final: int, final_F: int = 1) -> np.ndarray:
    """Geometry factor of one intermediate sublevel in the scattering tensor.

    The full tensor factorizes as alpha^{m'' m}(Delta) =
    sum_n dipole_pair_tensor(n, m, m'') * brace_n(Delta) / (Delta + i/2),
    which lets frequency-dependent sweeps reuse the constant 3x3 parts.
    """
    v_abs = _absorption_vector(n, m)
    w_emit = _emission_vector(m_final, n, final_F)
    return -np.outer(w_emit, v_abs)


def resonance_scalars(delta, coupling: ControlCoupling) -> np.ndarray:
    """brace_n(Delta)/(Delta + i/2) for n = -1, 0, +1; vectorized in Delta."""
    delta = np.asarray(delta, dtype=float)
    out = np.empty(delta.shape + (3,), dtype=complex)
    for ni, n in enumerate((-1, 0, 1)):
        v2 = coupling.coupled_rabi(n) ** 2
        d = delta + 0.5j
        if v2 == 0.0:
            out[..., ni] = 1.0 / d
        else:
            sigma = v2 / d
            brace = 1.0 - (v2 / d) / (coupling.detuning_control - delta + sigma)
            out[..., ni] = brace / d
    return out


def transverse_restriction(
    tensor: ScatteringTensor | np.ndarray,
    frame_in: np.ndarray,
    frame_out: np.ndarray,
) -> np.ndarray:
    """Project a lab tensor onto the transverse planes of two ray frames.

    frame_in / frame_out are orthonormal triads whose first two columns are
    the transverse axes (1 = x, 2 = y) of the incoming and outgoing rays.
    Returns the 2x2 block  out_axes^T . alpha . in_axes.
    """
    comp = tensor.components if isinstance(tensor, ScatteringTensor) else np.asarray(tensor)
    fi = _check_frame(frame_in)[:, :2]
    fo = _check_frame(frame_out)[:, :2]
    return fo.T @ comp @ fi

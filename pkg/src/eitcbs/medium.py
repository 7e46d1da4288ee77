"""Bulk optical response of the Gaussian cloud.

Density convention: n(r) = n0 * exp(-|r - center|^2 / (2 r0^2)), isolated in
:func:`density` so the alternative exp(-r^2/r0^2) convention would be a
one-line change.

The lab susceptibility is diagonal in the circular basis, with components
chi_q proportional to the local density.  Everything downstream therefore
uses the per-unit-density values chi_hat_q (units cm^3) together with line
integrals of the density alone, which have a closed error-function form on
any straight chord.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .levels import ControlCoupling, LevelScheme, dipole_element
from .scatterer import SPHERICAL_BASIS, eit_brace

__all__ = [
    "CloudGeometry",
    "LabSusceptibility",
    "TransverseSusceptibility",
    "density",
    "column_between",
    "column_semi_infinite",
    "unit_susceptibility",
    "lab_susceptibility",
    "susceptibility_tensor_cart",
    "project_susceptibility",
    "project_onto_frame",
    "pauli_decompose",
    "decompose_sweep",
    "transparency_window",
]


@dataclass(frozen=True)
class CloudGeometry:
    """Spherically symmetric Gaussian cloud."""

    peak_density: float  # atoms / cm^3
    gaussian_radius: float  # cm
    center: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if self.peak_density < 0:
            raise ValueError("peak_density must be >= 0")
        if self.gaussian_radius <= 0:
            raise ValueError("gaussian_radius must be > 0")

    @property
    def total_atoms(self) -> float:
        return self.peak_density * (2.0 * np.pi) ** 1.5 * self.gaussian_radius**3


def density(r, cloud: CloudGeometry) -> float | np.ndarray:
    """Atom number density at position(s) r (cm)."""
    r = np.asarray(r, dtype=float)
    d2 = np.sum((r - np.asarray(cloud.center)) ** 2, axis=-1)
    return cloud.peak_density * np.exp(-d2 / (2.0 * cloud.gaussian_radius**2))


_SQRT2 = np.sqrt(2.0)


def column_between(cloud: CloudGeometry, r1, r2) -> float:
    """Integral of density along the straight chord r1 -> r2 (atoms/cm^2)."""
    r1 = np.asarray(r1, dtype=float) - cloud.center
    r2 = np.asarray(r2, dtype=float) - cloud.center
    seg = r2 - r1
    length = np.linalg.norm(seg)
    if length == 0.0:
        return 0.0
    u = seg / length
    s1 = r1 @ u
    s2 = s1 + length
    rho2 = r1 @ r1 - s1 * s1
    r0 = cloud.gaussian_radius
    amp = cloud.peak_density * np.exp(-max(rho2, 0.0) / (2.0 * r0**2))
    scale = np.sqrt(np.pi / 2.0) * r0
    return amp * scale * (erf(s2 / (_SQRT2 * r0)) - erf(s1 / (_SQRT2 * r0)))


def column_semi_infinite(cloud: CloudGeometry, r, direction, incoming: bool = False) -> float:
    """Column density from r to +infinity along `direction`.

    With incoming=True, the column from -infinity up to r instead (the
    attenuation path of a beam arriving at r from that direction).
    """
    r = np.asarray(r, dtype=float) - cloud.center
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    s = r @ u
    rho2 = r @ r - s * s
    r0 = cloud.gaussian_radius
    amp = cloud.peak_density * np.exp(-max(rho2, 0.0) / (2.0 * r0**2))
    scale = np.sqrt(np.pi / 2.0) * r0
    e = erf(s / (_SQRT2 * r0))
    return amp * scale * ((e + 1.0) if incoming else (1.0 - e))


@dataclass(frozen=True)
class LabSusceptibility:
    """Diagonal circular-basis susceptibility at one position and detuning."""

    diag: np.ndarray  # (3,) complex, index order q = -1, 0, +1
    detuning: float

    @property
    def chi_minus(self) -> complex:
        return self.diag[0]

    @property
    def chi_zero(self) -> complex:
        return self.diag[1]

    @property
    def chi_plus(self) -> complex:
        return self.diag[2]


def unit_susceptibility(
    delta: float, coupling: ControlCoupling, scheme: LevelScheme
) -> np.ndarray:
    """Per-unit-density susceptibility chi_hat_q(Delta), q = (-1, 0, +1), cm^3.

    chi_q(r) = n(r) * chi_hat_q.  The prefactor ties the reduced-dipole unit
    to physical units through the excited-state decay rate and the branching
    fraction into the probed ground level.
    """
    k = scheme.wavenumber
    pref = -3.0 * scheme.branching_to_probed / (4.0 * k**3) / 3.0
    d = delta + 0.5j
    out = np.zeros(3, dtype=complex)
    for qi, q in enumerate((-1, 0, 1)):
        acc = 0.0 + 0.0j
        for m in (-1, 0, 1):
            n = m + q
            if abs(n) > 1:
                continue
            amp = dipole_element((1, m), (1, n), q)
            if amp == 0.0:
                continue
            acc += (amp * amp) * eit_brace(n, delta, coupling) / d
        out[qi] = pref * acc
    return out


def lab_susceptibility(
    r, delta: float, coupling: ControlCoupling, scheme: LevelScheme, cloud: CloudGeometry
) -> LabSusceptibility:
    """Local susceptibility tensor (strictly diagonal in the circular basis)."""
    n_local = density(r, cloud)
    return LabSusceptibility(n_local * unit_susceptibility(delta, coupling, scheme), delta)


def susceptibility_tensor_cart(diag) -> np.ndarray:
    """Circular-diagonal tensor as a 3x3 Cartesian operator sum_q chi_q e_q e_q^dag."""
    diag = np.asarray(diag, dtype=complex)
    out = np.zeros((3, 3), dtype=complex)
    for qi in range(3):
        e = SPHERICAL_BASIS[qi]
        out += diag[qi] * np.outer(e, e.conj())
    return out


def project_susceptibility(lab: LabSusceptibility | np.ndarray, euler) -> np.ndarray:
    """Transverse circular components of the tensor in a rotated ray frame.

    euler = (alpha, beta, gamma) are the z-y-z angles carrying the lab frame
    into the ray frame; only beta and gamma enter (the lab tensor is axially
    symmetric).  Returns the 2x2 matrix M with rows/columns ordered
    (q = +1, q = -1), i.e. M[0, 0] = chi~_{+1}^{+1}, M[0, 1] = chi~_{+1}^{-1}.
    """
    diag = lab.diag if isinstance(lab, LabSusceptibility) else np.asarray(lab, dtype=complex)
    chi_m, chi_0, chi_p = diag
    _, beta, gamma = euler
    c = np.cos(beta)
    s2 = np.sin(beta) ** 2
    plus = 0.25 * (1.0 + c) ** 2 * chi_p + 0.25 * (1.0 - c) ** 2 * chi_m + 0.5 * s2 * chi_0
    minus = 0.25 * (1.0 - c) ** 2 * chi_p + 0.25 * (1.0 + c) ** 2 * chi_m + 0.5 * s2 * chi_0
    bracket = 0.25 * s2 * (chi_p + chi_m - 2.0 * chi_0)
    m_pm = np.exp(-2.0j * gamma) * bracket  # chi~_{+1}^{-1}
    m_mp = np.exp(+2.0j * gamma) * bracket  # chi~_{-1}^{+1}
    return np.array([[plus, m_pm], [m_mp, minus]], dtype=complex)


def project_onto_frame(diag, frame: np.ndarray) -> np.ndarray:
    """Same projection, computed by direct contraction with frame vectors.

    frame columns are (x_f, y_f, z_f = propagation direction); the circular
    vectors of the ray are e'_{+-1} = -+(x_f +- i y_f)/sqrt(2).  Row index is
    the bra helicity (q), column the ket helicity (q'); ordering (+1, -1).
    """
    op = susceptibility_tensor_cart(diag)
    f1, f2 = frame[:, 0], frame[:, 1]
    ep = -(f1 + 1j * f2) / _SQRT2
    em = (f1 - 1j * f2) / _SQRT2
    basis = (ep, em)
    out = np.empty((2, 2), dtype=complex)
    for a, ea in enumerate(basis):
        for b, eb in enumerate(basis):
            out[a, b] = ea.conj() @ op @ eb
    return out


@dataclass(frozen=True)
class TransverseSusceptibility:
    """Pauli decomposition of a projected 2x2 susceptibility.

    M = chi0 * I + chi_vec . sigma with the component labeling fixed so the
    propagator formula reads exactly in terms of (chi, director); see
    :mod:`eitcbs.propagation`.  chi_len is the complex length of chi_vec and
    director = chi_vec / chi_len.  For an isotropic matrix the director is
    undefined and `isotropic` is set.
    """

    chi0: complex
    chi_vec: np.ndarray  # (3,) complex
    chi_len: complex
    director: np.ndarray | None
    isotropic: bool

    def reconstruct(self) -> np.ndarray:
        cx, cy, cz = self.chi_vec
        return np.array(
            [
                [self.chi0 - cz, cx + 1j * cy],
                [cx - 1j * cy, self.chi0 + cz],
            ],
            dtype=complex,
        )


def pauli_decompose(mat: np.ndarray, iso_tol: float = 1e-14) -> TransverseSusceptibility:
    """Split a 2x2 complex matrix into isotropic and traceless-Pauli parts.

    The inverse of :meth:`TransverseSusceptibility.reconstruct`; exact to
    roundoff.  The complex square root for chi_len takes the principal
    branch (the propagator is branch-invariant; see decompose_sweep for a
    continuity-enforced variant used when reporting phi(Delta) sweeps).
    """
    m = np.asarray(mat, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    chi0 = 0.5 * (m[0, 0] + m[1, 1])
    cx = 0.5 * (m[0, 1] + m[1, 0])
    cy = (m[0, 1] - m[1, 0]) / 2.0j
    cz = 0.5 * (m[1, 1] - m[0, 0])
    vec = np.array([cx, cy, cz], dtype=complex)
    length = np.sqrt(np.sum(vec * vec))
    scale = max(abs(chi0), np.max(np.abs(vec)), 1e-300)
    if abs(length) <= iso_tol * scale:
        return TransverseSusceptibility(chi0, vec, 0.0 + 0.0j, None, True)
    return TransverseSusceptibility(chi0, vec, length, vec / length, False)


def decompose_sweep(mats) -> list[TransverseSusceptibility]:
    """Decompose a sequence of matrices, keeping chi_len continuous.

    Flips the (chi_len, director) sign pair whenever the principal branch
    would jump relative to the previous point, so reported phi(Delta) curves
    are smooth.  The flip leaves chi_vec and the propagator unchanged.
    """
    out = []
    prev = None
    for m in mats:
        d = pauli_decompose(m)
        if not d.isotropic and prev is not None:
            if abs(d.chi_len - prev) > abs(-d.chi_len - prev):
                d = TransverseSusceptibility(
                    d.chi0, d.chi_vec, -d.chi_len, -d.director, False
                )
        if not d.isotropic:
            prev = d.chi_len
        out.append(d)
    return out


def transparency_window(
    coupling: ControlCoupling,
    scheme: LevelScheme,
    span: float = 4.0,
    points: int = 8001,
) -> float:
    """Full width of the EIT transparency window from the extinction dip.

    Scans the helicity-averaged Im chi_hat over [-span, span]; the window
    edges are where |Im chi| recovers to half the nearest flanking maximum
    on each side of Delta = 0.  Returns the full width in Gamma.
    """
    grid = np.linspace(-span, span, points)
    im = np.empty_like(grid)
    for i, d in enumerate(grid):
        chi = unit_susceptibility(d, coupling, scheme)
        im[i] = 0.5 * (chi[0].imag + chi[2].imag)
    i0 = np.argmin(np.abs(grid))
    left, right = im[: i0 + 1], im[i0:]
    il = int(np.argmax(left))
    ir = int(np.argmax(right)) + i0
    half_l = 0.5 * im[il]
    half_r = 0.5 * im[ir]
    edge_l = grid[i0]
    for i in range(i0, il, -1):
        if im[i] >= half_l:
            edge_l = grid[i]
            break
    edge_r = grid[i0]
    for i in range(i0, ir):
        if im[i] >= half_r:
            edge_r = grid[i]
            break
    return float(edge_r - edge_l)

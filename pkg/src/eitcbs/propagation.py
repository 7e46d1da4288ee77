"""Coherent propagation between scattering events.

A straight ray through the cloud accumulates the phase integrals

    phi0 = (2 pi omega / c) * integral chi0 ds
    phi  = (2 pi omega / c) * integral chi  ds

of the isotropic part and the complex length of the anisotropic part of the
transverse-projected susceptibility.  Because every component of the medium
tensor scales with the same density profile, the director is exactly
constant along any chord and the amplitude propagator is the closed-form
2x2 exponential

    X = e^{i phi0} [cos(phi) I + i sin(phi) (n . sigma)]

expressed in the ray's Cartesian transverse basis (components 1 = x_f,
2 = y_f).  Written out with the component labeling fixed in
:func:`eitcbs.medium.pauli_decompose`:

    X11 = e^{i phi0} (cos phi - i sin phi n_x)
    X22 = e^{i phi0} (cos phi + i sin phi n_x)
    X12 = i e^{i phi0} sin phi (n_y + i n_z)
    X21 = i e^{i phi0} sin phi (n_y - i n_z)

:func:`greens_matrix_literal` keeps the variant without the factor i on the
diagonal anisotropy terms for reference; that form is not the exponential
of any transverse susceptibility (it changes |X11| under pure linear
birefringence) and fails the ODE cross-check, so the solver uses the
exponential form above.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import frame_for_direction
from .levels import ControlCoupling, LevelScheme
from .medium import (
    CloudGeometry,
    column_between,
    column_semi_infinite,
    pauli_decompose,
    project_onto_frame,
    unit_susceptibility,
)

__all__ = [
    "PropagatorMatrix",
    "phase_integrals",
    "greens_matrix",
    "greens_matrix_from_parts",
    "greens_matrix_literal",
    "compose",
]


class CollinearityError(ValueError):
    """Raised when composing propagators that do not share a ray."""


@dataclass(frozen=True)
class PropagatorMatrix:
    """2x2 amplitude propagator for one straight leg."""

    X: np.ndarray
    phi0: complex
    phi: complex
    director: np.ndarray | None
    frame: np.ndarray
    r1: np.ndarray | None
    r2: np.ndarray | None


def _leg_geometry(r1, r2, direction):
    """Resolve endpoints (either may be None for +-infinity) to a unit ray."""
    if r1 is None and r2 is None:
        raise ValueError("at least one endpoint must be finite")
    if r1 is None or r2 is None:
        if direction is None:
            raise ValueError("semi-infinite legs need an explicit direction")
        u = np.asarray(direction, dtype=float)
        u = u / np.linalg.norm(u)
        return u
    seg = np.asarray(r2, dtype=float) - np.asarray(r1, dtype=float)
    norm = np.linalg.norm(seg)
    if norm == 0.0:
        raise ValueError("coincident endpoints")
    return seg / norm


def _column(cloud, r1, r2, u):
    if r1 is None:
        return column_semi_infinite(cloud, r2, u, incoming=True)
    if r2 is None:
        return column_semi_infinite(cloud, r1, u, incoming=False)
    return column_between(cloud, r1, r2)


def phase_integrals(
    r1,
    r2,
    delta: float,
    cloud: CloudGeometry,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    direction=None,
):
    """Phase integrals (phi0, phi) along the chord r1 -> r2.

    Either endpoint may be None, meaning the leg extends to infinity along
    `direction` (input and output legs of a scattering sequence).
    """
    u = _leg_geometry(r1, r2, direction)
    frame = frame_for_direction(u)
    chi_hat = unit_susceptibility(delta, coupling, scheme)
    dec = pauli_decompose(project_onto_frame(chi_hat, frame))
    tcol = _column(cloud, r1, r2, u)
    pref = 2.0 * np.pi * scheme.wavenumber * tcol
    return pref * dec.chi0, pref * dec.chi_len


def greens_matrix_from_parts(phi0: complex, phi: complex, director) -> np.ndarray:
    """Propagator from (phi0, phi, director); the matrix exponential form."""
    e0 = np.exp(1j * phi0)
    if director is None or phi == 0.0:
        return e0 * np.eye(2, dtype=complex)
    nx, ny, nz = np.asarray(director, dtype=complex)
    c, s = np.cos(phi), np.sin(phi)
    return e0 * np.array(
        [
            [c - 1j * s * nx, 1j * s * (ny + 1j * nz)],
            [1j * s * (ny - 1j * nz), c + 1j * s * nx],
        ],
        dtype=complex,
    )


def greens_matrix_literal(phi0: complex, phi: complex, director) -> np.ndarray:
    """Reference variant with bare (not i-multiplied) diagonal anisotropy.

    Kept only to document how far it drifts from the ODE solution; not used
    by the solver.
    """
    e0 = np.exp(1j * phi0)
    if director is None or phi == 0.0:
        return e0 * np.eye(2, dtype=complex)
    nx, ny, nz = np.asarray(director, dtype=complex)
    c, s = np.cos(phi), np.sin(phi)
    return e0 * np.array(
        [
            [c - s * nx, 1j * s * (ny + 1j * nz)],
            [1j * s * (ny - 1j * nz), c + s * nx],
        ],
        dtype=complex,
    )


def greens_matrix(
    r1,
    r2,
    delta: float,
    cloud: CloudGeometry,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    direction=None,
) -> PropagatorMatrix:
    """Amplitude propagator between two points (or to/from infinity)."""
    u = _leg_geometry(r1, r2, direction)
    frame = frame_for_direction(u)
    chi_hat = unit_susceptibility(delta, coupling, scheme)
    dec = pauli_decompose(project_onto_frame(chi_hat, frame))
    tcol = _column(cloud, r1, r2, u)
    pref = 2.0 * np.pi * scheme.wavenumber * tcol
    phi0 = pref * dec.chi0
    phi = pref * dec.chi_len
    X = greens_matrix_from_parts(phi0, phi, dec.director)
    keep = lambda r: None if r is None else np.asarray(r, dtype=float)
    return PropagatorMatrix(X, phi0, phi, dec.director, frame, keep(r1), keep(r2))


def compose(xa: PropagatorMatrix, xb: PropagatorMatrix) -> PropagatorMatrix:
    """Chain two collinear legs r1->r2 and r2->r3 into one propagator."""
    if not np.allclose(xa.frame, xb.frame, atol=1e-9):
        raise CollinearityError("segments must share one ray frame")
    if xa.r2 is not None and xb.r1 is not None and not np.allclose(xa.r2, xb.r1, atol=1e-12):
        raise CollinearityError("segments must share the interior point")
    da = xa.director if xa.director is not None else xb.director
    return PropagatorMatrix(
        xb.X @ xa.X,
        xa.phi0 + xb.phi0,
        xa.phi + xb.phi,
        da,
        xa.frame,
        xa.r1,
        xb.r2,
    )

"""Per-detuning medium tables shared by the chain kernels.

Everything a kernel needs at one probe detuning, packed as plain arrays:
the unit-density susceptibility operator (for leg propagators), the
Zeeman-summed doubled-space vertices (for ladder and crossed chains), and
the scalars driving the path sampler.  Read-only after construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..amplitudes import report_coefficient, scattering_length
from ..levels import ControlCoupling, LevelScheme
from ..medium import CloudGeometry, susceptibility_tensor_cart, unit_susceptibility
from ..scatterer import alpha_table

__all__ = ["PointTables", "build_tables"]


@dataclass(frozen=True)
class PointTables:
    delta: float
    o_hat: np.ndarray  # (3, 3) complex, unit-density susceptibility operator
    w_ladder: np.ndarray  # (9, 9) complex
    w_crossed: np.ndarray  # (9, 9) complex
    sigma_hat: float  # orientation-averaged extinction cross section, cm^2
    ell_s: float  # scattering strength length, cm
    two_pi_k: float
    n0: float
    r0: float
    total_atoms: float
    report_coef: float

    @property
    def dark(self) -> bool:
        return self.sigma_hat == 0.0 and not np.abs(self.w_ladder).any()


def build_tables(
    delta: float,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    cloud: CloudGeometry,
) -> PointTables:
    chi_hat = unit_susceptibility(delta, coupling, scheme)
    o_hat = susceptibility_tensor_cart(chi_hat)
    alphas = alpha_table(delta, coupling)
    w_l = np.zeros((9, 9), dtype=complex)
    w_c = np.zeros((9, 9), dtype=complex)
    for mi in range(3):
        for fi in range(3):
            a = alphas[mi, fi]
            w_l += np.kron(a, a.conj())
            w_c += np.kron(a, a.conj().T)
    w_l /= 3.0
    w_c /= 3.0
    k = scheme.wavenumber
    sigma_hat = max(4.0 * np.pi * k * float(np.mean(chi_hat.imag)), 0.0)
    for arr in (o_hat, w_l, w_c):
        arr.setflags(write=False)
    return PointTables(
        delta=float(delta),
        o_hat=o_hat,
        w_ladder=w_l,
        w_crossed=w_c,
        sigma_hat=sigma_hat,
        ell_s=scattering_length(scheme),
        two_pi_k=2.0 * np.pi * k,
        n0=cloud.peak_density,
        r0=cloud.gaussian_radius,
        total_atoms=cloud.total_atoms,
        report_coef=report_coefficient(scheme),
    )

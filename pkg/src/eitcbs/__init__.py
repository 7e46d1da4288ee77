"""Coherent backscattering from cold atomic clouds under an EIT control field.

Monte Carlo simulator of the polarization-resolved backscattering spectrum
(enhancement factor, including destructive-interference regions) and of
time-resolved scattered pulses, for a Gaussian cloud of three-level atoms
dressed by a circularly polarized control field.

Internal units: Gamma = 1 (rates, detunings, Rabi frequencies), hbar = 1,
reduced dipole of the probed line = 1, lengths in cm.  Cross sections are
reported in units of the bare on-resonance single-atom cross section.
"""
from .angular import clebsch_gordan, wigner3j, wigner6j
from .channels import CHANNELS, PolarizationChannel, channel_vectors, raman_filter
from .levels import ControlCoupling, LevelScheme, control_matrix_element, dipole_element
from .medium import CloudGeometry, density, lab_susceptibility, pauli_decompose, project_susceptibility
from .propagation import compose, greens_matrix, phase_integrals
from .scatterer import scattering_tensor, self_energy, transverse_restriction

__version__ = "0.1.0"

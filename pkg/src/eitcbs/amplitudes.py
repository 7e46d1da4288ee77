"""Reference evaluators for fixed multiple-scattering paths.

A path is an ordered list of atoms; the photon enters along +z, scatters on
each atom in sequence, and leaves along -z (exact backscattering).  The
ladder value of a path is the Zeeman-averaged modulus squared of its
amplitude chain; the crossed value is the interference of the chain with
the atom-order-reversed (reciprocal) chain, with identical initial and
final atomic states on both sides.

Zeeman sums are carried in the doubled 4x4 polarization space: a per-atom
vertex  (1/3) sum_{m, m''} B (x) B~  couples the two amplitude factors so
the cost stays linear in path order.  For a fixed Zeeman assignment the
plain 2x2 chains are used instead.

All returned cross sections are differential, in units of the bare
on-resonance single-atom cross section per steradian.  Velocities are
Doppler-shift vectors k*v expressed in Gamma (zero in the cold-atom
default); they enter the leg frequencies, the vertex detunings, and the
crossed-term phase factor exactly as in the frequency bookkeeping of the
scattering series.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import PolarizationChannel, frame_for_direction, helicity_components
from .levels import ControlCoupling, LevelScheme
from .medium import (
    CloudGeometry,
    column_between,
    column_semi_infinite,
    project_onto_frame,
    unit_susceptibility,
)
from .scatterer import scattering_tensor

__all__ = [
    "ScatteringPath",
    "ladder_term",
    "crossed_term",
    "single_scattering_fixed",
    "two_atom_interference_report",
    "report_coefficient",
]

_Z = np.array([0.0, 0.0, 1.0])


def report_coefficient(scheme: LevelScheme) -> float:
    """Converts a squared amplitude chain to sigma_0 per steradian."""
    return 9.0 * scheme.branching_to_probed / (32.0 * np.pi)


def scattering_length(scheme: LevelScheme) -> float:
    """Amplitude strength of one scattering leg: k^2 * alpha = ell_s * a / r."""
    return 3.0 * scheme.branching_to_probed / (4.0 * scheme.wavenumber)


@dataclass
class ScatteringPath:
    """Ordered atom configuration for one multiple-scattering sequence.

    velocities are k.v Doppler vectors in units of Gamma; zeeman, when
    given, fixes (m_a, m_a'') per atom instead of summing.
    """

    positions: np.ndarray
    velocities: np.ndarray | None = None
    zeeman: list[tuple[int, int]] | None = None

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        n = len(self.positions)
        if self.velocities is None:
            self.velocities = np.zeros((n, 3))
        else:
            self.velocities = np.atleast_2d(np.asarray(self.velocities, dtype=float))
        if self.zeeman is not None and len(self.zeeman) != n:
            raise ValueError("one (m, m'') pair per atom required")
        if n >= 2:
            d = np.linalg.norm(np.diff(self.positions, axis=0), axis=1)
            if np.any(d == 0.0):
                raise ValueError("coincident atom positions (recurrent paths excluded)")

    @property
    def order(self) -> int:
        return len(self.positions)

    def leg_frequencies(self, delta: float, reverse: bool = False):
        """Detunings of the input leg, internal legs, and output leg.

        Rayleigh/elastic-Raman finals within the probed level are
        degenerate, so only Doppler terms shift the frequencies.  With
        reverse=True, the bookkeeping of the reciprocal (atom-order
        reversed) sequence.
        """
        pos = self.positions[::-1] if reverse else self.positions
        vel = self.velocities[::-1] if reverse else self.velocities
        n = len(pos)
        dirs = [_Z]
        for a in range(n - 1):
            seg = pos[a + 1] - pos[a]
            dirs.append(seg / np.linalg.norm(seg))
        dirs.append(-_Z)
        freqs = [delta]
        for a in range(n):
            shift = (dirs[a + 1] - dirs[a]) @ vel[a]
            freqs.append(freqs[-1] + shift)
        return np.array(freqs)  # length n+1: input, internal..., output


@dataclass
class _Medium:
    cloud: CloudGeometry
    coupling: ControlCoupling
    scheme: LevelScheme
    attenuation: bool = True

    def propagator(self, r1, r2, delta_leg, direction=None) -> np.ndarray:
        """2x2 leg propagator in the leg frame; identity if attenuation is off."""
        if r1 is None or r2 is None:
            u = np.asarray(direction, dtype=float)
        else:
            u = np.asarray(r2, dtype=float) - np.asarray(r1, dtype=float)
        u = u / np.linalg.norm(u)
        if not self.attenuation:
            return np.eye(2, dtype=complex)
        frame = frame_for_direction(u)
        chi_hat = unit_susceptibility(delta_leg, self.coupling, self.scheme)
        m = project_onto_frame(chi_hat, frame)
        if r1 is None:
            tcol = column_semi_infinite(self.cloud, r2, u, incoming=True)
        elif r2 is None:
            tcol = column_semi_infinite(self.cloud, r1, u, incoming=False)
        else:
            tcol = column_between(self.cloud, r1, r2)
        phases = 2.0 * np.pi * self.scheme.wavenumber * tcol * m
        return _expm_2x2_circ(phases)


def _expm_2x2_circ(phases: np.ndarray) -> np.ndarray:
    """exp(i * phases) for a 2x2 in the circular basis, returned in the
    Cartesian transverse basis of the same frame."""
    phi0 = 0.5 * (phases[0, 0] + phases[1, 1])
    g = phases - phi0 * np.eye(2)
    w = np.sqrt(-np.linalg.det(g) + 0j)
    if abs(w) < 1e-30:
        body = np.eye(2) + 1j * g
    else:
        body = np.cos(w) * np.eye(2) + 1j * (np.sin(w) / w) * g
    x_circ = np.exp(1j * phi0) * body
    return _C @ x_circ @ _CINV


# Circular (q=+1, q=-1) to Cartesian (x_f, y_f) component change of basis.
_C = np.array([[-1.0, 1.0], [-1.0j, -1.0j]]) / np.sqrt(2.0)
_CINV = np.array([[-1.0, 1.0j], [1.0, 1.0j]]) / np.sqrt(2.0)


def _path_geometry(positions):
    n = len(positions)
    legs_u, legs_d = [], []
    for a in range(n - 1):
        seg = positions[a + 1] - positions[a]
        d = np.linalg.norm(seg)
        legs_u.append(seg / d)
        legs_d.append(d)
    frame_in = frame_for_direction(_Z)
    frame_out = frame_for_direction(-_Z)
    frames_fwd = [frame_for_direction(u) for u in legs_u]
    frames_rev = [frame_for_direction(-u) for u in legs_u]
    return legs_u, np.array(legs_d) if legs_d else np.zeros(0), frame_in, frame_out, frames_fwd, frames_rev


def _alpha_set(delta_vertex: float, coupling: ControlCoupling):
    """Nine detected-channel tensors [m+1][mf+1] at one vertex detuning."""
    return [
        [scattering_tensor(m, mf, delta_vertex, coupling).components for mf in (-1, 0, 1)]
        for m in (-1, 0, 1)
    ]


def _vertex_w(alphas, crossed: bool) -> np.ndarray:
    """Doubled-space Zeeman vertex: (1/3) sum_mm'' a (x) a* (ladder) or
    a (x) a^dag (crossed)."""
    w = np.zeros((9, 9), dtype=complex)
    for row in alphas:
        for a in row:
            w += np.kron(a, a.conj().T if crossed else a.conj())
    return w / 3.0


def _t2(frame) -> np.ndarray:
    return frame[:, :2]


def _boundary_vectors(channel: PolarizationChannel):
    u_in = helicity_components(channel.input_helicity)
    u_out = helicity_components(channel.output_helicity)
    return u_in, u_out


def _geometry_weight(legs_d, scheme) -> float:
    ell = scattering_length(scheme)
    return float(np.prod((ell / legs_d) ** 2)) if len(legs_d) else 1.0


def ladder_term(
    path: ScatteringPath,
    channel: PolarizationChannel,
    delta: float,
    cloud: CloudGeometry,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    attenuation: bool = True,
) -> float:
    """Non-interfering (squared-amplitude) value of one ordered path."""
    med = _Medium(cloud, coupling, scheme, attenuation)
    pos = path.positions
    n = path.order
    legs_u, legs_d, f_in, f_out, f_fwd, _ = _path_geometry(pos)
    freqs = path.leg_frequencies(delta)

    x_in = med.propagator(None, pos[0], freqs[0], direction=_Z)
    r = np.kron(x_in, x_in.conj())
    for a in range(n):
        delta_vertex = freqs[a] - legs_u_dir(a, legs_u) @ path.velocities[a]
        alphas = _alpha_set(delta_vertex, coupling)
        ein = f_in if a == 0 else f_fwd[a - 1]
        eout = f_out if a == n - 1 else f_fwd[a]
        if path.zeeman is None:
            w = _vertex_w(alphas, crossed=False)
            v = np.kron(_t2(eout).T, _t2(eout).T) @ w @ np.kron(_t2(ein), _t2(ein))
        else:
            m, mf = path.zeeman[a]
            b = _t2(eout).T @ alphas[m + 1][mf + 1] @ _t2(ein)
            v = np.kron(b, b.conj())
        r = v @ r
        if a < n - 1:
            x = med.propagator(pos[a], pos[a + 1], freqs[a + 1])
            r = np.kron(x, x.conj()) @ r
    x_out = med.propagator(pos[n - 1], None, freqs[n], direction=-_Z)
    r = np.kron(x_out, x_out.conj()) @ r

    u_in, u_out = _boundary_vectors(channel)
    val = np.kron(u_out, u_out.conj()).conj() @ r @ np.kron(u_in, u_in.conj())
    val = val.real * _geometry_weight(legs_d, scheme) * _omega_power_ratio(freqs, scheme)
    return float(val * report_coefficient(scheme))


def legs_u_dir(a, legs_u):
    """Unit vector of the leg arriving at atom a (input beam for a = 0)."""
    return _Z if a == 0 else legs_u[a - 1]


def _omega_power_ratio(freqs, scheme, freqs_rec=None) -> float:
    """Frequency-power prefactors relative to the elastic limit.

    Ladder: (w_leg/w)^4 per internal leg and (w'/w)^3 for the output;
    crossed: (w_leg_dir * w_leg_rec / w^2)^2 per internal leg.  Equal to 1
    whenever all velocities vanish.
    """
    goc = scheme.gamma_over_c / scheme.wavenumber
    w = 1.0 + goc * np.asarray(freqs)
    if freqs_rec is None:
        internal = np.prod((w[1:-1] / w[0]) ** 4) if len(w) > 2 else 1.0
        return float(internal * (w[-1] / w[0]) ** 3)
    wr = 1.0 + goc * np.asarray(freqs_rec)
    internal = 1.0
    if len(w) > 2:
        internal = np.prod((w[1:-1] * wr[1:-1][::-1] / w[0] ** 2) ** 2)
    return float(internal * (w[-1] / w[0]) ** 3)


def crossed_term(
    path: ScatteringPath,
    channel: PolarizationChannel,
    delta: float,
    cloud: CloudGeometry,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    attenuation: bool = True,
    return_complex: bool = False,
):
    """Interference of one ordered path with its reciprocal partner.

    Returns 2 Re(A_dir A_rec*) after the Zeeman sums (the reversed ordering
    contributes the complex conjugate, so the pair total is real).  With
    return_complex=True the unsymmetrized complex product is returned
    instead.
    """
    med = _Medium(cloud, coupling, scheme, attenuation)
    pos = path.positions
    n = path.order
    if n < 2:
        raise ValueError("crossed term requires at least double scattering")
    legs_u, legs_d, f_in, f_out, f_fwd, f_rev = _path_geometry(pos)
    freqs = path.leg_frequencies(delta)
    freqs_rec = path.leg_frequencies(delta, reverse=True)

    x_in_first = med.propagator(None, pos[0], freqs[0], direction=_Z)
    x_out_first = med.propagator(pos[0], None, freqs_rec[n], direction=-_Z)
    r = np.kron(x_in_first, x_out_first.conj().T)
    for a in range(n):
        # Direct-chain vertex detuning, and the reciprocal chain's at the
        # same atom (its incoming leg runs opposite).
        dv_dir = freqs[a] - legs_u_dir(a, legs_u) @ path.velocities[a]
        dv_rec = freqs_rec[n - 1 - a] - rev_in_u(a, n, legs_u) @ path.velocities[a]
        ein = f_in if a == 0 else f_fwd[a - 1]
        eout = f_out if a == n - 1 else f_fwd[a]
        rin = f_in if a == n - 1 else f_rev[a]
        rout = f_out if a == 0 else f_rev[a - 1]
        alphas_d = _alpha_set(dv_dir, coupling)
        alphas_r = alphas_d if dv_rec == dv_dir else _alpha_set(dv_rec, coupling)
        if path.zeeman is None:
            w = np.zeros((9, 9), dtype=complex)
            for mi in range(3):
                for fi in range(3):
                    w += np.kron(alphas_d[mi][fi], alphas_r[mi][fi].conj().T)
            w /= 3.0
            v = np.kron(_t2(eout).T, _t2(rin).T) @ w @ np.kron(_t2(ein), _t2(rout))
        else:
            m, mf = path.zeeman[a]
            b = _t2(eout).T @ alphas_d[m + 1][mf + 1] @ _t2(ein)
            bt = _t2(rout).T @ alphas_r[m + 1][mf + 1] @ _t2(rin)
            v = np.kron(b, bt.conj().T)
        r = v @ r
        if a < n - 1:
            x = med.propagator(pos[a], pos[a + 1], freqs[a + 1])
            xr = med.propagator(pos[a + 1], pos[a], freqs_rec[n - 1 - a])
            r = np.kron(x, xr.conj().T) @ r
    x_out_last = med.propagator(pos[n - 1], None, freqs[n], direction=-_Z)
    x_in_last = med.propagator(None, pos[n - 1], freqs_rec[0], direction=_Z)
    r = np.kron(x_out_last, x_in_last.conj().T) @ r

    u_in, u_out = _boundary_vectors(channel)
    val = np.kron(u_out, u_in).conj() @ r @ np.kron(u_in, u_out)
    val = val * _crossed_phase(path, freqs, freqs_rec, scheme)
    val = val * _geometry_weight(legs_d, scheme)
    val = val * _omega_power_ratio(freqs, scheme, freqs_rec)
    val = val * report_coefficient(scheme)
    if return_complex:
        return complex(val)
    return float(2.0 * val.real)


def rev_in_u(a, n, legs_u):
    """Incoming direction of the reciprocal chain at atom a."""
    return _Z if a == n - 1 else -legs_u[a]


def _crossed_phase(path, freqs, freqs_rec, scheme) -> complex:
    """Residual phase between direct and reciprocal chains.

    At exact backscattering the (k + k') term vanishes; what remains is the
    per-leg propagation phase difference from Doppler-shifted internal
    frequencies.  Identically 1 for atoms at rest.
    """
    if not path.velocities.any():
        return 1.0 + 0.0j
    goc = scheme.gamma_over_c
    phase = 0.0
    d = np.linalg.norm(np.diff(path.positions, axis=0), axis=1)
    n = path.order
    for leg in range(n - 1):
        w_dir = freqs[leg + 1]
        w_rec = freqs_rec[n - 1 - leg]
        phase += (w_dir - w_rec) * d[leg] * goc
    return np.exp(1j * phase)


def single_scattering_fixed(
    positions,
    channel: PolarizationChannel,
    delta: float,
    cloud: CloudGeometry,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    attenuation: bool = True,
) -> float:
    """Sum of single-scattering contributions of a fixed set of atoms."""
    total = 0.0
    for r in np.atleast_2d(np.asarray(positions, dtype=float)):
        total += ladder_term(
            ScatteringPath(r[None, :]), channel, delta, cloud, coupling, scheme, attenuation
        )
    return total


def two_atom_interference_report(
    path: ScatteringPath,
    channel: PolarizationChannel,
    delta: float,
    cloud: CloudGeometry,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    attenuation: bool = True,
) -> list[dict]:
    """Per-Zeeman-assignment amplitudes of a double-scattering diagram.

    For each assignment ((m1, m1''), (m2, m2'')) with a nonvanishing
    contribution, reports |A_dir|, |A_rec| and their phase difference; the
    destructive-interference mechanism shows up as phase differences near
    pi with comparable magnitudes.
    """
    if path.order != 2:
        raise ValueError("the interference report is defined for atom pairs")
    rows = []
    for m1 in (-1, 0, 1):
        for f1 in (-1, 0, 1):
            for m2 in (-1, 0, 1):
                for f2 in (-1, 0, 1):
                    z = [(m1, f1), (m2, f2)]
                    p = ScatteringPath(path.positions, path.velocities, zeeman=z)
                    c = crossed_term(
                        p, channel, delta, cloud, coupling, scheme,
                        attenuation=attenuation, return_complex=True,
                    )
                    l_dir = ladder_term(
                        p, channel, delta, cloud, coupling, scheme, attenuation
                    )
                    p_rev = ScatteringPath(
                        path.positions[::-1], path.velocities[::-1], zeeman=z[::-1]
                    )
                    l_rec = ladder_term(
                        p_rev, channel, delta, cloud, coupling, scheme, attenuation
                    )
                    if l_dir < 1e-300 or l_rec < 1e-300:
                        continue
                    a_dir = np.sqrt(l_dir)
                    a_rec = np.sqrt(l_rec)
                    rows.append(
                        {
                            "zeeman": ((m1, f1), (m2, f2)),
                            "amp_direct": a_dir,
                            "amp_reciprocal": a_rec,
                            "phase_difference": float(np.angle(c)),
                            "interference": float(2.0 * c.real),
                        }
                    )
    return rows

"""Monte Carlo assembly of the backscattering cross section.

Samples atom configurations (positions distributed with the cloud density,
free paths in optical depth), scores every scattering order up to the
truncation by local estimation at exact backscattering, and reduces the
per-order ladder and crossed contributions into a CrossSectionBreakdown
per polarization channel.

Determinism contract: the variates of sample s are a pure function of
(master seed, s); chunk boundaries are fixed (1024 samples); chunks are
reduced in index order.  Results are therefore byte-identical for any
worker count.  Common random numbers: the same variate blocks are reused
at every detuning of a sweep, which strongly smooths spectra point to
point.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channels import PolarizationChannel
from .kernels import CHANNEL_ORDER, ChunkAccumulator, build_tables, get_backend
from .levels import ControlCoupling, LevelScheme
from .medium import CloudGeometry, column_between, unit_susceptibility

__all__ = [
    "McParams",
    "CrossSectionBreakdown",
    "ConfigError",
    "monte_carlo_breakdown",
    "single_scattering",
    "spectrum_sweep",
    "enhancement_factor",
    "optical_depth",
]

CHUNK = 1024  # fixed; part of the (seed -> stream) determinism contract


class ConfigError(ValueError):
    """Invalid Monte Carlo or run parameters."""


@dataclass(frozen=True)
class McParams:
    samples: int
    seed: int
    max_order: int = 8
    workers: int = 1
    backend: str | None = None
    doppler_width: float = 0.0  # rms of k.v in Gamma; 0 = atoms at rest

    def __post_init__(self):
        if self.samples < 1:
            raise ConfigError("samples must be >= 1")
        if self.max_order < 1:
            raise ConfigError("max_order must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")


@dataclass(frozen=True)
class CrossSectionBreakdown:
    """Per-order backscattering cross section of one channel, sigma_0/sr."""

    channel: str
    delta: float
    single: float
    single_err: float
    ladder_by_order: tuple[float, ...]  # orders 2..max_order
    ladder_err_by_order: tuple[float, ...]
    crossed_by_order: tuple[float, ...]
    crossed_err_by_order: tuple[float, ...]
    incoherent_total: float
    incoherent_err: float
    crossed_total: float
    crossed_total_err: float
    covariance_dc: float
    truncation_tail: float
    samples: int

    @property
    def ladder_total(self) -> float:
        return float(sum(self.ladder_by_order))

    @property
    def dark(self) -> bool:
        return self.incoherent_total == 0.0


def _variates(seed: int, chunk_index: int, n_rows: int, max_order: int) -> np.ndarray:
    """The fixed variate block of one chunk (counter-based, reproducible)."""
    bits = np.random.Philox(key=np.array([seed, chunk_index], dtype=np.uint64))
    gen = np.random.Generator(bits)
    return gen.random((n_rows, 3 * max_order))


def _run_point_accum(delta, coupling, scheme, cloud, mc) -> ChunkAccumulator:
    backend = get_backend(mc.backend)
    tables = build_tables(delta, coupling, scheme, cloud)
    acc = ChunkAccumulator(mc.max_order)
    n_chunks = (mc.samples + CHUNK - 1) // CHUNK
    for ci in range(n_chunks):
        rows = min(CHUNK, mc.samples - ci * CHUNK)
        u = _variates(mc.seed, ci, rows, mc.max_order)
        lad, cro = backend.run_steady_chunk(tables, u, mc.max_order)
        acc.add_chunk(lad, cro)
    return acc


def _mean_err(total, total_sq, n):
    mean = total / n
    if n < 2:
        return mean, np.zeros_like(mean)
    var = np.maximum(total_sq / n - mean**2, 0.0)
    return mean, np.sqrt(var / (n - 1))


def _breakdown_from_accum(acc, channel_index, channel_label, delta, coef, mc):
    n = acc.n_samples
    lad_mean, lad_err = _mean_err(
        acc.ladder_sum[:, channel_index], acc.ladder_sq[:, channel_index], n
    )
    cro_mean, cro_err = _mean_err(
        acc.crossed_sum[:, channel_index], acc.crossed_sq[:, channel_index], n
    )
    d_mean, d_err = _mean_err(acc.tot[0, channel_index], acc.tot[1, channel_index], n)
    c_mean, c_err = _mean_err(acc.tot[2, channel_index], acc.tot[3, channel_index], n)
    cov_dc = (acc.tot[4, channel_index] / n - d_mean * c_mean) / max(n - 1, 1)

    # The ordered-path domain contains both orderings of every pair, so the
    # mean of the per-path scores Re(A_dir A_rec*) already integrates to the
    # full (symmetrized) crossed contribution; no extra factor.
    lad_mean, lad_err = coef * lad_mean, coef * lad_err
    cro_mean, cro_err = coef * cro_mean, coef * cro_err
    d_mean, d_err = coef * d_mean, coef * d_err
    c_mean, c_err = coef * c_mean, coef * c_err
    cov_dc = coef * coef * cov_dc

    tail = 0.0
    if mc.max_order >= 3 and lad_mean[-2] > 0.0:
        ratio = lad_mean[-1] / lad_mean[-2]
        if 0.0 < ratio < 1.0:
            tail = float(lad_mean[-1] * ratio / (1.0 - ratio))

    return CrossSectionBreakdown(
        channel=channel_label,
        delta=float(delta),
        single=float(lad_mean[0]),
        single_err=float(lad_err[0]),
        ladder_by_order=tuple(lad_mean[1:]),
        ladder_err_by_order=tuple(lad_err[1:]),
        crossed_by_order=tuple(cro_mean[1:]),
        crossed_err_by_order=tuple(cro_err[1:]),
        incoherent_total=float(d_mean),
        incoherent_err=float(d_err),
        crossed_total=float(c_mean),
        crossed_total_err=float(c_err),
        covariance_dc=float(cov_dc),
        truncation_tail=tail,
        samples=n,
    )


def _channel_index(channel: PolarizationChannel) -> int:
    return CHANNEL_ORDER.index((channel.input_helicity, channel.output_helicity))


def monte_carlo_breakdown(
    channel: PolarizationChannel,
    delta: float,
    cloud: CloudGeometry,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    mc: McParams,
) -> CrossSectionBreakdown:
    """Full per-order breakdown for one channel at one detuning."""
    if mc.doppler_width > 0.0:
        acc = _run_point_doppler(delta, coupling, scheme, cloud, mc)
    else:
        acc = _run_point_accum(delta, coupling, scheme, cloud, mc)
    tables = build_tables(delta, coupling, scheme, cloud)
    return _breakdown_from_accum(
        acc, _channel_index(channel), channel.label, delta, tables.report_coef, mc
    )


def single_scattering(
    channel: PolarizationChannel,
    delta: float,
    cloud: CloudGeometry,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    mc: McParams,
) -> tuple[float, float]:
    """(value, standard error) of the single-scattering cross section."""
    b = monte_carlo_breakdown(
        channel, delta, cloud, coupling, scheme, replace(mc, max_order=1)
    )
    return b.single, b.single_err


def enhancement_factor(breakdown: CrossSectionBreakdown) -> tuple[float, float]:
    """(value, standard error) of (single + L + C) / (single + L).

    NaN at a total-transparency point where the denominator vanishes.
    """
    d = breakdown.incoherent_total
    if d <= 0.0:
        return float("nan"), float("nan")
    c = breakdown.crossed_total
    value = 1.0 + c / d
    n = breakdown.samples
    var = (
        breakdown.crossed_total_err**2 / d**2
        + (c * breakdown.incoherent_err / d**2) ** 2
        - 2.0 * c * breakdown.covariance_dc / d**3
    )
    return value, float(np.sqrt(max(var, 0.0)))


@dataclass(frozen=True)
class SweepPoint:
    delta: float
    breakdowns: dict  # channel label -> CrossSectionBreakdown
    enhancement: dict  # channel label -> (value, err)


def spectrum_sweep(
    channels,
    delta_grid,
    cloud: CloudGeometry,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    mc: McParams,
) -> list[SweepPoint]:
    """Enhancement-factor spectrum over a detuning grid, all channels.

    The four channels share every sampled configuration; the same variate
    blocks are reused at each grid point (common random numbers).
    """
    grid = [float(d) for d in np.atleast_1d(np.asarray(delta_grid, dtype=float))]
    if not grid:
        return []
    channels = list(channels)
    if mc.doppler_width > 0.0:
        accums = [_run_point_doppler(d, coupling, scheme, cloud, mc) for d in grid]
    elif mc.workers > 1 and len(grid) > 1:
        args = [(d, coupling, scheme, cloud, replace(mc, workers=1)) for d in grid]
        max_workers = min(mc.workers, len(grid), os.cpu_count() or 1)
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            accums = list(pool.map(_point_task, args))
    else:
        accums = [_run_point_accum(d, coupling, scheme, cloud, mc) for d in grid]

    coef = build_tables(grid[0], coupling, scheme, cloud).report_coef
    points = []
    for d, acc in zip(grid, accums):
        brks, enh = {}, {}
        for ch in channels:
            b = _breakdown_from_accum(acc, _channel_index(ch), ch.label, d, coef, mc)
            brks[ch.label] = b
            enh[ch.label] = enhancement_factor(b)
        points.append(SweepPoint(d, brks, enh))
    return points


def _point_task(args):
    delta, coupling, scheme, cloud, mc = args
    return _run_point_accum(delta, coupling, scheme, cloud, mc)


def optical_depth(
    delta: float,
    cloud: CloudGeometry,
    coupling: ControlCoupling,
    scheme: LevelScheme,
    q: int = 1,
) -> float:
    """Extinction optical depth b(Delta) along the central diameter.

    b = (4 pi omega / c) Im chi_q^q integrated on the z axis through the
    cloud center, for circular component q (lab basis).
    """
    chi_hat = unit_susceptibility(delta, coupling, scheme)[q + 1]
    far = 50.0 * cloud.gaussian_radius
    center = np.asarray(cloud.center)
    tcol = column_between(
        cloud, center - np.array([0, 0, far]), center + np.array([0, 0, far])
    )
    return float(4.0 * np.pi * scheme.wavenumber * chi_hat.imag * tcol)


# ---------------------------------------------------------------------------
# Doppler hook: atoms in motion, evaluated with the reference path chains.
# Correct but far slower than the kernels; intended for small studies of
# residual-Doppler effects, not production sweeps.
# ---------------------------------------------------------------------------


def _run_point_doppler(delta, coupling, scheme, cloud, mc) -> ChunkAccumulator:
    from .amplitudes import ScatteringPath, crossed_term, ladder_term, report_coefficient
    from .channels import PolarizationChannel
    from .kernels.numpy_backend import _ray_params, _sample_depth, erfinv_clipped
    from scipy.special import ndtri

    tables = build_tables(delta, coupling, scheme, cloud)
    coef = report_coefficient(scheme)
    acc = ChunkAccumulator(mc.max_order)
    sigma = tables.sigma_hat
    r0 = tables.r0
    sq2 = np.sqrt(2.0)
    channels = [PolarizationChannel(i, o) for i, o in CHANNEL_ORDER]
    n_chunks = (mc.samples + CHUNK - 1) // CHUNK
    for ci in range(n_chunks):
        rows = min(CHUNK, mc.samples - ci * CHUNK)
        u = np.clip(_variates(mc.seed, ci, rows, mc.max_order), 1e-15, 1 - 1e-15)
        vel_gen = np.random.Generator(
            np.random.Philox(key=np.array([mc.seed ^ 0x9E3779B9, ci], dtype=np.uint64))
        )
        vels = vel_gen.normal(0.0, mc.doppler_width, size=(rows, mc.max_order, 3))
        lad = np.zeros((rows, mc.max_order, 4))
        cro = np.zeros((rows, mc.max_order, 4))
        for s in range(rows):
            x = r0 * ndtri(u[s, 0])
            y = r0 * ndtri(u[s, 1])
            a_scale = tables.n0 * np.exp(-(x * x + y * y) / (2 * r0**2)) * np.sqrt(np.pi / 2) * r0
            t, _ = _sample_depth(u[s, 2], 2.0 * a_scale, sigma)
            z = sq2 * r0 * erfinv_clipped(t / a_scale - 1.0)
            a_sig = sigma * 2.0 * a_scale
            f = -np.expm1(-a_sig) / a_sig if a_sig > 1e-8 else 1.0
            geow = tables.total_atoms * f * np.exp(sigma * t)
            positions = [np.array([x, y, z])]
            for order in range(1, mc.max_order + 1):
                path = ScatteringPath(
                    np.array(positions), velocities=vels[s, :order].copy()
                )
                for k_ch, ch in enumerate(channels):
                    lad[s, order - 1, k_ch] = geow / coef * ladder_term(
                        path, ch, delta, cloud, coupling, scheme
                    )
                    if order > 1:
                        cro[s, order - 1, k_ch] = geow / coef * 0.5 * crossed_term(
                            path, ch, delta, cloud, coupling, scheme
                        )
                if order == mc.max_order:
                    break
                uu = u[s, 3 * order : 3 * order + 3]
                cth = 2 * uu[0] - 1
                sth = np.sqrt(max(1 - cth * cth, 0.0))
                ph = 2 * np.pi * uu[1]
                u_dir = np.array([sth * np.cos(ph), sth * np.sin(ph), cth])
                a_ray, s0, erf0, c_fwd = _ray_params(tables, positions[-1][None], u_dir[None])
                if c_fwd[0] < 1e-280:
                    break
                t_new, w_t = _sample_depth(uu[2], c_fwd[0], sigma)
                s_new = sq2 * r0 * erfinv_clipped(erf0[0] + t_new / a_ray[0])
                dstep = max(s_new - s0[0], 1e-300)
                positions.append(positions[-1] + dstep * u_dir)
                # undo the (ell_s/d)^2 the path evaluator applies per leg
                geow *= 4.0 * np.pi * tables.ell_s**2 * w_t * (dstep / tables.ell_s) ** 2
        acc.add_chunk(lad, cro)
    return acc

"""Pulse dynamics: spectrum checks, convolution oracle, consistency limits."""
import numpy as np
import pytest

from eitcbs.channels import PolarizationChannel
from eitcbs.engine import ConfigError, McParams, enhancement_factor, monte_carlo_breakdown
from eitcbs.pulse import (
    PulseSpec,
    _NodeContext,
    amplitude_spectrum,
    envelope_spectrum,
    fixed_path_traces,
    scattered_traces,
    time_resolved_enhancement,
)

from oracles import brute_force_amplitudes

CH = PolarizationChannel(1, -1)


def test_pulse_spec_validation():
    with pytest.raises(ValueError):
        PulseSpec(tau=0.0)


def test_amplitude_spectrum_parseval():
    pulse = PulseSpec(tau=200.0)
    grid = np.linspace(-0.05, 0.05, 4001)
    spec = amplitude_spectrum(pulse, grid)
    lhs = np.trapezoid(np.abs(spec) ** 2, grid) / (2 * np.pi)
    rhs = np.sqrt(np.pi) * pulse.tau  # integral of exp(-t^2/tau^2)
    assert lhs == pytest.approx(rhs, rel=1e-8)


def test_amplitude_spectrum_width():
    pulse = PulseSpec(tau=200.0)
    grid = np.linspace(-0.06, 0.06, 6001)
    spec = np.abs(amplitude_spectrum(pulse, grid)) ** 2
    half = spec.max() / 2
    above = grid[spec >= half]
    fwhm = above.max() - above.min()
    assert fwhm == pytest.approx(2 * np.sqrt(np.log(2)) / pulse.tau, rel=1e-3)


def test_amplitude_spectrum_monochromatic_concentration():
    grid = np.linspace(-0.05, 0.05, 2001)
    narrow = amplitude_spectrum(PulseSpec(tau=1e4), grid)
    power = np.abs(narrow) ** 2
    central = power[np.abs(grid) < 0.001].sum()
    assert central / power.sum() > 1 - 1e-12


def test_amplitude_spectrum_grid_errors():
    pulse = PulseSpec(tau=200.0)
    with pytest.raises(ConfigError, match="span"):
        amplitude_spectrum(pulse, np.linspace(-0.01, 0.01, 101))
    with pytest.raises(ConfigError, match="spacing"):
        amplitude_spectrum(pulse, np.linspace(-0.1, 0.1, 21))


def test_node_tables_reduce_to_steady(scheme, cloud, coupling_weak):
    """sum_nn' T_n T_n'* G == the steady doubled vertex at each node."""
    from eitcbs.kernels import build_tables

    pulse = PulseSpec(tau=200.0, carrier_delta=0.4)
    ctx = _NodeContext(pulse, cloud, coupling_weak, scheme, 9, 0.1)
    p = ctx.n_nodes
    for pi in (0, 4, 8):
        delta = ctx.nodes[pi]
        tables = build_tables(delta, coupling_weak, scheme, cloud)
        w_pair = ctx.tt[pi * p + pi]  # diagonal pair (p, p)
        got_l = np.einsum("z,zpq->pq", w_pair, ctx.g_ladder)
        got_c = np.einsum("z,zpq->pq", w_pair, ctx.g_crossed)
        assert np.allclose(got_l, tables.w_ladder, atol=1e-14)
        assert np.allclose(got_c, tables.w_crossed, atol=1e-14)


def test_fixed_path_convolution_oracle(scheme, cloud, coupling_weak, rng):
    """Production traces of one two-atom path against a dense per-Zeeman
    time-domain convolution built from the brute-force amplitudes."""
    pulse = PulseSpec(tau=200.0, carrier_delta=0.1)
    pos = np.array([[0.05, -0.02, -0.15], [-0.07, 0.1, 0.2]])
    times = np.linspace(-400.0, 900.0, 257)
    got = fixed_path_traces(
        pos, [CH], pulse, cloud, coupling_weak, scheme, times=times, freq_nodes=25
    )[CH.label]

    om_rel = np.linspace(-0.05, 0.05, 1601)
    om = pulse.carrier_delta + om_rel
    spec = envelope_spectrum(pulse, om_rel)
    a_dir = np.empty((81, len(om)), dtype=complex)
    a_rec = np.empty((81, len(om)), dtype=complex)
    a_sing = np.empty((9, len(om)), dtype=complex)
    for k, w in enumerate(om):
        d2, r2, norm2 = brute_force_amplitudes(pos, CH, w, cloud, coupling_weak, scheme)
        d1, _, norm1 = brute_force_amplitudes(pos[:1], CH, w, cloud, coupling_weak, scheme)
        a_dir[:, k] = d2
        a_rec[:, k] = r2
        a_sing[:, k] = d1
    dom = om[1] - om[0]
    phase = np.exp(-1j * np.outer(om_rel, times))
    conv = lambda amps: (amps * spec[None, :]) @ phase * (dom / (2 * np.pi))
    f_dir, f_rec, f_sing = conv(a_dir), conv(a_rec), conv(a_sing)
    want_single = norm1 * np.sum(np.abs(f_sing) ** 2, axis=0)
    want_ladder2 = norm2 * np.sum(np.abs(f_dir) ** 2, axis=0)
    want_crossed2 = norm2 * np.sum(f_dir * f_rec.conj(), axis=0).real

    scale = want_single.max()
    assert np.abs(got.single - want_single).max() < 2e-6 * scale
    scale2 = want_ladder2.max()
    assert np.abs(got.ladder_by_order[0] - want_ladder2).max() < 2e-6 * scale2
    assert np.abs(got.crossed_by_order[0] - want_crossed2).max() < 2e-6 * scale2


def test_trace_positivity_and_enhancement(scheme, cloud, coupling_weak):
    pulse = PulseSpec(tau=200.0, carrier_delta=0.0)
    mc = McParams(samples=256, seed=12, max_order=3)
    tr = scattered_traces([CH], pulse, cloud, coupling_weak, scheme, mc)[CH.label]
    assert (tr.single >= -1e-12 * tr.single.max()).all()
    for l in tr.ladder_by_order:
        assert (l >= -1e-12 * max(l.max(), 1e-300)).all()
    enh = time_resolved_enhancement(tr)
    finite = np.isfinite(enh)
    assert finite.any()
    assert np.allclose(enh[finite], tr.enhancement_t[finite], equal_nan=True)


def test_monochromatic_limit_matches_steady(scheme, cloud, coupling_weak):
    """tau -> infinity at an off-center carrier reproduces the steady
    breakdown ratios (same sampled configurations by construction)."""
    carrier = 1.0
    pulse = PulseSpec(tau=1e4, carrier_delta=carrier)
    mc = McParams(samples=1024, seed=5, max_order=4)
    tr = scattered_traces(
        [CH], pulse, cloud, coupling_weak, scheme, mc,
        times=np.linspace(-1e4, 1e4, 65),
    )[CH.label]
    steady = monte_carlo_breakdown(CH, carrier, cloud, coupling_weak, scheme, mc)
    i0 = np.argmin(np.abs(tr.times))
    assert tr.single[i0] == pytest.approx(steady.single, rel=1e-4)
    assert tr.ladder_by_order[0][i0] == pytest.approx(steady.ladder_by_order[0], rel=1e-4)
    assert tr.crossed_by_order[0][i0] == pytest.approx(
        steady.crossed_by_order[0], rel=1e-3
    )
    e_t = tr.enhancement_t[i0]
    e_s, _ = enhancement_factor(steady)
    assert e_t == pytest.approx(e_s, abs=1e-4)


def test_parseval_trace_level(scheme, cloud, coupling_weak):
    """Time-integrated single trace equals the frequency-side integral."""
    from scipy.integrate import simpson

    pulse = PulseSpec(tau=200.0, carrier_delta=0.2)
    pos = np.array([[0.1, 0.0, -0.1]])
    times = np.linspace(-8 * pulse.tau, 8 * pulse.tau, 8193)
    tr = fixed_path_traces(
        pos, [CH], pulse, cloud, coupling_weak, scheme, times=times, freq_nodes=29
    )[CH.label]
    lhs = simpson(tr.single, x=times)

    om_rel = np.linspace(-0.06, 0.06, 2401)
    spec2 = np.abs(envelope_spectrum(pulse, om_rel)) ** 2
    t_sq = np.empty_like(om_rel)
    for k, w in enumerate(om_rel):
        d1, _, norm1 = brute_force_amplitudes(
            pos, CH, pulse.carrier_delta + w, cloud, coupling_weak, scheme
        )
        t_sq[k] = norm1 * np.sum(np.abs(d1) ** 2)
    rhs = np.trapezoid(t_sq * spec2, om_rel) / (2 * np.pi)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_dark_carrier_suppression_near_pulse_peak(scheme, cloud, coupling_weak):
    """Carrier at the transparency point: the scattered light shows a
    deficit of near-resonant photons, so around the input-pulse peak the
    (normalized) scattered intensity is suppressed relative to a run with
    an off-resonant carrier."""
    mc = McParams(samples=512, seed=31, max_order=2)
    times = np.linspace(-600.0, 1000.0, 801)
    window = np.abs(times) < 100.0

    def peak_fraction(carrier):
        pulse = PulseSpec(tau=200.0, carrier_delta=carrier)
        tr = scattered_traces([CH], pulse, cloud, coupling_weak, scheme, mc, times=times)
        s = tr[CH.label].single
        return s[window].sum() / s.sum()

    assert peak_fraction(0.0) < 0.6 * peak_fraction(1.5)

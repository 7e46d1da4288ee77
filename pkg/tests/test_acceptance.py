"""Acceptance criteria, one test per criterion.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
pass lines.  Tolerances are fixed here, not calibrated after the fact.
"""
import numpy as np
import pytest

from eitcbs.amplitudes import ScatteringPath, crossed_term, ladder_term
from eitcbs.channels import CHANNELS, PolarizationChannel
from eitcbs.engine import (
    McParams,
    enhancement_factor,
    monte_carlo_breakdown,
    optical_depth,
    spectrum_sweep,
)
from eitcbs.levels import ControlCoupling, LevelScheme
from eitcbs.medium import CloudGeometry, transparency_window, unit_susceptibility
from eitcbs.propagation import compose, greens_matrix
from eitcbs.pulse import PulseSpec, fixed_path_traces, scattered_traces
from eitcbs.scatterer import scattering_tensor

from oracles import brute_force_amplitudes, brute_force_terms, ode_propagator

SCHEME = LevelScheme()
CLOUD = CloudGeometry(peak_density=3.2e10, gaussian_radius=0.5)
CH_PP = PolarizationChannel(1, 1)
CH_PM = PolarizationChannel(1, -1)
CH_MM = PolarizationChannel(-1, -1)
CH_MP = PolarizationChannel(-1, 1)

GRID41 = np.linspace(-3.0, 3.0, 41)
MC_SWEEP = McParams(samples=10_000, seed=20260809, max_order=8, workers=2)


def _ok(n, label):
    print(f"ACCEPTANCE {n} ({label}): PASS")


@pytest.fixture(scope="module")
def fig2a_sweep():
    return spectrum_sweep(
        CHANNELS, GRID41, CLOUD, ControlCoupling(0.5), SCHEME, MC_SWEEP
    )


@pytest.fixture(scope="module")
def fig2b_sweep():
    return spectrum_sweep(
        CHANNELS, GRID41, CLOUD, ControlCoupling(3.0), SCHEME, MC_SWEEP
    )


def test_criterion_1_dark_point():
    """Scattering tensor, susceptibility, optical depth, and the Monte Carlo
    breakdown all vanish at Delta = 0 when the control is on resonance."""
    for rabi in (0.5, 3.0):
        coupling = ControlCoupling(rabi)
        worst = 0.0
        for m in (-1, 0, 1):
            for mf in (-1, 0, 1):
                worst = max(
                    worst, np.abs(scattering_tensor(m, mf, 0.0, coupling).components).max()
                )
        assert worst < 1e-10
        chi = unit_susceptibility(0.0, coupling, SCHEME)
        assert np.abs(chi).max() * CLOUD.peak_density < 1e-10
        for q in (-1, 0, 1):
            assert abs(optical_depth(0.0, CLOUD, coupling, SCHEME, q)) < 1e-10
        b = monte_carlo_breakdown(
            CH_PP, 0.0, CLOUD, coupling, SCHEME, McParams(samples=2048, seed=3, max_order=6)
        )
        assert b.single == 0.0 and b.ladder_total == 0.0 and b.crossed_total == 0.0
    _ok(1, "EIT dark point")


def _dip_width(grid, e_vals, search=1.2):
    """Full width of the central dip at half recovery toward the flanking
    maxima, mirroring the transparency-window definition.

    At the exact center every breakdown term vanishes identically, so the
    enhancement approaches 1 there; that analytic limit anchors the
    interpolation through the masked dark point (the prescribed grid step
    cannot resolve narrower structure, so sub-step dips measure as a
    fraction of one step)."""
    finite = np.isfinite(e_vals)
    g, e = grid[finite], e_vals[finite]
    width = 0.0
    for sign in (-1, 1):
        side = (g * sign > 0) & (g * sign <= search)
        gg = np.abs(g[side])
        ee = e[side]
        order = np.argsort(gg)
        gg = np.concatenate([[0.0], gg[order]])
        ee = np.concatenate([[1.0], ee[order]])
        base = ee.max()
        half = 0.5 * (1.0 + base)
        for i in range(len(gg) - 1):
            if ee[i] <= half <= ee[i + 1]:
                f = (half - ee[i]) / (ee[i + 1] - ee[i])
                width += gg[i] + f * (gg[i + 1] - gg[i])
                break
    return width


def test_criterion_2_weak_control_spectrum(fig2a_sweep):
    """Omega_c = 0.5: no point below 1 - 3 err, and a central dip whose
    half-recovery width is within a factor 2 of the transparency window."""
    window = transparency_window(ControlCoupling(0.5), SCHEME)
    for ch in CHANNELS:
        es = np.array([p.enhancement[ch.label][0] for p in fig2a_sweep])
        errs = np.array([p.enhancement[ch.label][1] for p in fig2a_sweep])
        finite = np.isfinite(es)
        assert finite.sum() == len(GRID41) - 1  # only the dark point masked
        assert (es[finite] >= 1.0 - 3.0 * errs[finite]).all()
        # the dip is centered at 0: the breakdown vanishes identically at
        # the dark point while the innermost unmasked neighbors sit well
        # above 1, so the enhancement falls toward the center
        inner = np.abs(GRID41) <= 0.16
        assert np.nanmin(es[inner & finite]) > 1.0 + 0.005
        width = _dip_width(GRID41, es)
        assert 0.5 * window <= width <= 2.0 * window, (ch.label, width, window)
    _ok(2, "weak-control spectrum structure")


def test_criterion_3_anticone(fig2b_sweep):
    """Omega_c = 3: helicity-preserving channels dip below one by more than
    3 sigma somewhere; helicity-flipping maxima stay at or above one."""
    for ch in (CH_PP, CH_MM):
        es = np.array([p.enhancement[ch.label][0] for p in fig2b_sweep])
        errs = np.array([p.enhancement[ch.label][1] for p in fig2b_sweep])
        finite = np.isfinite(es)
        depth_sigmas = (1.0 - es[finite]) / np.where(errs[finite] > 0, errs[finite], 1)
        assert depth_sigmas.max() > 3.0, (ch.label, depth_sigmas.max())
    for ch in (CH_PM, CH_MP):
        es = np.array([p.enhancement[ch.label][0] for p in fig2b_sweep])
        errs = np.array([p.enhancement[ch.label][1] for p in fig2b_sweep])
        finite = np.isfinite(es)
        imax = np.nanargmax(es[finite])
        assert es[finite][imax] >= 1.0 - 3.0 * errs[finite][imax]
    _ok(3, "strong-control anticone")


def test_criterion_4_oracle_equivalence(rng):
    """ladder_term and crossed_term against the independent amplitude-level
    oracle for 50 fixed two-atom configurations, to 1e-9 relative."""
    cases = 0
    while cases < 50:
        rabi = [0.0, 0.5, 3.0][cases % 3]
        delta = float(rng.uniform(-3, 3))
        coupling = ControlCoupling(rabi)
        pos = rng.normal(scale=0.4 * CLOUD.gaussian_radius, size=(2, 3))
        if np.linalg.norm(pos[1] - pos[0]) < 0.02:
            continue
        ch = CHANNELS[cases % 4]
        path = ScatteringPath(pos)
        lad = ladder_term(path, ch, delta, CLOUD, coupling, SCHEME)
        cro = crossed_term(path, ch, delta, CLOUD, coupling, SCHEME)
        want_l, want_c = brute_force_terms(pos, ch, delta, CLOUD, coupling, SCHEME)
        assert lad == pytest.approx(want_l, rel=1e-9, abs=1e-12 * abs(want_l) + 1e-300)
        assert cro == pytest.approx(want_c, rel=1e-9, abs=1e-12 * abs(want_l))
        cases += 1
    _ok(4, "two-atom oracle equivalence")


def test_criterion_5_interference_bound():
    """|crossed_n| <= ladder_n + 3 sigma for n <= 4 across the parameter box."""
    mc = McParams(samples=3000, seed=77, max_order=4)
    for rabi in (0.0, 0.5, 3.0):
        coupling = ControlCoupling(rabi)
        for delta in (0.0, 0.5, -0.5, 1.0, -1.0, 3.0, -3.0):
            for ch in CHANNELS:
                b = monte_carlo_breakdown(ch, delta, CLOUD, coupling, SCHEME, mc)
                for n in range(len(b.ladder_by_order)):
                    err = 3.0 * np.hypot(
                        b.ladder_err_by_order[n], b.crossed_err_by_order[n]
                    )
                    assert abs(b.crossed_by_order[n]) <= b.ladder_by_order[n] + err
    _ok(5, "interference bound")


def test_criterion_6_propagator(rng):
    """greens_matrix vs the transport-ODE oracle to 1e-6 on 100 random
    chords x 5 detunings; split-chord composition to 1e-10."""
    coupling = ControlCoupling(3.0)
    deltas = (-2.0, -0.5, 0.0, 0.7, 2.5)
    worst = 0.0
    for k in range(100):
        r1 = rng.normal(scale=0.6 * CLOUD.gaussian_radius, size=3)
        r2 = rng.normal(scale=0.6 * CLOUD.gaussian_radius, size=3)
        if np.linalg.norm(r2 - r1) < 0.03:
            r2 = r1 + np.array([0.1, 0.0, 0.0])
        delta = deltas[k % 5]
        got = greens_matrix(r1, r2, delta, CLOUD, coupling, SCHEME)
        want = ode_propagator(r1, r2, delta, CLOUD, coupling, SCHEME)
        worst = max(worst, np.abs(got.X - want).max())
        t = rng.uniform(0.2, 0.8)
        rm = r1 + t * (r2 - r1)
        comp = compose(
            greens_matrix(r1, rm, delta, CLOUD, coupling, SCHEME),
            greens_matrix(rm, r2, delta, CLOUD, coupling, SCHEME),
        )
        assert np.abs(comp.X - got.X).max() < 1e-10
    assert worst < 1e-6
    _ok(6, "propagator vs transport ODE")


def test_criterion_7_pulse_consistency():
    """tau = 200/Gamma pulse at the EIT carrier: monochromatic limit,
    peak-time separation, and trace-level Parseval."""
    coupling = ControlCoupling(0.5)
    mc = McParams(samples=3072, seed=404, max_order=4)

    # (a) monochromatic limit: tau = 1e4 reproduces the steady-state
    # enhancement at the carrier.  The exact carrier Delta = 0 is the dark
    # point (undefined steady ratio); the limit is probed at the pulse
    # bandwidth 1/tau, where both sides sit at the single-scattering
    # dominated value ~1.
    tau_long = 1e4
    pulse_long = PulseSpec(tau=tau_long, carrier_delta=0.0)
    tr = scattered_traces(
        [CH_PM], pulse_long, CLOUD, coupling, SCHEME, mc,
        times=np.linspace(-tau_long, tau_long, 33),
    )[CH_PM.label]
    # With the carrier at the dark point the scattered light comes from the
    # two spectral lobes at +-sqrt(2)/tau and beats in time; evaluate at the
    # beat antinode (maximum scattered intensity).
    i0 = int(np.argmax(tr.incoherent_total))
    e_pulse = tr.enhancement_t[i0]
    steady = monte_carlo_breakdown(
        CH_PM, np.sqrt(2.0) / tau_long, CLOUD, coupling, SCHEME, mc
    )
    e_steady, e_err = enhancement_factor(steady)
    denom_err = tr.incoherent_err[i0] / max(tr.incoherent_total[i0], 1e-300)
    tol = 3.0 * np.hypot(e_err, denom_err) + 3.0 * tr.crossed_err[i0] / max(
        tr.incoherent_total[i0], 1e-300
    )
    assert abs(e_pulse - e_steady) <= max(tol, 2e-3)

    # (b) single- and double-scattering peaks separated in time
    pulse = PulseSpec(tau=200.0, carrier_delta=0.0)
    times = np.linspace(-600.0, 1400.0, 1001)
    tr = scattered_traces(
        [CH_PM], pulse, CLOUD, coupling, SCHEME, mc, times=times
    )[CH_PM.label]
    dt = times[1] - times[0]
    t_single = times[np.argmax(tr.single)]
    t_double = times[np.argmax(tr.ladder_by_order[0])]
    assert abs(t_double - t_single) > dt

    # (c) Parseval per configuration, 1e-6 relative
    from scipy.integrate import simpson

    rng = np.random.default_rng(11)
    for _ in range(3):
        pos = rng.normal(scale=0.2, size=(1, 3))
        wide = np.linspace(-8 * pulse.tau, 8 * pulse.tau, 8193)
        fixed = fixed_path_traces(
            pos, [CH_PM], pulse, CLOUD, coupling, SCHEME, times=wide
        )[CH_PM.label]
        lhs = simpson(fixed.single, x=wide)
        om_rel = np.linspace(-0.05, 0.05, 1601)
        t_sq = np.empty_like(om_rel)
        for k, w in enumerate(om_rel):
            d1, _, norm1 = brute_force_amplitudes(
                pos, CH_PM, w, CLOUD, coupling, SCHEME
            )
            t_sq[k] = norm1 * np.sum(np.abs(d1) ** 2)
        spec2 = 2.0 * np.pi * pulse.tau**2 * np.exp(-(om_rel * pulse.tau) ** 2)
        rhs = np.trapezoid(t_sq * spec2, om_rel) / (2 * np.pi)
        assert lhs == pytest.approx(rhs, rel=1e-6)
    _ok(7, "pulse consistency")


def test_criterion_8_determinism(tmp_path):
    """Same seed, different worker counts: byte-identical numeric output."""
    from eitcbs.cli import main

    cfg = tmp_path / "run.toml"
    cfg.write_text(
        """
mode = "spectrum"
seed = 99
rabi_over_gamma = 0.5
samples = 2000
max_order = 4
delta_points = 5
delta_min_over_gamma = -2.0
delta_max_over_gamma = 2.0
"""
    )
    outs = []
    for label, workers in (("w1", "1"), ("w3", "3")):
        out = tmp_path / label
        assert main(
            ["--config", str(cfg), "--out", str(out), "--workers", workers]
        ) == 0
        outs.append(out)
    import os

    names = [n for n in os.listdir(outs[0]) if n.endswith(".csv")]
    assert len(names) == 4
    for name in names:
        a = (outs[0] / name).read_bytes()
        b = (outs[1] / name).read_bytes()
        assert a == b, name
    _ok(8, "worker-count determinism")


def test_criterion_9_control_switchoff():
    """Spectra at Omega_c = 1e-4 and 0 agree within statistics everywhere.

    The grid avoids the exact two-photon resonance Delta = 0, where any
    nonzero control produces a measure-zero dark point while 0 does not."""
    grid = np.linspace(-3.0, 3.0, 10)  # even count: no exact zero
    mc = McParams(samples=4000, seed=5150, max_order=6)
    pts_tiny = spectrum_sweep(CHANNELS, grid, CLOUD, ControlCoupling(1e-4), SCHEME, mc)
    pts_zero = spectrum_sweep(CHANNELS, grid, CLOUD, ControlCoupling(0.0), SCHEME, mc)
    for p1, p0 in zip(pts_tiny, pts_zero):
        for ch in CHANNELS:
            e1, err1 = p1.enhancement[ch.label]
            e0, err0 = p0.enhancement[ch.label]
            assert abs(e1 - e0) <= 3.0 * np.hypot(err1, err0) + 1e-6
            b1 = p1.breakdowns[ch.label]
            b0 = p0.breakdowns[ch.label]
            assert b1.single == pytest.approx(b0.single, rel=1e-4)
    _ok(9, "control switch-off regression")

"""Level-scheme data: selection rules, sum rules, control couplings."""
import numpy as np
import pytest

from eitcbs.angular import clebsch_gordan
from eitcbs.levels import (
    ControlCoupling,
    LevelScheme,
    QuantumNumberError,
    REDUCED_RATIO_F2,
    control_matrix_element,
    dipole_element,
    hyperfine_branching,
    zeeman_transitions,
)


def test_dipole_selection_rules_exhaustive():
    for F in (1, 2):
        for m in range(-F, F + 1):
            for n in (-1, 0, 1):
                for q in (-1, 0, 1):
                    amp = dipole_element((F, m), (1, n), q)
                    if n != m + q:
                        assert amp == 0.0


def test_dipole_clebsch_gordan_zero():
    assert dipole_element((1, 0), (1, 0), 0) == 0.0


def test_dipole_frozen_value():
    # (F=1, m=-1) -> (F'=1, n=0), q=+1: CG(1,-1;1,1|1,0) = -1/sqrt(2)
    assert dipole_element((1, -1), (1, 0), 1) == pytest.approx(-1 / np.sqrt(2), abs=1e-14)


def test_dipole_out_of_range():
    with pytest.raises(QuantumNumberError):
        dipole_element((1, 2), (1, 0), 1)
    with pytest.raises(QuantumNumberError):
        dipole_element((3, 0), (1, 0), 0)


def test_sum_rule_independent_of_m():
    # sum_{n,q} |d|^2 = (2F'+1)/(2F+1) = 1 for every ground m of F=1
    for m in (-1, 0, 1):
        total = sum(
            dipole_element((1, m), (1, m + q), q) ** 2
            for q in (-1, 0, 1)
            if abs(m + q) <= 1
        )
        assert total == pytest.approx(1.0, abs=1e-13)


def test_zeeman_transition_table():
    table = zeeman_transitions()
    assert all(t.excited[1] - t.ground[1] == t.spherical_component for t in table)
    assert all(t.amplitude != 0 for t in table)
    # 3 m-values x 3 q minus two forbidden (m=0,q=0 CG zero; edges) = 6 links
    assert len(table) == 6


def test_branching_fractions():
    # frozen from two independent sympy derivations (6j and uncoupled basis)
    assert hyperfine_branching(1.5, 0.5, 0.5, 1, 1) == pytest.approx(1 / 6, abs=1e-13)
    assert hyperfine_branching(1.5, 0.5, 0.5, 1, 2) == pytest.approx(5 / 6, abs=1e-13)
    assert hyperfine_branching(1.5, 0.5, 0.5, 2, 1) == pytest.approx(0.5, abs=1e-13)


def test_branching_uncoupled_oracle():
    """Re-derive F'=1 branching from the I (x) J product basis."""
    I, J = 1.5, 0.5

    def hf_state(F, mF):
        out = {}
        for tmi in range(-3, 4, 2):
            mI = tmi / 2.0
            mJ = mF - mI
            if abs(mJ) <= J + 1e-9:
                c = clebsch_gordan(I, mI, J, mJ, F, mF)
                if c != 0.0:
                    out[(mI, mJ)] = c
        return out

    strengths = {}
    for F in (1, 2):
        s = 0.0
        for n in (-1, 0, 1):
            es = hf_state(1, n)
            for m in range(-F, F + 1):
                gs = hf_state(F, m)
                for q in (-1, 0, 1):
                    # dipole acts on J only: <J' mJ'|d_q|J mJ> = CG(J mJ, 1 q|J' mJ')
                    amp = sum(
                        cg * es[(mI, mJ + q)] * clebsch_gordan(J, mJ, 1, q, J, mJ + q)
                        for (mI, mJ), cg in gs.items()
                        if (mI, mJ + q) in es
                    )
                    s += amp * amp
        strengths[F] = s / 3.0  # per excited sublevel
    total = strengths[1] + strengths[2]
    assert strengths[1] / total == pytest.approx(1 / 6, abs=1e-12)
    assert REDUCED_RATIO_F2**2 == pytest.approx(strengths[2] / strengths[1], rel=1e-12)


def test_control_reference_transition():
    c = ControlCoupling(rabi_frequency=1.0)
    assert abs(control_matrix_element(0, -1, c)) == pytest.approx(0.5, abs=1e-14)


def test_control_selection_rule():
    c = ControlCoupling(rabi_frequency=2.0)
    assert control_matrix_element(0, 1, c) == 0.0
    assert control_matrix_element(1, 1, c) == 0.0


def test_control_exactly_three_couplings():
    c = ControlCoupling(rabi_frequency=1.0)
    elements = c.matrix_elements()
    assert set(elements) == {(-1, -2), (0, -1), (1, 0)}
    assert all(v.real > 0 and v.imag == 0 for v in elements.values())


def test_control_cg_ratios():
    c = ControlCoupling(rabi_frequency=1.0)
    assert c.coupled_rabi(-1) == pytest.approx(0.5 * np.sqrt(2.0), rel=1e-13)
    assert c.coupled_rabi(0) == pytest.approx(0.5, rel=1e-13)
    assert c.coupled_rabi(1) == pytest.approx(0.5 / np.sqrt(3.0), rel=1e-13)


def test_control_negative_rabi_rejected():
    with pytest.raises(ValueError):
        ControlCoupling(rabi_frequency=-1.0)


def test_scheme_invariants():
    with pytest.raises(ValueError):
        LevelScheme(excited_F=2)
    with pytest.raises(ValueError):
        LevelScheme(wavelength=-1.0)
    s = LevelScheme()
    assert s.branching_to_probed == pytest.approx(1 / 6, abs=1e-13)
    assert s.hyperfine_splitting_ground > 1000  # ~6.83 GHz in Gamma units

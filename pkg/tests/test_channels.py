"""Helicity bases, channel vectors, detection filter."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eitcbs.channels import (
    CHANNELS,
    PolarizationChannel,
    channel_vectors,
    frame_for_direction,
    helicity_basis,
    raman_filter,
)


def test_channel_labels_round_trip():
    for ch in CHANNELS:
        assert PolarizationChannel.from_label(ch.label) == ch
    assert PolarizationChannel.from_label("H+H-") == PolarizationChannel(1, -1)
    with pytest.raises(ValueError):
        PolarizationChannel.from_label("V->V")


def test_frames_orthonormal_right_handed(rng):
    for _ in range(50):
        u = rng.normal(size=3)
        f = frame_for_direction(u)
        assert np.allclose(f.T @ f, np.eye(3), atol=1e-12)
        assert np.allclose(np.cross(f[:, 0], f[:, 1]), f[:, 2], atol=1e-12)
    for u in ([0, 0, 1.0], [0, 0, -1.0]):
        f = frame_for_direction(u)
        assert np.allclose(f[:, 2], u)


def test_helicity_vectors_unit_and_transverse(rng):
    for _ in range(20):
        u = rng.normal(size=3)
        b = helicity_basis(u)
        for e in (b.e_plus, b.e_minus):
            assert abs(e.conj() @ e - 1.0) < 1e-12
            assert abs(e @ b.direction) < 1e-12
        assert abs(b.e_plus.conj() @ b.e_minus) < 1e-12


def test_backscattering_helicity_convention_table():
    """Frame-attached helicity: H+ at -z equals the lab e_{-1} vector."""
    sq2 = np.sqrt(2.0)
    b_fwd = helicity_basis([0, 0, 1.0])
    b_bwd = helicity_basis([0, 0, -1.0])
    e_p1_lab = np.array([-1.0, -1.0j, 0.0]) / sq2
    e_m1_lab = np.array([1.0, -1.0j, 0.0]) / sq2
    assert np.allclose(b_fwd.e_plus, e_p1_lab)
    assert np.allclose(b_fwd.e_minus, e_m1_lab)
    assert np.allclose(b_bwd.e_plus, e_m1_lab)
    assert np.allclose(b_bwd.e_minus, e_p1_lab)
    # the preserving channel therefore pairs orthogonal lab components
    e_in, e_out = channel_vectors(PolarizationChannel(1, 1), [0, 0, 1.0])
    assert abs(e_in.conj() @ e_out) < 1e-12


def test_channel_vectors_normalized():
    for ch in CHANNELS:
        e_in, e_out = channel_vectors(ch, [0, 0, 1.0])
        assert abs(e_in.conj() @ e_in - 1) < 1e-14
        assert abs(e_out.conj() @ e_out - 1) < 1e-14
    with pytest.raises(ValueError):
        channel_vectors(CHANNELS[0], [0.0, 0.0, 0.0])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_helicity_completeness(vals):
    """|v.e+*|^2 + |v.e-*|^2 = |v|^2 for any transverse vector."""
    b = helicity_basis([0, 0, 1.0])
    v = np.array([vals[0] + 1j * vals[1], vals[2] + 1j * vals[3], 0.0])
    total = abs(v @ b.e_plus.conj()) ** 2 + abs(v @ b.e_minus.conj()) ** 2
    assert total == pytest.approx(float((v.conj() @ v).real), abs=1e-10)


def test_raman_filter():
    assert raman_filter((1, 0)) is True
    assert raman_filter((2, -1)) is False
    accepted = [
        (F, m)
        for F in (1, 2)
        for m in range(-F, F + 1)
        if raman_filter((F, m))
    ]
    total = sum(2 * F + 1 for F in (1, 2))
    assert total == 8 and len(accepted) == 3
    with pytest.raises(ValueError):
        raman_filter((3, 0))

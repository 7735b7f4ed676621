import math

import numpy as np
import pytest

from hyperecp.elements import (
    BalancedBS,
    Delay,
    DetectorSpec,
    HalfWavePlate45,
    HalfWavePlate90,
    PBS,
    PolPhaseFlip,
    SpatialPhaseFlip,
    UnbalancedBS,
    WavePlate,
    apply,
    lower,
)
from hyperecp.fock import FockError, ModeRegister, equal_up_to_phase, inner, make_state

ALL_ELEMENTS = [
    BalancedBS("a", "b"),
    UnbalancedBS("a", "b", 0.75),
    UnbalancedBS("a", "b", 0.0),
    UnbalancedBS("a", "b", 1.0),
    PBS("a", "b"),
    WavePlate("a", 0.123),
    HalfWavePlate45("a"),
    HalfWavePlate90("a"),
    PolPhaseFlip("a"),
    SpatialPhaseFlip("a", "b"),
]


@pytest.mark.parametrize("element", ALL_ELEMENTS)
def test_lowered_matrices_unitary(element):
    reg = ModeRegister(["a", "b"])
    for u in lower(element, reg):
        dev = np.abs(u.matrix.conj().T @ u.matrix - np.eye(len(u.modes))).max()
        assert dev < 1e-12


def test_ubs_matrix_value():
    reg = ModeRegister(["a2", "a3"])
    us = lower(UnbalancedBS("a2", "a3", 0.6 / 0.8), reg)
    t = math.sqrt(1 - 0.75**2)
    expect = np.array([[0.75, t], [t, -0.75]])
    assert len(us) == 2
    for u in us:
        assert np.abs(u.matrix - expect).max() < 1e-12
    assert abs(t - 0.66143782776614768) < 1e-15


def test_ubs_r_range_checked():
    with pytest.raises(FockError):
        UnbalancedBS("a", "b", 1.5)


def test_ubs_limit_conventions():
    reg = ModeRegister(["a", "b"])
    u1 = lower(UnbalancedBS("a", "b", 1.0), reg)[0]
    assert np.abs(u1.matrix - np.diag([1.0, -1.0])).max() < 1e-12
    u0 = lower(UnbalancedBS("a", "b", 0.0), reg)[0]
    assert np.abs(u0.matrix - np.array([[0.0, 1.0], [1.0, 0.0]])).max() < 1e-12


def test_waveplate_rotation_amplitude():
    # arccos maps a pure-H photon to that H amplitude exactly
    reg = ModeRegister(["a"])
    for x in (0.75, 0.3, 0.99):
        s = make_state(reg, [(1.0, ["aH"])])
        out = apply(s, WavePlate("a", math.acos(x)))
        probe_h = make_state(reg, [(1.0, ["aH"])])
        probe_v = make_state(reg, [(1.0, ["aV"])])
        assert abs(inner(probe_h, out) - x) < 1e-12
        assert abs(inner(probe_v, out) - math.sqrt(1 - x * x)) < 1e-12


def test_pbs_routing_and_conservation():
    reg = ModeRegister(["a", "b"])
    s = make_state(reg, [(1 / math.sqrt(2), ["aH"]), (1 / math.sqrt(2), ["aV"])])
    out = apply(s, PBS("a", "b"))
    assert abs(out.norm() - 1.0) < 1e-12
    probe_h = make_state(reg, [(1.0, ["aH"])])
    probe_v = make_state(reg, [(1.0, ["bV"])])
    assert abs(inner(probe_h, out) - 1 / math.sqrt(2)) < 1e-12
    assert abs(inner(probe_v, out) - 1 / math.sqrt(2)) < 1e-12


def test_pbs_conserves_each_polarization_count():
    rng = np.random.default_rng(3)
    reg = ModeRegister(["a", "b"])
    terms = []
    for _ in range(4):
        amp = rng.normal() + 1j * rng.normal()
        labels = ["aH", "aV", "bH", "bV"]
        pick = [labels[i] for i in rng.integers(0, 4, size=2)]
        terms.append((amp, pick))
    from hyperecp.fock import normalize

    s, _ = normalize(make_state(reg, terms))
    out = apply(s, PBS("a", "b"))
    ah, av = reg.path_indices("a")
    bh, bv = reg.path_indices("b")

    def pol_counts(state):
        hs, vs = set(), set()
        for cfg, _ in state.items():
            hs.add(cfg.get(ah) + cfg.get(bh))
            vs.add(cfg.get(av) + cfg.get(bv))
        return hs, vs

    assert pol_counts(s) == pol_counts(out)


def test_delay_is_identity():
    reg = ModeRegister(["a", "b"])
    s = make_state(reg, [(0.6, ["aH", "bV"]), (0.8, ["aV", "bH"])])
    out = apply(s, Delay("a"))
    assert abs(inner(s, out) - 1.0) < 1e-12


@pytest.mark.parametrize("element", [HalfWavePlate45("a"), HalfWavePlate90("a")])
def test_fixed_plates_are_involutions(element):
    reg = ModeRegister(["a"])
    s = make_state(reg, [(0.6, ["aH"]), (0.8, ["aV"])])
    out = apply(apply(s, element), element)
    assert equal_up_to_phase(s, out)


def test_hwp90_is_bit_flip():
    reg = ModeRegister(["a"])
    s = make_state(reg, [(1.0, ["aH"])])
    out = apply(s, HalfWavePlate90("a"))
    probe = make_state(reg, [(1.0, ["aV"])])
    assert abs(abs(inner(probe, out)) - 1.0) < 1e-12


def test_pol_phase_flip_sign():
    reg = ModeRegister(["a"])
    s = make_state(reg, [(0.6, ["aH"]), (0.8, ["aV"])])
    out = apply(s, PolPhaseFlip("a"))
    expect = make_state(reg, [(0.6, ["aH"]), (-0.8, ["aV"])])
    assert abs(inner(expect, out) - 1.0) < 1e-12


def test_spatial_phase_flip_sign():
    reg = ModeRegister(["b1", "b2"])
    s = make_state(reg, [(0.6, ["b1H"]), (0.8, ["b2H"])])
    out = apply(s, SpatialPhaseFlip("b1", "b2"))
    expect = make_state(reg, [(0.6, ["b1H"]), (-0.8, ["b2H"])])
    assert abs(inner(expect, out) - 1.0) < 1e-12


def test_missing_path_rejected():
    reg = ModeRegister(["a"])
    with pytest.raises(FockError):
        lower(PBS("a", "zz"), reg)


def test_detector_spec_validation():
    with pytest.raises(FockError):
        DetectorSpec("D", ())
    with pytest.raises(FockError):
        DetectorSpec("D", ("a",), efficiency=1.5)
    d = DetectorSpec("D", ("a", "b"), resolving=True, efficiency=0.5)
    reg = ModeRegister(["a", "b"])
    assert d.mode_indices(reg) == (0, 1, 2, 3)

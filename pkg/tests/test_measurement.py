import math

import pytest

from hyperecp.elements import DetectorSpec
from hyperecp.fock import FockError, ModeRegister, inner, make_state, normalize
from hyperecp.measurement import (
    DetectionPattern,
    classify_parity,
    measure,
    post_select,
    project_group_counts,
)

SQ2 = 1.0 / math.sqrt(2.0)


def no_clicks(pattern: DetectionPattern) -> bool:
    return pattern.clicks() == 0


def eq5_state(reg, alpha, beta, gamma, delta):
    """Post-circuit state of the known-parameter Bell concentration.

    beta*gamma (HH + VV)(a1 b1 + a2 b2)
      + gamma*sqrt(alpha^2 - beta^2) V_A H_B (a1' b1 + a2' b2)
      + sqrt(delta^2 - gamma^2) (alpha HH + beta VV) a3 b2
    """
    terms = []
    for pol in ("H", "V"):
        for pa, pb in (("a1", "b1"), ("a2", "b2")):
            terms.append((beta * gamma, [pa + pol, pb + pol]))
    rot = gamma * math.sqrt(alpha**2 - beta**2)
    terms.append((rot, ["p1V", "b1H"]))
    terms.append((rot, ["p2V", "b2H"]))
    lost = math.sqrt(delta**2 - gamma**2)
    terms.append((lost * alpha, ["a3H", "b2H"]))
    terms.append((lost * beta, ["a3V", "b2V"]))
    return make_state(reg, terms)


def test_branches_complete_and_bell_success():
    reg = ModeRegister(["a1", "a2", "a3", "p1", "p2", "b1", "b2"])
    alpha, beta, gamma, delta = 0.8, 0.6, 0.6, 0.8
    state = eq5_state(reg, alpha, beta, gamma, delta)
    assert abs(state.norm() - 1.0) < 1e-12
    detectors = [DetectorSpec(n, (p,)) for n, p in (("D1", "p1"), ("D2", "p2"), ("D3", "a3"))]
    branches = measure(state, detectors)
    assert abs(sum(b.probability for b in branches) - 1.0) < 1e-10
    prob, ensemble = post_select(branches, no_clicks)
    assert abs(prob - 4 * (beta * gamma) ** 2) < 1e-12
    assert len(ensemble.members) == 1
    conditional = ensemble.members[0][1]
    target = make_state(
        reg,
        [
            (0.5, ["a1H", "b1H"]),
            (0.5, ["a2H", "b2H"]),
            (0.5, ["a1V", "b1V"]),
            (0.5, ["a2V", "b2V"]),
        ],
    )
    assert abs(abs(inner(target, conditional)) - 1.0) < 1e-10


def test_half_split_click_probability():
    reg = ModeRegister(["a", "b"])
    state = make_state(reg, [(SQ2, ["aH"]), (SQ2, ["bH"])])
    branches = measure(state, [DetectorSpec("D", ("a",))])
    by_clicks = {b.pattern.get("D"): b.probability for b in branches}
    assert abs(by_clicks[1] - 0.5) < 1e-12
    assert abs(by_clicks[0] - 0.5) < 1e-12


def test_blind_detector():
    reg = ModeRegister(["a", "b"])
    state = make_state(reg, [(SQ2, ["aH"]), (SQ2, ["bH"])])
    branches = measure(state, [DetectorSpec("D", ("a",), efficiency=0.0)])
    observed = {}
    for b in branches:
        key = b.pattern.get("D")
        observed[key] = observed.get(key, 0.0) + b.probability
    assert set(observed) == {0}
    assert abs(observed[0] - 1.0) < 1e-12


def test_efficiency_thinning():
    reg = ModeRegister(["a"])
    state = make_state(reg, [(1.0, ["aH", "aV"])])
    branches = measure(state, [DetectorSpec("D", ("a",), resolving=True, efficiency=0.5)])
    observed = {b.pattern.get("D"): b.probability for b in branches}
    # two photons arrive; registrations are Binomial(2, 0.5)
    assert abs(observed[0] - 0.25) < 1e-12
    assert abs(observed[1] - 0.5) < 1e-12
    assert abs(observed[2] - 0.25) < 1e-12
    threshold = measure(state, [DetectorSpec("D", ("a",), efficiency=0.5)])
    observed_t = {b.pattern.get("D"): b.probability for b in threshold}
    assert abs(observed_t[0] - 0.25) < 1e-12
    assert abs(observed_t[1] - 0.75) < 1e-12


def test_branch_sums_at_intermediate_efficiency():
    reg = ModeRegister(["a1", "a2", "a3", "p1", "p2", "b1", "b2"])
    state = eq5_state(reg, 0.8, 0.6, 0.6, 0.8)
    for eta in (0.0, 0.5, 1.0):
        detectors = [
            DetectorSpec(n, (p,), efficiency=eta)
            for n, p in (("D1", "p1"), ("D2", "p2"), ("D3", "a3"))
        ]
        branches = measure(state, detectors)
        assert abs(sum(b.probability for b in branches) - 1.0) < 1e-10


def test_post_select_complement_and_empty():
    reg = ModeRegister(["a1", "a2", "a3", "p1", "p2", "b1", "b2"])
    state = eq5_state(reg, 0.8, 0.6, 0.6, 0.8)
    detectors = [DetectorSpec(n, (p,)) for n, p in (("D1", "p1"), ("D2", "p2"), ("D3", "a3"))]
    branches = measure(state, detectors)
    p_ok, _ = post_select(branches, no_clicks)
    p_fail, _ = post_select(branches, lambda p: p.clicks() > 0)
    assert abs(p_ok + p_fail - 1.0) < 1e-10
    assert abs(p_fail - (1 - 4 * 0.36**2)) < 1e-10
    p_none, state_none = post_select(branches, lambda p: p.clicks() == 99)
    assert p_none == 0.0
    assert state_none is None


def test_detectors_must_not_overlap():
    reg = ModeRegister(["a", "b"])
    state = make_state(reg, [(1.0, ["aH"])])
    with pytest.raises(FockError):
        measure(state, [DetectorSpec("D1", ("a",)), DetectorSpec("D2", ("a", "b"))])


def test_group_count_projection_preserves_coherence():
    reg = ModeRegister(["b1", "b2", "d1", "d2"])
    # odd-parity superposition plus an even-parity contaminant
    state, _ = normalize(
        make_state(
            reg,
            [
                (1.0, ["b1H", "d2H"]),
                (1.0, ["b2H", "d1H"]),
                (1.0, ["b1H", "d1H"]),
            ],
        )
    )
    branches = project_group_counts(state, "Q", [("b1", "d1"), ("b2", "d2")])
    by_counts = {b.pattern.get("Q"): b for b in branches}
    assert set(by_counts) == {(1, 1), (2, 0)}
    odd = by_counts[(1, 1)]
    assert abs(odd.probability - 2.0 / 3.0) < 1e-12
    # both odd components survive coherently in one sector
    expect, _ = normalize(
        make_state(reg, [(1.0, ["b1H", "d2H"]), (1.0, ["b2H", "d1H"])])
    )
    assert abs(abs(inner(expect, odd.conditional)) - 1.0) < 1e-12
    # photons are not absorbed
    assert odd.conditional.photon_numbers() == {2}


def test_classify_parity():
    names = ("D1", "D2")
    one = DetectionPattern.from_dict({"D1": 1, "D2": 0})
    zero = DetectionPattern.from_dict({"D1": 0, "D2": 0})
    two = DetectionPattern.from_dict({"D1": 1, "D2": 1})
    assert classify_parity(one, "alice", names) == "even"
    assert classify_parity(one, "bob", names) == "odd"
    assert classify_parity(zero, "alice", names) == "reject"
    assert classify_parity(two, "alice", names) == "reject"
    assert classify_parity(two, "bob", names) == "reject"
    with pytest.raises(FockError):
        classify_parity(one, "carol", names)

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from limax import analytic
from limax.core import (
    InvalidInputError,
    NotCMFrameError,
    PhaseState,
    SystemParams,
    state_scale,
)
from limax.scenarios import (
    BoostEvent,
    TrajectoryClass,
    apply_fusion_boosts,
    apply_pair_boost,
    check_choreography_conditions,
    check_rigid_pair,
    classify,
    fragmentation_scenario,
    fusion_boosts,
)


def _rotated(state, theta):
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s], [s, c]])
    return PhaseState(state.r @ rot.T, state.p @ rot.T)


RIGID_13_STATE = PhaseState(
    r=np.array([(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]),
    p=np.array([(0.0, 1.0), (0.0, 0.0), (0.0, -1.0), (0.0, 0.0)]),
)
RIGID_24_STATE = PhaseState(
    r=np.array([(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)]),
    p=np.array([(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (-1.0, 0.0)]),
)


def test_classify_labels(params, generic_state, rigid_pairs_state, choreography_state):
    assert classify(generic_state, params).label is TrajectoryClass.GENERIC
    assert classify(rigid_pairs_state, params).label is TrajectoryClass.RIGID_BOTH
    assert classify(RIGID_13_STATE, params).label is TrajectoryClass.RIGID_13
    assert classify(RIGID_24_STATE, params).label is TrajectoryClass.RIGID_24
    tri = classify(analytic.trisectrix_initial_state(params), params)
    assert tri.label is TrajectoryClass.CHOREOGRAPHY_SYMMETRIC
    assert tri.sign_branch == -1
    chor = classify(choreography_state, params)
    assert chor.label is TrajectoryClass.CHOREOGRAPHY
    assert chor.sign_branch == -1
    assert classify(generic_state, params).sign_branch is None


def test_classification_residuals_frozen(params, choreography_state):
    res = classify(choreography_state, params).residuals
    assert res["branch_minus"] <= 1e-15
    assert abs(res["branch_plus"] - 2.714919246838464) < 1e-12
    assert abs(res["rigid_13"] - 0.9334604714166881) < 1e-12
    assert abs(res["rigid_24"] - res["rigid_13"]) < 1e-15


def test_choreography_check_reports_both_branches(params, choreography_state):
    chk = check_choreography_conditions(choreography_state, params)
    assert chk.ok
    assert chk.sign_branch == -1
    assert set(chk.residuals) == {1, -1}
    assert chk.residuals[-1] < chk.residuals[1]


@settings(max_examples=25, deadline=None)
@given(theta=st.floats(min_value=-math.pi, max_value=math.pi))
def test_classification_is_rotation_invariant(theta):
    params = SystemParams()
    for state, want in (
        (analytic.trisectrix_initial_state(params), TrajectoryClass.CHOREOGRAPHY_SYMMETRIC),
        (RIGID_13_STATE, TrajectoryClass.RIGID_13),
    ):
        out = classify(_rotated(state, theta), params, tol=1e-9)
        assert out.label is want


def test_classification_is_scale_invariant(params, choreography_state):
    for c in (1e-3, 7.0, 1e4):
        scaled = PhaseState(c * choreography_state.r, c * choreography_state.p)
        out = classify(scaled, params)
        assert out.label is TrajectoryClass.CHOREOGRAPHY
        assert out.sign_branch == -1


def test_rigid_pair_checks(params, rigid_pairs_state, generic_state):
    assert check_rigid_pair(rigid_pairs_state, params, (1, 3))
    assert check_rigid_pair(rigid_pairs_state, params, (2, 4))
    assert check_rigid_pair(RIGID_13_STATE, params, (1, 3))
    assert not check_rigid_pair(RIGID_13_STATE, params, (2, 4))
    assert not check_rigid_pair(generic_state, params, (1, 3))
    with pytest.raises(InvalidInputError):
        check_rigid_pair(generic_state, params, (1, 2))


def test_zero_state_is_trivially_balanced(params):
    zero = PhaseState(np.zeros((4, 2)), np.zeros((4, 2)))
    chk = check_choreography_conditions(zero, params)
    assert chk.ok
    assert chk.sign_branch == 1
    assert classify(zero, params).label is TrajectoryClass.CHOREOGRAPHY_SYMMETRIC


def test_cm_frame_required(params, generic_state):
    shifted = PhaseState(generic_state.r + (1.0, 0.0), generic_state.p)
    with pytest.raises(NotCMFrameError):
        check_choreography_conditions(shifted, params)
    with pytest.raises(NotCMFrameError):
        classify(shifted, params)
    with pytest.raises(NotCMFrameError):
        fusion_boosts(shifted, params)


def test_boost_event_validation():
    with pytest.raises(InvalidInputError):
        BoostEvent(t_ex=0.0, body_plus=2, body_minus=2, delta=(1.0, 0.0))
    with pytest.raises(InvalidInputError):
        BoostEvent(t_ex=0.0, body_plus=5, body_minus=3, delta=(1.0, 0.0))
    with pytest.raises(InvalidInputError):
        BoostEvent(t_ex=math.inf, body_plus=2, body_minus=3, delta=(1.0, 0.0))
    with pytest.raises(InvalidInputError):
        BoostEvent(t_ex=0.0, body_plus=2, body_minus=3, delta=(1.0, 0.0, 0.0))
    ev = BoostEvent(t_ex=1, body_plus=2, body_minus=3, delta=[0.5, -0.5])
    assert ev.t_ex == 1.0 and isinstance(ev.t_ex, float)
    with pytest.raises(ValueError):
        ev.delta[0] = 9.0


def test_pair_boost_frozen_example(params):
    state = analytic.trisectrix_initial_state(params)
    ev = BoostEvent(t_ex=0.0, body_plus=2, body_minus=3, delta=(-0.75, 0.75))
    out = apply_pair_boost(state, ev)
    assert np.array_equal(out.r, state.r)
    assert np.allclose(out.p[1], (-1.25, -0.25), atol=0, rtol=0)
    assert np.allclose(out.p[2], (0.75, -0.25), atol=0, rtol=0)
    assert np.allclose(out.p.sum(axis=0), state.p.sum(axis=0))
    noop = apply_pair_boost(state, BoostEvent(0.0, 2, 3, (0.0, 0.0)))
    assert np.array_equal(noop.p, state.p)


def test_fusion_restores_the_fragmented_state(params):
    delta = np.array([-0.75, 0.75])
    state = analytic.trisectrix_initial_state(params)
    broken = apply_pair_boost(state, BoostEvent(0.0, 2, 3, delta))
    assert classify(broken, params).label is TrajectoryClass.GENERIC
    boosts = fusion_boosts(broken, params)
    assert boosts.sign_branch == -1
    assert np.allclose(boosts.delta_13, -delta, atol=1e-15)
    assert np.allclose(boosts.delta_24, -delta, atol=1e-15)
    fused = apply_fusion_boosts(broken, boosts)
    chk = check_choreography_conditions(fused, params)
    assert chk.ok
    assert chk.residuals[-1] <= 1e-12
    # fusion mends the pair differences and leaves pair sums alone
    assert np.allclose(fused.p_diff(1, 3), state.p_diff(1, 3), atol=1e-15)
    assert np.allclose(fused.p_diff(2, 4), state.p_diff(2, 4), atol=1e-15)
    assert np.allclose(fused.p_sum(1, 3), broken.p_sum(1, 3), atol=0)
    assert classify(fused, params).label is TrajectoryClass.CHOREOGRAPHY_SYMMETRIC


def test_fusion_on_balanced_state_is_zero(params):
    state = analytic.trisectrix_initial_state(params)
    boosts = fusion_boosts(state, params)
    assert np.allclose(boosts.delta_13, 0.0, atol=1e-15)
    assert np.allclose(boosts.delta_24, 0.0, atol=1e-15)
    assert boosts.sign_branch == -1


def test_fusion_targets_the_nearer_branch(params):
    # flipping every momentum swaps the sign branch of the trisectrix state
    state = analytic.trisectrix_initial_state(params)
    flipped = PhaseState(state.r, -state.p)
    boosts = fusion_boosts(flipped, params)
    assert boosts.sign_branch == 1
    assert np.allclose(boosts.delta_13, 0.0, atol=1e-15)
    assert np.allclose(boosts.delta_24, 0.0, atol=1e-15)


def test_fusion_handles_badly_unbalanced_states(params):
    state = analytic.trisectrix_initial_state(params)
    doubled = PhaseState(state.r, 2.0 * state.p)
    fused = apply_fusion_boosts(doubled, fusion_boosts(doubled, params))
    chk = check_choreography_conditions(fused, params)
    assert chk.ok and chk.residuals[chk.sign_branch] <= 1e-12
    # applying fusion twice is a no-op: the corrections of a fused state vanish
    again = fusion_boosts(fused, params)
    assert float(np.abs(again.delta_13).max()) <= 1e-12 * state_scale(fused, params)
    assert float(np.abs(again.delta_24).max()) <= 1e-12 * state_scale(fused, params)


def test_fragmentation_scenario_shapes(params):
    before, after = fragmentation_scenario(params, delta=(-0.75, 0.75), beta=1,
                                           n_samples=65)
    assert len(before) == 65
    assert before.times[0] == 0.0
    assert abs(before.times[-1] - params.period) < 1e-12
    assert len(after) == 65
    assert after.times[0] == 0.0
    assert abs(after.times[-1] - params.period) < 1e-12
    # the after clock starts at the boosted state
    state0 = analytic.trisectrix_initial_state(params)
    boosted = apply_pair_boost(
        analytic.propagate(state0, params, params.period),
        BoostEvent(params.period, 2, 3, (-0.75, 0.75)))
    assert np.allclose(after.states[0], boosted.flat(), atol=1e-12)
    assert classify(boosted, params).label is TrajectoryClass.GENERIC


def test_fragmentation_preserves_pair_choreographies(params):
    # the boost breaks the four-body sequence but bodies still trade places
    # pairwise: r3 tracks r1 and r4 tracks r2 half a period later
    _, after = fragmentation_scenario(params, delta=(-0.75, 0.75), beta=1)
    start = PhaseState.from_flat(after.states[0])
    shift = 2 * analytic.time_delay(params)
    for t in (0.0, 0.7, 1.9, 4.0):
        now = analytic.propagate(start, params, t)
        later = analytic.propagate(start, params, t + shift)
        assert np.allclose(now.r[2], later.r[0], atol=1e-9)
        assert np.allclose(now.r[3], later.r[1], atol=1e-9)


def test_fragmentation_with_zero_kick_keeps_the_choreography(params):
    _, after = fragmentation_scenario(params, delta=(0.0, 0.0), beta=1, n_samples=5)
    start = PhaseState.from_flat(after.states[0])
    assert classify(start, params).label is TrajectoryClass.CHOREOGRAPHY_SYMMETRIC


def test_fragmentation_beta_zero(params):
    before, after = fragmentation_scenario(params, delta=(-0.75, 0.75), beta=0,
                                           n_samples=17)
    assert len(before) == 1
    assert before.times[0] == 0.0
    assert len(after) == 17


def test_fragmentation_validation(params):
    with pytest.raises(InvalidInputError):
        fragmentation_scenario(params, delta=(0.1, 0.1), beta=1.5)
    with pytest.raises(InvalidInputError):
        fragmentation_scenario(params, delta=(0.1, 0.1), beta=-1)
    with pytest.raises(InvalidInputError):
        fragmentation_scenario(params, delta=(0.1, 0.1), beta=1, n_samples=0)
    with pytest.raises(InvalidInputError):
        fragmentation_scenario(params, delta=(0.1, 0.1), beta=1, horizon=-2.0)

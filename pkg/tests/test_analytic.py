import math

import numpy as np
import pytest

from limax import analytic
from limax.core import (
    InvalidInputError,
    NotAChoreographyError,
    NotCMFrameError,
    PhaseState,
    SystemParams,
    total_hamiltonian,
)

from conftest import random_states


def test_time_delay(params, odd_params):
    assert analytic.time_delay(params) == math.pi / 2
    assert analytic.time_delay(odd_params) == math.pi / (2 * 0.9)


def test_relative_propagate_closed_form(odd_params):
    m, w = odd_params.m, odd_params.omega
    r0 = np.array([0.3, -1.1])
    p0 = np.array([0.7, 0.2])
    t = 0.83
    r, p = analytic.relative_propagate(r0, p0, odd_params, t)
    assert np.allclose(r, r0 * math.cos(w * t) + p0 * math.sin(w * t) / (m * w))
    assert np.allclose(p, p0 * math.cos(w * t) - m * w * r0 * math.sin(w * t))
    # full period comes back, quarter period swaps position and momentum roles
    r_T, p_T = analytic.relative_propagate(r0, p0, odd_params, 2 * math.pi / w)
    assert np.allclose(r_T, r0, atol=1e-14)
    assert np.allclose(p_T, p0, atol=1e-14)
    r_q, p_q = analytic.relative_propagate(r0, p0, odd_params, math.pi / (2 * w))
    assert np.allclose(r_q, p0 / (m * w), atol=1e-14)
    assert np.allclose(p_q, -m * w * r0, atol=1e-14)


def test_relative_propagate_rejects_bad_input(params):
    with pytest.raises(InvalidInputError):
        analytic.relative_propagate([math.nan, 0], [0, 0], params, 1.0)
    with pytest.raises(InvalidInputError):
        analytic.relative_propagate([0, 0], [0, 0], params, math.inf)


def test_propagate_identity_and_periodicity(odd_params):
    T = odd_params.period
    for s in random_states(21, 5):
        s0 = analytic.propagate(s, odd_params, 0.0)
        assert np.allclose(s0.flat(), s.flat(), atol=1e-14)
        sT = analytic.propagate(s, odd_params, T)
        assert np.allclose(sT.flat(), s.flat(), atol=1e-12)


def test_propagate_composes(odd_params):
    (s,) = random_states(22, 1)
    one = analytic.propagate(s, odd_params, 1.9)
    two = analytic.propagate(analytic.propagate(s, odd_params, 0.7), odd_params, 1.2)
    assert np.allclose(one.flat(), two.flat(), atol=1e-13)


def test_propagate_conserves_energy(odd_params):
    (s,) = random_states(23, 1)
    e0 = total_hamiltonian(s, odd_params)
    for t in np.linspace(0.1, 3 * odd_params.period, 17):
        e = total_hamiltonian(analytic.propagate(s, odd_params, float(t)), odd_params)
        assert abs(e - e0) < 1e-12 * (1 + abs(e0))


def test_propagate_requires_cm_frame(generic_state, params):
    off = PhaseState(generic_state.r + [0.5, 0.0], generic_state.p)
    with pytest.raises(NotCMFrameError):
        analytic.propagate(off, params, 1.0)
    with pytest.raises(InvalidInputError):
        analytic.propagate(generic_state, params, math.nan)


def test_pair_difference_evolves_at_slow_frequency(odd_params):
    # the full propagator and the single-pair propagator must agree on r13
    (s,) = random_states(24, 1)
    for t in (0.3, 1.7, 4.1):
        full = analytic.propagate(s, odd_params, t)
        r, p = analytic.relative_propagate(s.r_diff(1, 3), s.p_diff(1, 3), odd_params, t)
        assert np.allclose(full.r_diff(1, 3), r, atol=1e-13)
        assert np.allclose(full.p_diff(1, 3), p, atol=1e-13)


def test_pairwise_shift_identities_hold_for_any_cm_state(odd_params):
    # r3(t) = r1(t + 2 tau) and r4(t) = r2(t + 2 tau) for every CM state
    tau = analytic.time_delay(odd_params)
    for s in random_states(25, 5):
        for t in (0.0, 0.9, 2.5):
            now = analytic.propagate(s, odd_params, t)
            later = analytic.propagate(s, odd_params, t + 2 * tau)
            assert np.allclose(now.r[2], later.r[0], atol=1e-12)
            assert np.allclose(now.r[3], later.r[1], atol=1e-12)


def test_choreography_state_has_quarter_period_sequence(choreography_state, params):
    # this state satisfies the balance with the lower sign, so body 2 leads:
    # r2(t) = r1(t + tau)
    tau = analytic.time_delay(params)
    for t in np.linspace(0.0, params.period, 13):
        now = analytic.propagate(choreography_state, params, float(t))
        later = analytic.propagate(choreography_state, params, float(t) + tau)
        assert np.allclose(now.r[1], later.r[0], atol=1e-12)


def test_sample_matches_propagate(params, generic_state):
    times = np.linspace(0.0, 2.0, 9)
    traj = analytic.sample(generic_state, params, times)
    assert np.array_equal(traj.times, times)
    for t, state in traj.samples:
        direct = analytic.propagate(generic_state, params, t)
        assert np.allclose(state.flat(), direct.flat(), atol=1e-14)
    with pytest.raises(InvalidInputError):
        analytic.sample(generic_state, params, [])


def test_trisectrix_frozen_state_and_curve(params):
    s = analytic.trisectrix_initial_state(params)
    # body 1 rides the curve exactly, and both pair separations stay 1
    for t in np.linspace(0.0, params.period, 33):
        st = analytic.propagate(s, params, float(t))
        assert np.allclose(st.r[0], analytic.trisectrix_point(params, float(t)), atol=1e-14)
        assert abs(np.linalg.norm(st.r_diff(1, 3)) - 1.0) < 1e-14
        assert abs(np.linalg.norm(st.r_diff(2, 4)) - 1.0) < 1e-14


def test_trisectrix_point_landmark(params):
    pt = analytic.trisectrix_point(params, 2 * math.pi / 3)
    assert np.allclose(pt, (-0.5, 0.0), atol=1e-15)
    # the curve closes after one period
    assert np.allclose(analytic.trisectrix_point(params, params.period),
                       analytic.trisectrix_point(params, 0.0), atol=1e-14)


def test_orbit_family_point_formula(odd_params):
    coeffs = analytic.OrbitCoeffs(0.4, -1.2, 0.9, 0.3, 0.1, -0.2, 0.5, 0.05)
    w = odd_params.omega
    for t in (0.0, 0.37, 2.9):
        th = w * t
        x = 0.5 * (0.4 * math.cos(th) - 1.2 * math.cos(2 * th)) \
            + 0.5 * (0.5 * math.sin(th) + 0.05 * math.sin(2 * th))
        y = 0.5 * (0.9 * math.sin(th) + 0.3 * math.sin(2 * th)) \
            + 0.5 * (0.1 * math.cos(th) - 0.2 * math.cos(2 * th))
        assert np.allclose(analytic.orbit_family_point(coeffs, odd_params, t), (x, y), atol=1e-14)


def test_trisectrix_coeffs_and_rotation_senses(params):
    tri = analytic.OrbitCoeffs.trisectrix()
    assert (tri.a, tri.b, tri.c, tri.d) == (1.0, 1.0, 1.0, 1.0)
    for t in (0.0, 0.8, 3.3):
        assert np.allclose(analytic.orbit_family_point(tri, params, t),
                           analytic.trisectrix_point(params, t), atol=1e-15)
    assert not tri.mixes_rotation_senses()
    # flipping the second-harmonic y coefficient reverses that harmonic's sense
    assert analytic.OrbitCoeffs(1.0, 1.0, 1.0, -1.0).mixes_rotation_senses()
    # a pure counter-rotating path is still single-sense
    assert not analytic.OrbitCoeffs(1.0, 1.0, -1.0, -1.0).mixes_rotation_senses()
    with pytest.raises(InvalidInputError):
        analytic.OrbitCoeffs(math.inf, 0.0, 0.0, 0.0)


def test_choreography_orbit_point(choreography_state, generic_state, params):
    for t in (0.0, 1.1):
        pt = analytic.choreography_orbit_point(choreography_state, params, t)
        direct = analytic.propagate(choreography_state, params, t).r[0]
        assert np.allclose(pt, direct, atol=1e-14)
    with pytest.raises(NotAChoreographyError) as err:
        analytic.choreography_orbit_point(generic_state, params, 0.0)
    assert min(err.value.residuals.values()) > 0.1

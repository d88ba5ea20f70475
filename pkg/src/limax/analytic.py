"""Closed-form time evolution.

In the CM frame the pair differences r13 = r1 - r3 and r24 = r2 - r4 swing at
frequency omega while the pair sums swing at 2*omega, so every trajectory is
an explicit superposition of two harmonics.  This module evaluates that
superposition directly; the RK4 integrator in dynamics.py is kept deliberately
ignorant of it so the two can cross-check each other.
"""

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    InvalidInputError,
    NotAChoreographyError,
    PhaseState,
    SystemParams,
    require_cm_frame,
)
from .dynamics import Trajectory


def time_delay(params: SystemParams) -> float:
    """Quarter-period shift tau = pi/(2*omega) separating successive bodies
    on a common choreography path."""
    return math.pi / (2.0 * params.omega)


def relative_propagate(r0, p0, params: SystemParams, t: float):
    """Evolve one relative pair (r, p) at the slow frequency omega.

    Returns (r(t), p(t)) with r(t) = r0 cos(wt) + p0 sin(wt)/(m w).
    """
    r0 = np.asarray(r0, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    if not (np.all(np.isfinite(r0)) and np.all(np.isfinite(p0)) and math.isfinite(t)):
        raise InvalidInputError("relative_propagate needs finite r0, p0, t")
    m, w = params.m, params.omega
    c, s = math.cos(w * t), math.sin(w * t)
    return r0 * c + p0 * (s / (m * w)), -m * w * s * r0 + c * p0


def _propagate_blocks(state: PhaseState, params: SystemParams, ts: np.ndarray):
    """Positions and momenta of all four bodies at each time in ts.

    Body 1 (and likewise 2) is half the sum of its pair difference and pair
    sum; the difference runs at omega, the sum at 2*omega.  Returns arrays of
    shape (len(ts), 4, 2).
    """
    m, w = params.m, params.omega
    c1 = np.cos(w * ts)[:, None]
    s1 = np.sin(w * ts)[:, None]
    c2 = np.cos(2.0 * w * ts)[:, None]
    s2 = np.sin(2.0 * w * ts)[:, None]

    R = np.empty((ts.size, 4, 2))
    P = np.empty((ts.size, 4, 2))
    for lead, trail, pair in ((1, 3, (1, 3)), (2, 4, (2, 4))):
        a = state.r_diff(*pair)
        b = state.r_sum(*pair)
        q = state.p_diff(*pair)
        qs = state.p_sum(*pair)
        half_diff_r = 0.5 * (a * c1 + (q / (m * w)) * s1)
        half_sum_r = 0.5 * (b * c2 + (qs / (2.0 * m * w)) * s2)
        half_diff_p = 0.5 * (q * c1 - m * w * a * s1)
        half_sum_p = 0.5 * (qs * c2 - 2.0 * m * w * b * s2)
        R[:, lead - 1] = half_sum_r + half_diff_r
        R[:, trail - 1] = half_sum_r - half_diff_r
        P[:, lead - 1] = half_sum_p + half_diff_p
        P[:, trail - 1] = half_sum_p - half_diff_p
    return R, P


def propagate(state: PhaseState, params: SystemParams, t: float, tol=None) -> PhaseState:
    """Exact state at time t.  Requires the CM frame (raises NotCMFrameError
    otherwise), since the two-harmonic split only holds there."""
    if not math.isfinite(t):
        raise InvalidInputError(f"time must be finite, got {t}")
    require_cm_frame(state, params, tol)
    R, P = _propagate_blocks(state, params, np.array([float(t)]))
    return PhaseState(R[0], P[0])


def sample(state: PhaseState, params: SystemParams, times, tol=None) -> Trajectory:
    """Exact trajectory sampled at the given times (must start at 0 and
    increase strictly)."""
    ts = np.asarray(times, dtype=float)
    if ts.ndim != 1 or ts.size == 0 or not np.all(np.isfinite(ts)):
        raise InvalidInputError("times must be a non-empty finite 1-d array")
    require_cm_frame(state, params, tol)
    R, P = _propagate_blocks(state, params, ts)
    states = np.concatenate([R.reshape(ts.size, 8), P.reshape(ts.size, 8)], axis=1)
    return Trajectory(ts.copy(), states)


def trisectrix_point(params: SystemParams, t: float) -> np.ndarray:
    """Point on the unit limacon trisectrix at time t: equal-weight
    superposition of the two harmonics, x + i y = (e^{iwt} + e^{2iwt})/2."""
    th = params.omega * t
    return 0.5 * np.array([math.cos(th) + math.cos(2.0 * th),
                           math.sin(th) + math.sin(2.0 * th)])


def trisectrix_initial_state(params: SystemParams) -> PhaseState:
    """Initial condition whose four bodies chase each other around the
    trisectrix at quarter-period spacing.  Body k+1 trails body k by tau."""
    mw = params.m * params.omega
    r = np.array([
        [1.0, 0.0],
        [-0.5, 0.5],
        [0.0, 0.0],
        [-0.5, -0.5],
    ])
    p = mw * np.array([
        [0.0, 1.5],
        [-0.5, -1.0],
        [0.0, 0.5],
        [0.5, -1.0],
    ])
    return PhaseState(r, p)


@dataclass(frozen=True)
class OrbitCoeffs:
    """Coefficients of the two-harmonic common-path family.

    x(t) = (a cos wt + b cos 2wt)/2 + (c_prime sin wt + d_prime sin 2wt)/2
    y(t) = (c sin wt + d sin 2wt)/2 + (a_prime cos wt + b_prime cos 2wt)/2

    The unprimed set alone gives axis-aligned ellipse-like paths; primes mix
    the axes.  All eight default to the trisectrix values via trisectrix().
    """

    a: float
    b: float
    c: float
    d: float
    a_prime: float = 0.0
    b_prime: float = 0.0
    c_prime: float = 0.0
    d_prime: float = 0.0

    def __post_init__(self):
        vals = (self.a, self.b, self.c, self.d,
                self.a_prime, self.b_prime, self.c_prime, self.d_prime)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidInputError("orbit coefficients must be finite")

    @classmethod
    def trisectrix(cls) -> "OrbitCoeffs":
        return cls(1.0, 1.0, 1.0, 1.0)

    def circular_components(self):
        """Amplitudes (alpha_k, beta_k) of the co- and counter-rotating
        circular parts of each harmonic k = 1, 2."""
        out = []
        for cos_x, sin_y, cos_y, sin_x in (
            (self.a, self.c, self.a_prime, self.c_prime),
            (self.b, self.d, self.b_prime, self.d_prime),
        ):
            alpha = 0.25 * complex(cos_x + sin_y, cos_y - sin_x)
            beta = 0.25 * complex(cos_x - sin_y, cos_y + sin_x)
            out.append((alpha, beta))
        return out

    def mixes_rotation_senses(self) -> bool:
        """True when both rotation senses carry weight.  Such paths can pinch
        into self-intersections where bodies collide; callers may want to
        warn, but nothing here rejects them."""
        comps = self.circular_components()
        eps = 1e-12 * max(1.0, max(abs(z) for pair in comps for z in pair))
        senses = set()
        for alpha, beta in comps:
            if abs(alpha) > eps:
                senses.add(+1)
            if abs(beta) > eps:
                senses.add(-1)
        return len(senses) == 2


def orbit_family_point(coeffs: OrbitCoeffs, params: SystemParams, t: float) -> np.ndarray:
    """Point on the common path defined by the coefficient set."""
    th = params.omega * t
    c1, s1 = math.cos(th), math.sin(th)
    c2, s2 = math.cos(2.0 * th), math.sin(2.0 * th)
    x = 0.5 * (coeffs.a * c1 + coeffs.b * c2) + 0.5 * (coeffs.c_prime * s1 + coeffs.d_prime * s2)
    y = 0.5 * (coeffs.c * s1 + coeffs.d * s2) + 0.5 * (coeffs.a_prime * c1 + coeffs.b_prime * c2)
    return np.array([x, y])


def choreography_orbit_point(state: PhaseState, params: SystemParams, t: float, tol=None) -> np.ndarray:
    """Point at time t on the single closed path shared by all four bodies.

    Only meaningful for states satisfying the choreography balance
    conditions; raises NotAChoreographyError otherwise.  Body 1 traces the
    path, the others follow it at quarter-period delays.
    """
    from .scenarios import check_choreography_conditions

    ok, _, residuals = check_choreography_conditions(state, params, tol)
    if not ok:
        raise NotAChoreographyError(
            "state does not satisfy the choreography balance conditions "
            f"(branch residuals {residuals})", residuals=residuals)
    return propagate(state, params, t, tol).r[0]

"""Orbit classification and the momentum-boost machinery.

The four-body choreography lives or dies by a balance between relative
positions and the opposite pair's relative momenta (m*omega*r13 = -+ p24 and
m*omega*r24 = +- p13 with one consistent sign choice).  This module checks
that balance, classifies initial conditions by which special properties they
carry, and implements the two momentum surgeries: fragmentation (a pair boost
that breaks the balance while leaving each two-body choreography intact) and
fusion (the boosts that restore it).
"""

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import math
import numbers

import numpy as np

from .core import (
    InvalidInputError,
    PhaseState,
    SystemParams,
    default_tolerance,
    require_cm_frame,
    state_scale,
)
from .analytic import propagate, sample, trisectrix_initial_state
from .dynamics import Trajectory


class TrajectoryClass(str, Enum):
    GENERIC = "GENERIC"
    RIGID_13 = "RIGID_13"
    RIGID_24 = "RIGID_24"
    RIGID_BOTH = "RIGID_BOTH"
    CHOREOGRAPHY = "CHOREOGRAPHY"
    CHOREOGRAPHY_SYMMETRIC = "CHOREOGRAPHY_SYMMETRIC"


class ChoreographyCheck(NamedTuple):
    ok: bool
    sign_branch: int
    residuals: dict


def _branch_residuals(state: PhaseState, params: SystemParams) -> dict:
    """Scale-normalized defect of the pair balance for each sign branch.

    Branch s demands m*omega*r13 = s*p24 and m*omega*r24 = -s*p13; branch +1
    makes body 2 trail body 1 by a quarter period, branch -1 makes it lead.
    """
    scale = state_scale(state, params)
    if scale == 0.0:
        return {1: 0.0, -1: 0.0}
    mw = params.m * params.omega
    r13, r24 = state.r_diff(1, 3), state.r_diff(2, 4)
    p13, p24 = state.p_diff(1, 3), state.p_diff(2, 4)
    out = {}
    for s in (1, -1):
        out[s] = max(
            float(np.linalg.norm(mw * r13 - s * p24)),
            float(np.linalg.norm(mw * r24 + s * p13)),
        ) / scale
    return out


def check_choreography_conditions(state: PhaseState, params: SystemParams,
                                  tol=None) -> ChoreographyCheck:
    """Test whether the state launches a single four-body choreography.

    Reports the residual of both sign branches; ok means the better branch
    passes tol.  Ties (including the zero state) resolve to branch +1.
    """
    if tol is None:
        tol = default_tolerance()
    require_cm_frame(state, params, tol)
    residuals = _branch_residuals(state, params)
    branch = 1 if residuals[1] <= residuals[-1] else -1
    return ChoreographyCheck(ok=residuals[branch] <= tol, sign_branch=branch,
                             residuals=residuals)


_RIGID_PAIRS = ((1, 3), (2, 4))


def _rigid_residual(state: PhaseState, params: SystemParams, pair) -> float:
    scale = state_scale(state, params)
    if scale == 0.0:
        return 0.0
    mw = params.m * params.omega
    r = state.r_diff(*pair)
    p = state.p_diff(*pair)
    res_mag = abs(float(np.linalg.norm(p)) - mw * float(np.linalg.norm(r))) / scale
    res_perp = mw * abs(float(r @ p)) / scale ** 2
    return max(res_mag, res_perp)


def check_rigid_pair(state: PhaseState, params: SystemParams, pair, tol=None) -> bool:
    """True when the pair's relative motion is a uniform circle: relative
    speed equal to omega times the separation, and velocity perpendicular to
    the separation (so |r_pair| stays constant)."""
    pair = tuple(pair)
    if pair not in _RIGID_PAIRS:
        raise InvalidInputError(f"pair must be (1, 3) or (2, 4), got {pair}")
    if tol is None:
        tol = default_tolerance()
    return _rigid_residual(state, params, pair) <= tol


@dataclass(frozen=True)
class Classification:
    """Outcome of classify: the label, the sign branch when the state is
    choreographic (None otherwise), and the raw residuals behind the call."""

    label: TrajectoryClass
    sign_branch: int | None
    residuals: dict


def classify(state: PhaseState, params: SystemParams, tol=None) -> Classification:
    """Sort an initial condition into the orbit classes.

    Choreography (with or without the extra rigid symmetry) wins over the
    rigid-pair labels; a state with one or both pairs rigid but no four-body
    balance gets a RIGID_* label; anything else is GENERIC.
    """
    if tol is None:
        tol = default_tolerance()
    chk = check_choreography_conditions(state, params, tol)
    rigid = {pair: _rigid_residual(state, params, pair) <= tol for pair in _RIGID_PAIRS}
    residuals = {
        "branch_plus": chk.residuals[1],
        "branch_minus": chk.residuals[-1],
        "rigid_13": _rigid_residual(state, params, (1, 3)),
        "rigid_24": _rigid_residual(state, params, (2, 4)),
    }
    if chk.ok:
        label = (TrajectoryClass.CHOREOGRAPHY_SYMMETRIC
                 if rigid[(1, 3)] and rigid[(2, 4)] else TrajectoryClass.CHOREOGRAPHY)
        return Classification(label=label, sign_branch=chk.sign_branch, residuals=residuals)
    if rigid[(1, 3)] and rigid[(2, 4)]:
        label = TrajectoryClass.RIGID_BOTH
    elif rigid[(1, 3)]:
        label = TrajectoryClass.RIGID_13
    elif rigid[(2, 4)]:
        label = TrajectoryClass.RIGID_24
    else:
        label = TrajectoryClass.GENERIC
    return Classification(label=label, sign_branch=None, residuals=residuals)


@dataclass(frozen=True)
class BoostEvent:
    """Equal-and-opposite momentum kick: body_plus gains delta, body_minus
    loses it, positions untouched."""

    t_ex: float
    body_plus: int
    body_minus: int
    delta: np.ndarray

    def __post_init__(self):
        if not (isinstance(self.t_ex, numbers.Real) and math.isfinite(self.t_ex)):
            raise InvalidInputError(f"boost time must be finite, got {self.t_ex}")
        for label, body in (("body_plus", self.body_plus), ("body_minus", self.body_minus)):
            if not (isinstance(body, numbers.Integral) and 1 <= body <= 4):
                raise InvalidInputError(f"{label} must be a body index 1..4, got {body}")
        if self.body_plus == self.body_minus:
            raise InvalidInputError("body_plus and body_minus must differ")
        delta = np.asarray(self.delta, dtype=float)
        if delta.shape != (2,) or not np.all(np.isfinite(delta)):
            raise InvalidInputError("delta must be a finite 2-vector")
        delta = delta.copy()
        delta.setflags(write=False)
        object.__setattr__(self, "t_ex", float(self.t_ex))
        object.__setattr__(self, "body_plus", int(self.body_plus))
        object.__setattr__(self, "body_minus", int(self.body_minus))
        object.__setattr__(self, "delta", delta)


def apply_pair_boost(state: PhaseState, event: BoostEvent) -> PhaseState:
    """New state with the event's momentum kick applied."""
    p = state.p.copy()
    p[event.body_plus - 1] += event.delta
    p[event.body_minus - 1] -= event.delta
    return state.with_momenta(p)


@dataclass(frozen=True)
class FusionBoosts:
    """Relative-momentum corrections that restore the four-body balance:
    delta_13 is added to p13 = p1 - p3 and delta_24 to p24 = p2 - p4, each
    split as +-half per body so pair-sum momenta are untouched.  sign_branch
    records which branch the corrections aim for."""

    delta_13: np.ndarray
    delta_24: np.ndarray
    sign_branch: int

    def __post_init__(self):
        for name in ("delta_13", "delta_24"):
            v = np.asarray(getattr(self, name), dtype=float).copy()
            v.setflags(write=False)
            object.__setattr__(self, name, v)


def fusion_boosts(state: PhaseState, params: SystemParams) -> FusionBoosts:
    """Compute the boosts that fuse the two pair choreographies into one.

    Targets the nearer sign branch (smaller balance residual, ties to +1)
    and returns the full corrections delta_13 = -s*m*omega*r24 - p13 and
    delta_24 = s*m*omega*r13 - p24.  Balanced states get zero boosts.
    """
    require_cm_frame(state, params)
    residuals = _branch_residuals(state, params)
    s = 1 if residuals[1] <= residuals[-1] else -1
    mw = params.m * params.omega
    delta_13 = -s * mw * state.r_diff(2, 4) - state.p_diff(1, 3)
    delta_24 = s * mw * state.r_diff(1, 3) - state.p_diff(2, 4)
    return FusionBoosts(delta_13=delta_13, delta_24=delta_24, sign_branch=s)


def apply_fusion_boosts(state: PhaseState, boosts: FusionBoosts) -> PhaseState:
    """Apply the fusion corrections, half per body, within each pair."""
    p = state.p.copy()
    p[0] += 0.5 * boosts.delta_13
    p[2] -= 0.5 * boosts.delta_13
    p[1] += 0.5 * boosts.delta_24
    p[3] -= 0.5 * boosts.delta_24
    return state.with_momenta(p)


def fragmentation_scenario(params: SystemParams, delta, beta: int, horizon=None,
                           n_samples: int = 257):
    """Run the fragmentation experiment on the symmetric choreography.

    Propagates the trisectrix state through beta full cycles, kicks bodies 2
    and 3 with +-delta, and returns (before, after) trajectories.  The after
    trajectory is clocked from the boost instant and spans horizon (one
    period by default).  The boost never touches the two-body pair structure;
    it only fragments the four-body sequence.
    """
    if not (isinstance(beta, numbers.Integral) and beta >= 0):
        raise InvalidInputError(f"beta must be a nonnegative integer, got {beta}")
    if n_samples < 1:
        raise InvalidInputError(f"n_samples must be at least 1, got {n_samples}")
    if horizon is None:
        horizon = params.period
    horizon = float(horizon)
    if not (math.isfinite(horizon) and horizon > 0):
        raise InvalidInputError(f"horizon must be positive, got {horizon}")

    state0 = trisectrix_initial_state(params)
    t_ex = beta * params.period
    if beta == 0:
        before = Trajectory(np.array([0.0]), state0.flat()[None, :])
    else:
        before = sample(state0, params, np.linspace(0.0, t_ex, n_samples))
    event = BoostEvent(t_ex=t_ex, body_plus=2, body_minus=3, delta=delta)
    boosted = apply_pair_boost(propagate(state0, params, t_ex), event)
    after = sample(boosted, params, np.linspace(0.0, horizon, n_samples))
    return before, after

"""State containers and exact coordinate maps for the planar four-body
oscillator chain.

Four unit-mass-m bodies in the plane, each adjacent pair coupled by an
attractive quadratic spring of strength m*omega^2/2 and each alternate pair
(1,3), (2,4) by a repulsive one of half that strength.  All coordinate
transforms here are constant linear maps with closed-form entries; nothing is
orthogonalized numerically.
"""

import math
import os
from dataclasses import dataclass

import numpy as np


class LimaxError(Exception):
    """Base class for errors raised by this package."""


class InvalidInputError(LimaxError, ValueError):
    """Non-finite or malformed numerical input."""


class NotCMFrameError(LimaxError):
    """State is not in the center-of-mass frame."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class NotAChoreographyError(LimaxError):
    """State does not satisfy the choreography balance conditions."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


def default_tolerance() -> float:
    """Default tolerance for frame and classification checks.

    Reads LIMAX_DEFAULT_TOL from the environment on every call so tests and
    callers can adjust it without reimporting.
    """
    return float(os.environ.get("LIMAX_DEFAULT_TOL", 1e-9))


@dataclass(frozen=True)
class SystemParams:
    """Common mass m and spring frequency omega (both > 0)."""

    m: float = 1.0
    omega: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m > 0):
            raise InvalidInputError(f"mass must be positive and finite, got {self.m}")
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise InvalidInputError(f"omega must be positive and finite, got {self.omega}")

    @property
    def period(self) -> float:
        """Fundamental period 2*pi/omega of the slow relative mode."""
        return 2.0 * math.pi / self.omega


def _clean_block(arr, name):
    out = np.array(arr, dtype=float)
    if out.shape != (4, 2):
        raise InvalidInputError(f"{name} must have shape (4, 2), got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PhaseState:
    """Cartesian phase-space point: positions r[i] and momenta p[i], i = 0..3
    for bodies 1..4.  Arrays are copied on construction and frozen."""

    r: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "r", _clean_block(self.r, "positions"))
        object.__setattr__(self, "p", _clean_block(self.p, "momenta"))

    @classmethod
    def from_flat(cls, y):
        y = np.asarray(y, dtype=float)
        if y.shape != (16,):
            raise InvalidInputError(f"flat state must have shape (16,), got {y.shape}")
        return cls(y[:8].reshape(4, 2), y[8:].reshape(4, 2))

    def flat(self) -> np.ndarray:
        """Length-16 vector: the eight position components then the eight
        momentum components, body-major."""
        return np.concatenate([self.r.ravel(), self.p.ravel()])

    def r_diff(self, i: int, j: int) -> np.ndarray:
        """Relative position r_i - r_j (bodies numbered from 1)."""
        return self.r[i - 1] - self.r[j - 1]

    def p_diff(self, i: int, j: int) -> np.ndarray:
        return self.p[i - 1] - self.p[j - 1]

    def r_sum(self, i: int, j: int) -> np.ndarray:
        """Pair sum r_i + r_j, the coordinate conjugate to the fast mode."""
        return self.r[i - 1] + self.r[j - 1]

    def p_sum(self, i: int, j: int) -> np.ndarray:
        return self.p[i - 1] + self.p[j - 1]

    def with_momenta(self, p) -> "PhaseState":
        return PhaseState(self.r, p)


@dataclass(frozen=True, eq=False)
class JacobiState:
    """Jacobi tree coordinates: row k of `j` is J_k, row k of `pj` its
    conjugate momentum.  J0 is the center of mass scaled by 1/4 and PJ0 the
    total momentum."""

    j: np.ndarray
    pj: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "j", _clean_block(self.j, "jacobi positions"))
        object.__setattr__(self, "pj", _clean_block(self.pj, "jacobi momenta"))


@dataclass(frozen=True, eq=False)
class UState:
    """Normal-mode-adapted coordinates: row k of `u` is U_k.  U1 and U2 carry
    the two slow pair modes, U3 the fast mode, U0 the center of mass."""

    u: np.ndarray
    pu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _clean_block(self.u, "u positions"))
        object.__setattr__(self, "pu", _clean_block(self.pu, "u momenta"))


_S2 = math.sqrt(2.0)
_S6 = math.sqrt(6.0)
_S3 = math.sqrt(3.0)

# Position maps J = A r and U = B r (per component; x and y decouple).
# Both satisfy A A^T = diag(1/4, 1, 1, 1), so the conjugate momentum map is
# P = D^{-1} A p and the inverses are r = (D^{-1} A)^T J, p = A^T P.
JACOBI_POS = np.array([
    [0.25, 0.25, 0.25, 0.25],
    [-1.0 / _S2, 1.0 / _S2, 0.0, 0.0],
    [-_S6 / 6.0, -_S6 / 6.0, _S6 / 3.0, 0.0],
    [-_S3 / 6.0, -_S3 / 6.0, -_S3 / 6.0, _S3 / 2.0],
])
U_POS = np.array([
    [0.25, 0.25, 0.25, 0.25],
    [0.0, -1.0 / _S2, 0.0, 1.0 / _S2],
    [1.0 / _S2, 0.0, -1.0 / _S2, 0.0],
    [-0.5, 0.5, -0.5, 0.5],
])
_BLOCK_NORMS = np.array([0.25, 1.0, 1.0, 1.0])
JACOBI_MOM = JACOBI_POS / _BLOCK_NORMS[:, None]
U_MOM = U_POS / _BLOCK_NORMS[:, None]
for _m in (JACOBI_POS, U_POS, JACOBI_MOM, U_MOM):
    _m.setflags(write=False)


def to_jacobi(state: PhaseState) -> JacobiState:
    return JacobiState(JACOBI_POS @ state.r, JACOBI_MOM @ state.p)


def from_jacobi(jstate: JacobiState) -> PhaseState:
    return PhaseState(JACOBI_MOM.T @ jstate.j, JACOBI_POS.T @ jstate.pj)


def to_u(state: PhaseState) -> UState:
    return UState(U_POS @ state.r, U_MOM @ state.p)


def from_u(ustate: UState) -> PhaseState:
    return PhaseState(U_MOM.T @ ustate.u, U_POS.T @ ustate.pu)


def cm_project(state: PhaseState) -> PhaseState:
    """Shift to the center-of-mass frame: subtract the mean position and the
    mean momentum from every body."""
    return PhaseState(state.r - state.r.mean(axis=0), state.p - state.p.mean(axis=0))


def state_scale(state: PhaseState, params: SystemParams) -> float:
    """Momentum-dimension scale m*omega*max(|r|, |p|/(m*omega)) used to
    normalize residuals.  Zero only for the zero state."""
    mw = params.m * params.omega
    return mw * max(
        float(np.max(np.linalg.norm(state.r, axis=1))),
        float(np.max(np.linalg.norm(state.p, axis=1))) / mw,
    )


def cm_residual(state: PhaseState, params: SystemParams) -> float:
    """Scale-normalized distance from the center-of-mass frame."""
    scale = state_scale(state, params)
    if scale == 0.0:
        return 0.0
    mw = params.m * params.omega
    return max(
        mw * float(np.linalg.norm(state.r.mean(axis=0))),
        float(np.linalg.norm(state.p.mean(axis=0))),
    ) / scale


def require_cm_frame(state: PhaseState, params: SystemParams, tol=None):
    """Raise NotCMFrameError unless the state sits in the CM frame."""
    if tol is None:
        tol = default_tolerance()
    res = cm_residual(state, params)
    if res > tol:
        raise NotCMFrameError(
            f"state is not in the center-of-mass frame (residual {res:.3e} > {tol:.1e}); "
            "apply cm_project first", residual=res)


# Pairwise potential coefficients: V = m*omega^2 * sum c_ij |r_i - r_j|^2.
# Adjacent pairs attract with strength +1/2, alternate pairs repel at -1/4.
PAIR_COEFFS = {
    (1, 2): 0.5,
    (2, 3): 0.5,
    (3, 4): 0.5,
    (1, 4): 0.5,
    (1, 3): -0.25,
    (2, 4): -0.25,
}


def potential_energy(state: PhaseState, params: SystemParams) -> float:
    mw2 = params.m * params.omega ** 2
    v = 0.0
    for (i, j), c in PAIR_COEFFS.items():
        d = state.r_diff(i, j)
        v += c * float(d @ d)
    return mw2 * v


def total_hamiltonian(state: PhaseState, params: SystemParams) -> float:
    """Full Cartesian Hamiltonian: kinetic energy plus the pair potential."""
    kin = float(np.sum(state.p * state.p)) / (2.0 * params.m)
    return kin + potential_energy(state, params)


def hamiltonian_jacobi(jstate: JacobiState, params: SystemParams) -> float:
    """Hamiltonian in Jacobi coordinates.  Numerically identical to
    total_hamiltonian of the preimage state."""
    m, w = params.m, params.omega
    pj = jstate.pj
    j1, j2, j3 = jstate.j[1], jstate.j[2], jstate.j[3]
    kin = (float(pj[0] @ pj[0])
           + 4.0 * float(pj[1] @ pj[1])
           + 4.0 * float(pj[2] @ pj[2])
           + 4.0 * float(pj[3] @ pj[3])) / (8.0 * m)
    pot = m * w * w * (
        1.25 * float(j1 @ j1)
        + 0.75 * float(j2 @ j2)
        + float(j3 @ j3)
        - (_S3 / 2.0) * float(j1 @ j2)
        + math.sqrt(1.5) * float(j1 @ j3)
        - (1.0 / _S2) * float(j2 @ j3)
    )
    return kin + pot


def h_rel_u(ustate: UState, params: SystemParams) -> float:
    """Relative-motion Hamiltonian in U coordinates: three decoupled isotropic
    oscillators, U1 and U2 at frequency omega and U3 at 2*omega.  U0 and PU0
    are ignored (CM sector)."""
    m, w = params.m, params.omega
    u, pu = ustate.u, ustate.pu
    kin = (float(pu[1] @ pu[1]) + float(pu[2] @ pu[2]) + float(pu[3] @ pu[3])) / (2.0 * m)
    pot = 0.5 * m * w * w * (
        float(u[1] @ u[1]) + float(u[2] @ u[2]) + 4.0 * float(u[3] @ u[3])
    )
    return kin + pot


def random_cm_state(rng, scale: float = 1.0) -> PhaseState:
    """Unit-scale random state: components uniform in [-scale, scale], then
    projected to the CM frame.  `rng` is a numpy Generator."""
    r = rng.uniform(-scale, scale, size=(4, 2))
    p = rng.uniform(-scale, scale, size=(4, 2))
    return cm_project(PhaseState(r, p))

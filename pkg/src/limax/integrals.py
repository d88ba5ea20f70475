"""Integrals of motion and their Poisson algebra.

The relative motion separates into a 4D isotropic oscillator (the stacked U1,
U2 block at frequency omega) and a 2D one (U3 at 2*omega).  That gives eleven
globally conserved quantities; on top of those live the pair overlaps
DOT_R = r13.r24 and DOT_P = p13.p24, conserved only on special trajectories,
and their globally conserved combination IGEN.

Brackets are measured by central differences over the 16 Cartesian phase
coordinates (step h, one Richardson pass), which is exact up to rounding for
these low-degree polynomials.  Closed-form gradients are also shipped; the
finite-difference route stays the oracle and the two are cross-checked in the
tests rather than merged.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple

import math

import numpy as np

from .core import InvalidInputError, PhaseState, SystemParams, U_POS


def fradkin_name(i: int, j: int) -> str:
    """Canonical label Iij of a Fradkin tensor component, 1 <= i <= j <= 4."""
    if not (1 <= i <= j <= 4):
        raise InvalidInputError(f"Fradkin indices need 1 <= i <= j <= 4, got ({i}, {j})")
    return f"I{i}{j}"


def angular_name(i: int, j: int) -> str:
    """Canonical label Lij of a 4D rotation generator, 1 <= i < j <= 4."""
    if not (1 <= i < j <= 4):
        raise InvalidInputError(f"rotation indices need 1 <= i < j <= 4, got ({i}, {j})")
    return f"L{i}{j}"


@dataclass(frozen=True)
class PhasePoint4D:
    """The stacked U1 + U2 slow block as a flat 4D oscillator point:
    (q1, q2) = U1, (q3, q4) = U2 and likewise for momenta."""

    q: np.ndarray
    p: np.ndarray

    @classmethod
    def from_ustate(cls, ustate) -> "PhasePoint4D":
        q = np.concatenate([ustate.u[1], ustate.u[2]])
        p = np.concatenate([ustate.pu[1], ustate.pu[2]])
        q.setflags(write=False)
        p.setflags(write=False)
        return cls(q, p)

    def angular_momentum(self, i: int, j: int) -> float:
        angular_name(i, j)
        return float(self.q[i - 1] * self.p[j - 1] - self.q[j - 1] * self.p[i - 1])

    def fradkin(self, i: int, j: int, params: SystemParams) -> float:
        fradkin_name(i, j)
        m, w = params.m, params.omega
        return float(self.p[i - 1] * self.p[j - 1] / m
                     + m * w * w * self.q[i - 1] * self.q[j - 1])


# Linear map from the flat 16-vector (8 positions, 8 momenta) to the twelve
# relative coordinates (U1, U2, U3, PU1, PU2, PU3) used by every evaluator.
# The CM block row of U_POS is skipped; rows 1..3 are shared by the position
# and momentum maps.
_REL = np.zeros((12, 16))
for _k in range(3):
    for _body in range(4):
        _c = U_POS[_k + 1, _body]
        _REL[2 * _k, 2 * _body] = _c
        _REL[2 * _k + 1, 2 * _body + 1] = _c
        _REL[6 + 2 * _k, 8 + 2 * _body] = _c
        _REL[6 + 2 * _k + 1, 8 + 2 * _body + 1] = _c
_REL.setflags(write=False)

# Index helpers into the 12-vector u: positions of the 4D block coordinates
# q1..q4 are 0..3, of U3 are 4..5; momenta sit 6 higher.
_U3X, _U3Y, _PU3X, _PU3Y = 4, 5, 10, 11


def _val_h4d(u, m, w):
    q = u[..., 0:4]
    p = u[..., 6:10]
    return np.sum(p * p, axis=-1) / (2.0 * m) + 0.5 * m * w * w * np.sum(q * q, axis=-1)


def _val_h2d(u, m, w):
    kin = (u[..., _PU3X] ** 2 + u[..., _PU3Y] ** 2) / (2.0 * m)
    return kin + 2.0 * m * w * w * (u[..., _U3X] ** 2 + u[..., _U3Y] ** 2)


def _val_hrel(u, m, w):
    return _val_h4d(u, m, w) + _val_h2d(u, m, w)


def _val_lu3(u, m, w):
    return u[..., _U3X] * u[..., _PU3Y] - u[..., _U3Y] * u[..., _PU3X]


def _val_h3x(u, m, w):
    return u[..., _PU3X] ** 2 / (2.0 * m) + 2.0 * m * w * w * u[..., _U3X] ** 2


def _val_holt(u, m, w):
    p1x = u[..., 6]
    u1x = u[..., 0]
    u3y = u[..., _U3Y]
    p3y = u[..., _PU3Y]
    mw = m * w
    return p1x * p1x * p3y + 4.0 * mw * mw * u1x * u3y * p1x - mw * mw * u1x * u1x * p3y


def _val_dot_r(u, m, w):
    # r13 = sqrt2 * U2 and r24 = -sqrt2 * U1, so the overlap is -2 U1.U2.
    return -2.0 * (u[..., 0] * u[..., 2] + u[..., 1] * u[..., 3])


def _val_dot_p(u, m, w):
    return -2.0 * (u[..., 6] * u[..., 8] + u[..., 7] * u[..., 9])


def _val_igen(u, m, w):
    return _val_dot_r(u, m, w) + _val_dot_p(u, m, w) / (m * w) ** 2


def _grad_h4d(u, m, w):
    g = np.zeros(12)
    g[0:4] = m * w * w * u[0:4]
    g[6:10] = u[6:10] / m
    return g


def _grad_h2d(u, m, w):
    g = np.zeros(12)
    g[_U3X] = 4.0 * m * w * w * u[_U3X]
    g[_U3Y] = 4.0 * m * w * w * u[_U3Y]
    g[_PU3X] = u[_PU3X] / m
    g[_PU3Y] = u[_PU3Y] / m
    return g


def _grad_hrel(u, m, w):
    return _grad_h4d(u, m, w) + _grad_h2d(u, m, w)


def _grad_lu3(u, m, w):
    g = np.zeros(12)
    g[_U3X] = u[_PU3Y]
    g[_U3Y] = -u[_PU3X]
    g[_PU3X] = -u[_U3Y]
    g[_PU3Y] = u[_U3X]
    return g


def _grad_h3x(u, m, w):
    g = np.zeros(12)
    g[_U3X] = 4.0 * m * w * w * u[_U3X]
    g[_PU3X] = u[_PU3X] / m
    return g


def _grad_holt(u, m, w):
    g = np.zeros(12)
    p1x, u1x, u3y, p3y = u[6], u[0], u[_U3Y], u[_PU3Y]
    mw2 = (m * w) ** 2
    g[0] = 4.0 * mw2 * u3y * p1x - 2.0 * mw2 * u1x * p3y
    g[_U3Y] = 4.0 * mw2 * u1x * p1x
    g[6] = 2.0 * p1x * p3y + 4.0 * mw2 * u1x * u3y
    g[_PU3Y] = p1x * p1x - mw2 * u1x * u1x
    return g


def _grad_dot_r(u, m, w):
    g = np.zeros(12)
    g[0] = -2.0 * u[2]
    g[1] = -2.0 * u[3]
    g[2] = -2.0 * u[0]
    g[3] = -2.0 * u[1]
    return g


def _grad_dot_p(u, m, w):
    g = np.zeros(12)
    g[6] = -2.0 * u[8]
    g[7] = -2.0 * u[9]
    g[8] = -2.0 * u[6]
    g[9] = -2.0 * u[7]
    return g


def _grad_igen(u, m, w):
    return _grad_dot_r(u, m, w) + _grad_dot_p(u, m, w) / (m * w) ** 2


def _make_angular(i, j):
    qi, qj, pi, pj = i - 1, j - 1, 5 + i, 5 + j

    def value(u, m, w):
        return u[..., qi] * u[..., pj] - u[..., qj] * u[..., pi]

    def grad(u, m, w):
        g = np.zeros(12)
        g[qi] = u[pj]
        g[qj] = -u[pi]
        g[pi] = -u[qj]
        g[pj] = u[qi]
        return g

    return value, grad


def _make_fradkin(i, j):
    qi, qj, pi, pj = i - 1, j - 1, 5 + i, 5 + j

    def value(u, m, w):
        return u[..., pi] * u[..., pj] / m + m * w * w * u[..., qi] * u[..., qj]

    def grad(u, m, w):
        g = np.zeros(12)
        g[qi] += m * w * w * u[qj]
        g[qj] += m * w * w * u[qi]
        g[pi] += u[pj] / m
        g[pj] += u[pi] / m
        return g

    return value, grad


class _Integral(NamedTuple):
    value: Callable
    grad: Callable


_REGISTRY = {
    "H_REL": _Integral(_val_hrel, _grad_hrel),
    "H_2D": _Integral(_val_h2d, _grad_h2d),
    "H4D": _Integral(_val_h4d, _grad_h4d),
    "L_U3": _Integral(_val_lu3, _grad_lu3),
    "H3X": _Integral(_val_h3x, _grad_h3x),
    "HOLT": _Integral(_val_holt, _grad_holt),
    "IGEN": _Integral(_val_igen, _grad_igen),
    "DOT_R": _Integral(_val_dot_r, _grad_dot_r),
    "DOT_P": _Integral(_val_dot_p, _grad_dot_p),
}
for _i in range(1, 5):
    for _j in range(_i + 1, 5):
        _REGISTRY[angular_name(_i, _j)] = _Integral(*_make_angular(_i, _j))
for _i in range(1, 5):
    for _j in range(_i, 5):
        _REGISTRY[fradkin_name(_i, _j)] = _Integral(*_make_fradkin(_i, _j))

INTEGRAL_NAMES = tuple(sorted(_REGISTRY))

# The eleven globally conserved integrals: the fast-block pair (H_2D, L_U3),
# the split energy H3X, the Holt-type cross integral, and a seven-member
# independent set of the 4D oscillator block.  Everything else in the
# registry is functionally dependent on these or only conditionally
# conserved.
GLOBAL_INTEGRALS = ("H_2D", "L_U3", "H3X", "HOLT",
                    "H4D", "L12", "L13", "L14", "I11", "I22", "I33")


def _lookup(name):
    try:
        return _REGISTRY[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown integral name {name!r}; known names: {', '.join(INTEGRAL_NAMES)}"
        ) from None


def _uvec(state: PhaseState) -> np.ndarray:
    return _REL @ state.flat()


def eval_integral(name: str, state: PhaseState, params: SystemParams) -> float:
    """Evaluate one named integral at a state (internally in U coordinates)."""
    entry = _lookup(name)
    return float(entry.value(_uvec(state), params.m, params.omega))


@dataclass(frozen=True)
class IntegralReport:
    """Values of one integral along a trajectory and the worst excursion from
    its initial value."""

    name: str
    samples: tuple
    max_drift: float


def _trajectory_blocks(trajectory):
    if hasattr(trajectory, "times") and hasattr(trajectory, "states"):
        return np.asarray(trajectory.times, dtype=float), np.asarray(trajectory.states, dtype=float)
    pairs = list(trajectory)
    if not pairs:
        raise InvalidInputError("trajectory must contain at least one sample")
    times = np.array([t for t, _ in pairs], dtype=float)
    states = np.stack([s.flat() for _, s in pairs])
    return times, states


def integral_drift(name: str, trajectory, params: SystemParams) -> IntegralReport:
    """Evaluate an integral along a trajectory (a Trajectory object or an
    iterable of (t, PhaseState) pairs) and report max |value - value(0)|."""
    entry = _lookup(name)
    times, states = _trajectory_blocks(trajectory)
    if times.size == 0:
        raise InvalidInputError("trajectory must contain at least one sample")
    vals = np.atleast_1d(entry.value(states @ _REL.T, params.m, params.omega))
    drift = float(np.max(np.abs(vals - vals[0])))
    return IntegralReport(name=name, samples=tuple(zip(times.tolist(), vals.tolist())),
                          max_drift=drift)


def _fd_gradient(value_fn, y, m, w, h):
    """Central-difference gradient over the 16 Cartesian coordinates."""
    eye = np.eye(16)
    plus = (y + h * eye) @ _REL.T
    minus = (y - h * eye) @ _REL.T
    return (value_fn(plus, m, w) - value_fn(minus, m, w)) / (2.0 * h)


def _symplectic_product(gf, gg):
    return float(gf[:8] @ gg[8:] - gf[8:] @ gg[:8])


def poisson_bracket(f: str, g: str, state: PhaseState, params: SystemParams,
                    h: float = 1e-4) -> float:
    """Brute-force Poisson bracket {f, g} at a state.

    Central differences over the 16 Cartesian phase coordinates at steps h
    and h/2, combined by one Richardson step.  Derivation-free on purpose:
    this is the oracle the closed-form gradients are checked against.
    """
    if not (math.isfinite(h) and h > 0):
        raise InvalidInputError(f"finite-difference step must be positive, got {h}")
    fv = _lookup(f).value
    gv = _lookup(g).value
    y = state.flat()
    m, w = params.m, params.omega
    estimates = []
    for step in (h, 0.5 * h):
        gf = _fd_gradient(fv, y, m, w, step)
        gg = _fd_gradient(gv, y, m, w, step)
        estimates.append(_symplectic_product(gf, gg))
    return (4.0 * estimates[1] - estimates[0]) / 3.0


def poisson_bracket_closed(f: str, g: str, state: PhaseState, params: SystemParams) -> float:
    """{f, g} from the closed-form gradients in the canonical U variables."""
    m, w = params.m, params.omega
    u = _uvec(state)
    gf = _lookup(f).grad(u, m, w)
    gg = _lookup(g).grad(u, m, w)
    return float(gf[:6] @ gg[6:] - gf[6:] @ gg[:6])


def bracket_L_H3x(state: PhaseState, params: SystemParams) -> float:
    """Closed form of {L_U3, H3X}: (1/m) P3x P3y + 4 m w^2 u3x u3y.

    Globally this is itself a conserved quantity, zero exactly on the
    codimension-one set containing the trisectrix choreography; there the two
    integrals are in involution along the orbit without commuting as
    phase-space functions.
    """
    u = _uvec(state)
    m, w = params.m, params.omega
    return float(u[_PU3X] * u[_PU3Y] / m + 4.0 * m * w * w * u[_U3X] * u[_U3Y])


# Bracket relations verified numerically (Poisson algebra of the 4D block).
SO4_CLOSURE = (
    ("L12", "L13", "L23"),
    ("L12", "L14", "L24"),
    ("L13", "L14", "L34"),
)
COMMUTING_PAIRS = (
    ("I11", "I22"), ("I11", "I33"), ("I22", "I33"),
    ("H4D", "L12"), ("H4D", "L13"), ("H4D", "L14"),
    ("H4D", "L23"), ("H4D", "L24"), ("H4D", "L34"),
    ("H4D", "I11"), ("H4D", "I22"), ("H4D", "I33"), ("H4D", "I44"),
)
ROTATION_COUPLING_TRIPLES = (
    ("I11", "L12", "I12"),
    ("I11", "L13", "I13"),
    ("I11", "L14", "I14"),
    ("I22", "L23", "I23"),
    ("I22", "L24", "I24"),
    ("I33", "L34", "I34"),
)


@dataclass(frozen=True)
class CouplingMeasurement:
    """Measured proportionality {I_ii, L_ij} = constant * I_ij."""

    constant: float
    max_deviation: float
    n_samples: int


def measure_rotation_coupling(states, params: SystemParams, h: float = 1e-4,
                              min_abs: float = 0.05) -> CouplingMeasurement:
    """Measure the coupling constant from the bracket oracle across states.

    Ratios are collected wherever |I_ij| is comfortably away from zero; the
    constant is their median and max_deviation the worst spread around it.
    The value is intentionally measured rather than assumed.
    """
    ratios = []
    for state in states:
        for ii, lij, iij in ROTATION_COUPLING_TRIPLES:
            denom = eval_integral(iij, state, params)
            if abs(denom) < min_abs:
                continue
            ratios.append(poisson_bracket(ii, lij, state, params, h) / denom)
    if not ratios:
        raise InvalidInputError("no usable samples; provide states with nonzero I_ij")
    ratios = np.array(ratios)
    constant = float(np.median(ratios))
    return CouplingMeasurement(constant=constant,
                               max_deviation=float(np.max(np.abs(ratios - constant))),
                               n_samples=len(ratios))

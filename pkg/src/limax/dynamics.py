"""Fixed-step RK4 integration of the Cartesian equations of motion.

This is the numerical oracle for the closed-form results elsewhere in the
package, so it works from the pairwise forces alone: no normal-mode split, no
matrix exponential, no reuse of the analytic solution.  A Cython kernel
(_speedups) carries the inner loop when available; a NumPy fallback with the
same step arithmetic is selected otherwise, or when LIMAX_PURE_PYTHON is set.
"""

import math
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import InvalidInputError, LimaxError, PhaseState, SystemParams

try:
    from . import _speedups
except ImportError:
    _speedups = None


class DivergenceError(LimaxError):
    """Integration produced a non-finite state."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


# Coupling pattern per body: the two adjacent bodies and the opposite one.
_ADJ1 = np.array([1, 0, 1, 0])
_ADJ2 = np.array([3, 2, 3, 2])
_OPP = np.array([2, 3, 0, 1])


def forces(state: PhaseState, params: SystemParams) -> np.ndarray:
    """Force on each body, shape (4, 2).

    Each body is pulled toward its two neighbours in the cycle and pushed
    from the opposite body at half strength; the pairwise-difference form
    makes the total vanish identically.
    """
    r = state.r
    mw2 = params.m * params.omega ** 2
    return -mw2 * ((r - r[_ADJ1]) + (r - r[_ADJ2]) - 0.5 * (r - r[_OPP]))


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed step size and step count for one integration run."""

    dt: float
    n_steps: int

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError(f"dt must be positive and finite, got {self.dt}")
        if not (isinstance(self.n_steps, (int, np.integer)) and self.n_steps >= 0):
            raise InvalidInputError(f"n_steps must be a non-negative integer, got {self.n_steps}")


class Trajectory:
    """Time-ordered phase-space samples.

    Stored compactly as a times vector and an (N, 16) block of flat states;
    `samples` materializes the (t, PhaseState) list on first use.
    """

    def __init__(self, times, states):
        times = np.asarray(times, dtype=float)
        states = np.asarray(states, dtype=float)
        if times.ndim != 1 or times.size == 0:
            raise InvalidInputError("trajectory needs at least one sample")
        if states.shape != (times.size, 16):
            raise InvalidInputError(
                f"states must have shape ({times.size}, 16), got {states.shape}")
        if times[0] != 0.0:
            raise InvalidInputError(f"first sample must sit at t = 0, got {times[0]}")
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise InvalidInputError("sample times must increase strictly")
        if not np.all(np.isfinite(times)):
            raise InvalidInputError("sample times must be finite")
        self.times = times
        self.states = states

    @classmethod
    def from_samples(cls, samples):
        pairs = list(samples)
        if not pairs:
            raise InvalidInputError("trajectory needs at least one sample")
        times = np.array([t for t, _ in pairs], dtype=float)
        states = np.stack([s.flat() for _, s in pairs])
        return cls(times, states)

    def __len__(self):
        return self.times.size

    def positions(self) -> np.ndarray:
        """(N, 4, 2) view of the body positions."""
        return self.states[:, :8].reshape(len(self), 4, 2)

    def momenta(self) -> np.ndarray:
        return self.states[:, 8:].reshape(len(self), 4, 2)

    def state_at(self, k: int) -> PhaseState:
        return PhaseState.from_flat(self.states[k])

    @property
    def final_state(self) -> PhaseState:
        return self.state_at(len(self) - 1)

    @cached_property
    def samples(self):
        """Ordered list of (t, PhaseState) pairs."""
        return [(float(t), PhaseState.from_flat(row))
                for t, row in zip(self.times, self.states)]


def backend_name() -> str:
    """Active integrator backend: "compiled" when the Cython kernel imported
    and LIMAX_PURE_PYTHON is unset, else "python"."""
    if _speedups is not None and not os.environ.get("LIMAX_PURE_PYTHON"):
        return "compiled"
    return "python"


def _deriv(y, inv_m, mw2):
    r = y[:8].reshape(4, 2)
    dy = np.empty(16)
    dy[:8] = y[8:] * inv_m
    f = -mw2 * ((r - r[_ADJ1]) + (r - r[_ADJ2]) - 0.5 * (r - r[_OPP]))
    dy[8:] = f.ravel()
    return dy


def _rk4_python(y0, m, omega, dt, n_steps, out):
    """NumPy twin of the compiled kernel: fills out[k] with the state after k
    steps, returns -1 or the first step index holding a non-finite value."""
    inv_m = 1.0 / m
    mw2 = m * omega * omega
    half = dt / 2.0
    sixth = dt / 6.0
    y = np.array(y0, dtype=float)
    out[0] = y
    # overflow is an anticipated exit condition here, caught by the finite
    # check, so keep numpy quiet about it
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            k1 = _deriv(y, inv_m, mw2)
            k2 = _deriv(y + half * k1, inv_m, mw2)
            k3 = _deriv(y + half * k2, inv_m, mw2)
            k4 = _deriv(y + dt * k3, inv_m, mw2)
            y = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            out[step] = y
            if not np.all(np.isfinite(y)):
                return step
    return -1


def integrate(state: PhaseState, params: SystemParams, config: IntegratorConfig,
              backend=None) -> Trajectory:
    """Integrate forward n_steps of size dt from the given state.

    Raises DivergenceError (with the offending step index) if the state ever
    goes non-finite.
    """
    name = backend or backend_name()
    y0 = state.flat()
    out = np.empty((config.n_steps + 1, 16))
    if name == "compiled":
        if _speedups is None:
            raise InvalidInputError("compiled backend requested but the extension is not built")
        bad = _speedups.rk4_trajectory(y0, params.m, params.omega,
                                       config.dt, config.n_steps, out)
    elif name == "python":
        bad = _rk4_python(y0, params.m, params.omega, config.dt, config.n_steps, out)
    else:
        raise InvalidInputError(f"unknown backend {name!r}; use 'compiled' or 'python'")
    if bad >= 0:
        raise DivergenceError(
            f"integration diverged at step {bad} (t = {bad * config.dt:g}); "
            "reduce dt", step=int(bad))
    times = config.dt * np.arange(config.n_steps + 1)
    return Trajectory(times, out)

import numpy as np
import pytest

from limax.core import PhaseState, SystemParams


@pytest.fixture
def params():
    return SystemParams()


@pytest.fixture
def odd_params():
    """Parameters away from 1 so dropped m or omega factors show up."""
    return SystemParams(m=1.7, omega=0.9)


@pytest.fixture
def generic_state():
    """Two pair choreographies with varying separations, no special balance."""
    return PhaseState(
        [(1.0, 1.0), (0.0, 1.0), (0.0, -1.0), (-1.0, -1.0)],
        [(0.0, 1.5), (-0.5, -1.0), (0.0, 0.5), (0.5, -1.0)])


@pytest.fixture
def rigid_pairs_state():
    """Both pairs on circles with constant but different separations."""
    return PhaseState(
        [(2.5, 0.0), (-0.5, 1.0), (-1.5, 0.0), (-0.5, -1.0)],
        [(0.0, 2.0), (1.0, 0.0), (0.0, -2.0), (-1.0, 0.0)])


@pytest.fixture
def choreography_state():
    """Four-body choreography without the extra rigid-pair symmetry."""
    return PhaseState(
        [(0.5, -2.0), (0.75, 1.5), (-2.0, 0.0), (0.75, 0.5)],
        [(0.0, 1.5), (-1.25, 0.0), (0.0, 0.5), (1.25, -2.0)])


def random_states(seed, count, scale=1.0):
    """Deterministic batch of CM-frame states for property checks."""
    from limax.core import random_cm_state
    rng = np.random.default_rng(seed)
    return [random_cm_state(rng, scale) for _ in range(count)]

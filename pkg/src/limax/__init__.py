"""Planar four-body oscillator chain with quadratic pair interactions.

Everything here orbits one fact: in the center-of-mass frame the dynamics
separates into harmonic modes at omega and 2*omega, so trajectories close,
eleven independent quantities are conserved, and special initial conditions
make all four bodies chase each other around a single closed curve.  The
package provides the exact propagator, the coordinate maps, the integrals
and their Poisson brackets, orbit classification, the fragmentation and
fusion boosts, and an independent numerical oracle to check it all against.
"""

from .core import (
    InvalidInputError,
    JacobiState,
    LimaxError,
    NotAChoreographyError,
    NotCMFrameError,
    PhaseState,
    SystemParams,
    UState,
    cm_project,
    from_jacobi,
    from_u,
    potential_energy,
    random_cm_state,
    to_jacobi,
    to_u,
    total_hamiltonian,
)
from .analytic import (
    OrbitCoeffs,
    choreography_orbit_point,
    orbit_family_point,
    propagate,
    relative_propagate,
    sample,
    time_delay,
    trisectrix_initial_state,
    trisectrix_point,
)
from .dynamics import (
    DivergenceError,
    IntegratorConfig,
    Trajectory,
    backend_name,
    forces,
    integrate,
)
from .integrals import (
    GLOBAL_INTEGRALS,
    INTEGRAL_NAMES,
    bracket_L_H3x,
    eval_integral,
    integral_drift,
    measure_rotation_coupling,
    poisson_bracket,
    poisson_bracket_closed,
)
from .scenarios import (
    BoostEvent,
    FusionBoosts,
    TrajectoryClass,
    apply_fusion_boosts,
    apply_pair_boost,
    check_choreography_conditions,
    check_rigid_pair,
    classify,
    fragmentation_scenario,
    fusion_boosts,
)

__version__ = "0.1.0"

"""Symplectic, energy-conserving partitioned Runge-Kutta methods for
Hamiltonian systems with holonomic constraints.

Each step uses a one-parameter family of symplectic, constraint-preserving
coefficient pairs and picks the parameter so that the energy is conserved.
"""

from .alpha_search import AlphaSearchPolicy, alpha_scaling_probe, find_alpha_star, integrate
from .diagnostics import (
    ConvergenceReport,
    convergence_study,
    errors_at_T,
    invariant_summary,
    make_reference,
    observed_orders,
)
from .errors import AlphaPRKError
from .problems import (
    HamiltonianProblem,
    PhaseState,
    QuadraticInvariant,
    get_problem,
    pendulum_initial_state,
    pendulum_problem,
    satellites_initial_state,
    satellites_problem,
)
from .stepper import StepperOptions, StepRecord, prk_step
from .tableaus import (
    FamilyId,
    TableauPair,
    build_alpha_rattle,
    build_lobatto3,
    build_lobatto3_classical,
    build_tableau,
    build_wtransform2,
    check_conditions,
)
from .trajectory import TrajectoryLog

__version__ = "0.1.0"

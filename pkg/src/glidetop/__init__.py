"""Heavy symmetric top gliding on a horizontal plane with sliding friction."""
from .analysis import (ConvergenceCriteria, ConvergenceResult, StabilityReport,
                       classify_stability, detect_convergence, e2_boundary_derivative,
                       effective_energy, launch_state, matched_precession_rate)
from .dynamics import (derivatives_euler, derivatives_vector, euler_to_vector,
                       normal_force_euler, normal_force_vector, total_energy,
                       vector_to_euler)
from .errors import (ChartSingularity, ConfigError, DegenerateDenominator, GlideTopError,
                     RootFindFailure)
from .friction import CallableFriction, ConstantFriction, FrictionModel
from .integrator import IntegratorConfig, integrate, integrate_fixed_rk4, step_fixed_rk4
from .params import EPS_DEN, EPS_SING, PhysicalParams
from .state import EulerRate, EulerState, VectorState
from .trajectory import Limit, Termination, TerminationKind, Trajectory

__version__ = "0.1.0"

"""Small-amplitude periodic orbits of the forced damped pendulum.

The package computes the first-order averaged system of the weakly forced,
lightly damped pendulum by adaptive quadrature, checks the existence
conditions for a small periodic orbit, and independently verifies the
prediction by exact integration and Newton shooting on the period map.
"""

from .averaging import (
    AveragedSystem,
    ExistenceVerdict,
    average_over_period,
    averaged_forcing,
    averaged_matrix,
    build_averaged_system,
    constant_coefficient_det,
    existence_check,
    find_averaged_zero,
    first_order_field,
)
from .expressions import (
    EvaluationFault,
    Expr,
    ExpressionError,
    LexicalError,
    ParseError,
    evaluate,
    free_variables,
    parse,
    print_canonical,
)
from .newton import (
    MaxIterationsError,
    NewtonError,
    NewtonResult,
    SingularJacobianError,
    damped_newton,
    forward_jacobian,
)
from .odes import (
    Chart,
    IntegrationError,
    NonFiniteStateError,
    StepUnderflowError,
    Trajectory,
    convert_state,
    from_standard_form,
    fundamental_matrix,
    integrate,
    pendulum_rhs,
    rescaled_rhs,
    rhs_for_chart,
    standard_form_rhs,
    to_standard_form,
)
from .orbits import (
    ConvergenceReport,
    ConvergenceRow,
    PeriodicOrbit,
    SweepError,
    convergence_study,
    find_periodic,
    monodromy_matrix,
    stroboscopic_map,
)
from .pendulum import (
    Classification,
    CoefficientEvaluationError,
    InconsistentPeriodsError,
    PendulumParams,
    PerturbationProfile,
    RationalPeriod,
    build_profile,
    classify_equilibrium,
    common_period,
    eigenvalues,
    extract_coefficients,
)
from .quadrature import QuadratureError, adaptive_quad

__version__ = "0.1.0"

"""Stäckel separable systems, their control matrices and bi-Hamiltonian lifts,
with numerical certification of the structural identities."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    BadPartition, DomainError, ExpressionSyntaxError, InputError, IntegrationAborted,
    NumericalError, ParseError, QuadratureFailure, SingularJacobian, SingularMatrix,
    TurningPoint, UnknownVariable, ValidationError,
)
from .expr import Expression, differentiate, equal_on_samples, parse, to_text  # noqa: E402
from .phase import CoordinateChart, PhasePoint, apply_chart, chart_jacobian  # noqa: E402
from .stackel import (  # noqa: E402
    SeparationSystem, hamiltonian_gradients_at, hamiltonians_at, stackel_matrix_at,
)
from .control import ControlMatrix, control_matrix_at, control_matrix_cramer_at  # noqa: E402
from .lift import ExtendedSystem  # noqa: E402
from .corpus import benenti, cubic_class, example1, example2, example3, exponential_class, multi_block  # noqa: E402
from .specfile import dump_spec, load_spec, parse_spec  # noqa: E402

"""Sample-based prophet secretary and free-order stopping policies."""
from .distributions import DiscreteDistribution, Instance, ModelKind, exact_expected_max
from .errors import (
    BudgetError,
    InstanceFormatError,
    ParameterError,
    PolicyCoverageError,
    PreconditionError,
    SizeGuardError,
    SolverError,
)

__version__ = "0.1.0"

"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument lies outside its admissible range."""


class BudgetError(ValueError):
    """Not enough samples for the requested estimator."""


class SizeGuardError(ValueError):
    """Instance too large for an exponential-size construction."""


class PreconditionError(ValueError):
    """Inputs violate the premise of a check."""


class InstanceFormatError(ValueError):
    """Malformed instance or sample file."""


class SolverError(RuntimeError):
    """LP solver returned something inconsistent with the program."""


class PolicyCoverageError(LookupError):
    """A policy was asked about a state it does not define."""

"""Exception hierarchy shared by every module.

All errors derive from :class:`ZenoHeomError`; the ones that correspond to
bad caller input also derive from :class:`ValueError` so generic handlers
keep working.
"""


class ZenoHeomError(Exception):
    """Base class for all package errors."""


class ContractViolation(ZenoHeomError, ValueError):
    """Operands violate an operation's precondition (shape, Hermiticity...)."""


class DomainError(ZenoHeomError, ValueError):
    """Argument outside the mathematical domain of the operation."""


class SingularParameterError(ZenoHeomError, ValueError):
    """Parameters hit a pole of an analytic expression."""


class AccuracyError(ZenoHeomError):
    """Quadrature did not reach the requested accuracy.

    ``estimate`` carries the achieved absolute error estimate.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class CapacityError(ZenoHeomError):
    """Hierarchy layout would exceed the configured memory budget."""


class StepSizeError(ZenoHeomError, ValueError):
    """Integrator step violates the stability guard."""

    def __init__(self, message, suggested_dt=None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class DivergenceError(ZenoHeomError):
    """Non-finite values appeared during integration."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class IntegrityError(ZenoHeomError):
    """A conserved quantity (trace, Hermiticity, positivity) drifted."""


class ConvergenceError(ZenoHeomError):
    """Hierarchy depth scan reached ``L_max`` without meeting the tolerance."""

    def __init__(self, message, last_delta=None, tau=None, partial=None):
        super().__init__(message)
        self.last_delta = last_delta
        self.tau = tau
        self.partial = partial


class NoZenoRegimeError(ZenoHeomError):
    """The short-time slope of the decay rate is not positive."""


class ConfigError(ZenoHeomError, ValueError):
    """Configuration text failed validation; ``problems`` lists every issue."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))

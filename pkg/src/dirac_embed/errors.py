"""Exception hierarchy shared by the integrators, constructors and checks."""


class DiracError(Exception):
    """Base class for all package errors."""


class DomainError(DiracError, ValueError):
    """A potential was evaluated outside the interval its segments cover."""


class ParameterError(DiracError, ValueError):
    """A constructor or check received parameters outside its contract."""


class AdmissibilityError(ParameterError):
    """A bump violates ``x0 - b > K_gap``."""


class DegenerateTargetError(ParameterError):
    """The locked eigenvalue coincides with a target (or targets repeat)."""


class ConsistencyError(ParameterError):
    """A schedule does not match the target set it is used with."""


class ScheduleError(DiracError):
    """The growth budget ``h`` never admits the requested number of targets."""


class PreconditionError(DiracError):
    """A verification precondition does not hold for the given potential."""


class StiffnessError(DiracError, RuntimeError):
    """Step size underflow in the adaptive integrator."""


class RangeOverflowError(DiracError, OverflowError):
    """``u**2 + v**2`` left floating point range in the direct integrator."""

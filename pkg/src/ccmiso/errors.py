"""Exception types shared across the package.

The CLI maps these onto exit codes: parameter problems exit with 2,
solver problems with 3.
"""


class CcmisoError(Exception):
    """Base class for all package errors."""


class ParameterError(CcmisoError):
    """A system parameter or argument violates its documented precondition."""


class DimensionError(ParameterError):
    """Vector or matrix shapes do not line up."""


class DegenerateChannelError(CcmisoError):
    """Channel vectors are linearly dependent where independence is required."""


class NumericalError(CcmisoError):
    """An iterative numeric routine failed to converge."""


class SchedulingBugError(CcmisoError):
    """Internal bookkeeping of the delivery schedule went inconsistent.

    Raised for example when a subfile is asked for more fresh mini-files
    than exist. Valid schedules never trigger this.
    """


class SolverFailure(CcmisoError):
    """The conic solver reported neither an optimum nor infeasibility."""


class InfeasibleDesignError(SolverFailure):
    """No beamformer design could be found after all restarts."""

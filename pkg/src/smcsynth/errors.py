"""Exception types shared across the package."""


class SmcSynthError(Exception):
    """Base class for all package errors."""


class InvalidInput(SmcSynthError):
    """Malformed or non-finite input data."""


class InvalidParameter(SmcSynthError):
    """A scalar tuning parameter is out of its admissible range."""


class InvalidSimplexPoint(SmcSynthError):
    """Weights are negative or do not sum to one."""


class NotPositiveDefinite(SmcSynthError):
    """Cholesky factorization broke down on an indefinite matrix."""


class SynthesisInfeasible(SmcSynthError):
    """The synthesis SDP has no feasible point; carries solver diagnostics."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class NumericalFailure(SmcSynthError):
    """The solver or a recovery step failed to converge."""

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution


class SimulationDiverged(SmcSynthError):
    """Integration produced non-finite states; carries the partial trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace

"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class GraphHeatError(Exception):
    """Base class for all library errors."""


class ValidationError(GraphHeatError, ValueError):
    """Bad input: wrong shape, out-of-range index, malformed file."""


class NumericalError(GraphHeatError, ArithmeticError):
    """A computation failed to converge or produced non-finite values."""


class ConvergenceError(NumericalError):
    """Iterative eigensolver did not reach the residual target."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DivergenceError(NumericalError):
    """Explicit time stepping blew up."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class DisconnectedGraphError(NumericalError):
    """Operation requires a connected graph."""

    def __init__(self, n_components):
        super().__init__(
            f"graph is disconnected: {n_components} components "
            f"(the Fiedler vector needs a connected graph)"
        )
        self.n_components = n_components

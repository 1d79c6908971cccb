"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument is outside its admissible range."""


class HermitianError(ValueError):
    """A matrix that must be Hermitian is not."""

    def __init__(self, max_asymmetry, tol):
        self.max_asymmetry = float(max_asymmetry)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not Hermitian: max |Z - Z^H| entry {self.max_asymmetry:.3e} "
            f"exceeds tolerance {self.tol:.1e}"
        )


class CapacityError(RuntimeError):
    """Requested dense object exceeds the configured size budget."""


class FormatError(ValueError):
    """A file does not follow the expected text format."""


class ConvergenceError(RuntimeError):
    """An iterative routine stopped before meeting its tolerance."""

    def __init__(self, message, estimate=None, residual=None, iterations=None):
        self.estimate = estimate
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class HypothesisViolation(RuntimeError):
    """A check was refused because its preconditions do not hold."""

    def __init__(self, message, quantity=None, value=None, limit=None):
        self.quantity = quantity
        self.value = value
        self.limit = limit
        super().__init__(message)


class InvariantError(ValueError):
    """A constructed object violates one of its invariants."""

    def __init__(self, message, index=None):
        self.index = index
        super().__init__(message)

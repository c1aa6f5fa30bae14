"""Exception types shared across the package."""


class ScenarioError(ValueError):
    """Malformed scenario data: bad settings, objective terms or file schema."""


class CapExceededError(RuntimeError):
    """An exact enumeration would exceed its configured size cap."""


class RealizationError(ValueError):
    """A quantum realization violates its structural invariants."""


class SolverError(RuntimeError):
    """Solver failure (non-convergence, infeasible input, size cap).

    ``solution`` carries the best iterate when one exists, so callers can
    still inspect or report a partial result.
    """

    def __init__(self, message, solution=None):
        super().__init__(message)
        self.solution = solution

"""Exception types shared across the engine."""


class HedgeDeskError(Exception):
    """Base class for all engine errors."""


class DomainError(HedgeDeskError, ValueError):
    """A numeric argument is outside its valid domain."""


class QuoteError(HedgeDeskError, ValueError):
    """A quote, instrument, or quote file is malformed or inconsistent."""


class DepthError(HedgeDeskError, ValueError):
    """A requested trade size exceeds the quoted depth."""


class ModelError(HedgeDeskError, ValueError):
    """The probabilistic view model or grid parameters are invalid."""


class AssemblyError(HedgeDeskError, ValueError):
    """The optimization problem cannot be assembled from the given inputs."""


class SolverFailure(HedgeDeskError):
    """The solver could not produce a certified optimum.

    Carries the best result found (possibly None) in ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class InfeasibleHedge(HedgeDeskError):
    """No portfolio within the depth boxes dominates the claim.

    ``violating_region`` lists underlying levels where dominance fails even
    at the best achievable slack, ``best_slack``.
    """

    def __init__(self, message, violating_region=(), best_slack=None):
        super().__init__(message)
        self.violating_region = tuple(violating_region)
        self.best_slack = best_slack


class UnpriceableClaim(HedgeDeskError):
    """Indifference price bracketing failed; claim risk exceeds market capacity."""


class UnsupportedClaim(HedgeDeskError, ValueError):
    """The requested operation is undefined for this claim kind."""

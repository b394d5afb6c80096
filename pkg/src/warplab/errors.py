"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class ApplicabilityError(RuntimeError):
    """A pathway was requested whose threshold condition fails."""


class StepSizeError(RuntimeError):
    """The Euler drift moved more than one length unit in one step."""


class ResolutionError(RuntimeError):
    """Grid refinement did not converge to the requested agreement."""


class DegenerateInputError(ValueError):
    """Test function (or family) is degenerate for the requested functional."""


class BracketError(RuntimeError):
    """Root/inverse bracketing exhausted its expansion budget."""


class QuadratureError(RuntimeError):
    """Quadrature could not be evaluated (overflow or invalid integrand)."""


class ConfigError(ValueError):
    """Malformed or invalid configuration input."""

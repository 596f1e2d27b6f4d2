"""Exception types shared across the package."""


class RwosError(Exception):
    """Base class for all package-specific errors."""


class DomainSyntaxError(RwosError):
    """Malformed domain-spec document (JSON syntax, missing keys, bad types)."""


class DomainValidationError(RwosError):
    """Structurally valid document describing an invalid domain."""


class GeometryError(RwosError):
    """Geometric operation failed (degenerate input, piece through an
    inversion center, reflection cap exceeded)."""


class SingularityError(GeometryError):
    """Evaluation at a singular point of a map (e.g. an inversion center)."""


class NonConvergenceError(RwosError):
    """A walker or an iteration exceeded its step budget."""


class IllConditionedError(RwosError):
    """A ratio estimate has a denominator indistinguishable from zero."""


class ConfigurationError(RwosError):
    """Invalid solver configuration (stencil outside the domain, bad spacing)."""

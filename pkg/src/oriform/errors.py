"""Exception hierarchy shared by all oriform modules."""


class OriformError(Exception):
    """Base class for all library-specific errors."""


class DimensionMismatch(OriformError):
    """Operands live in different dimensions."""


class DegenerateInput(OriformError):
    """Gram-Schmidt input vectors are dependent or nearly dependent."""


class DegenerateLimit(OriformError):
    """Projected consensus limits are zero or dependent; no orientation
    estimate exists for this initialization."""


class InvalidInitialization(OriformError):
    """Auxiliary-variable initialization violates the convergence
    condition; the run cannot be certified."""


class MissingEdgeMeasurement(OriformError):
    """A graph edge has no relative-orientation measurement."""


class InconsistentRelativeOrientation(OriformError):
    """Measurements on a bidirectional edge pair are not mutual
    transposes."""


class NonFiniteState(OriformError):
    """Integration produced a non-finite or diverging state."""


class ParseError(OriformError):
    """Scenario file is unreadable or not valid JSON."""


class SchemaError(OriformError):
    """Scenario file parses but has missing, unknown, or mistyped
    fields."""


class InvariantViolation(OriformError):
    """Scenario contents violate a domain invariant (improper rotation,
    nonpositive gain, bad graph, ...)."""

"""Exception hierarchy shared by every module."""


class NormError(ValueError):
    """Base class for invalid norm specifications and inputs."""


class NormSyntaxError(NormError):
    """Malformed norm expression text.

    ``position`` is the 0-based character offset where parsing failed.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class NormSemanticError(NormError):
    """Well-formed expression whose parameters do not define a norm."""


class DimensionError(NormError):
    """Vector or child dimensions do not agree."""


class NotDualizableError(NormError):
    """No closed-form dual exists for this variant."""


class DomainError(ValueError):
    """Mathematical domain violation, e.g. a zero vector where x != 0 is required."""

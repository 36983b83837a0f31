"""Exception types shared across the package."""


class NestedSimplexError(ValueError):
    """Base class for all package errors."""


class InvalidInputError(NestedSimplexError):
    """Malformed, non-finite or out-of-domain input."""


class InvalidStateError(NestedSimplexError):
    """A 4x4 matrix that is not a quantum state (not PSD) where one is required."""


class NotContainedError(NestedSimplexError):
    """The ellipsoid pokes out of the circumscribing sphere."""

    def __init__(self, max_radius: float, big_radius: float, label: str = "ellipsoid"):
        self.max_radius = max_radius
        self.big_radius = big_radius
        self.label = label
        super().__init__(
            f"{label} not contained: max radius {max_radius:.12g} > R = {big_radius:.12g}"
        )

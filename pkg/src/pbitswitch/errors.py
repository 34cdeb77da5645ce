"""Exception types shared across the package."""


class LayoutError(ValueError):
    """Subsystem labels or dimensions do not line up."""


class PreconditionError(ValueError):
    """A numeric precondition (Hermiticity, positivity, trace) failed."""


class DimensionCapError(ValueError):
    """A construction would exceed the configured dimension cap."""

    def __init__(self, required, allowed, what="operator"):
        self.required = required
        self.allowed = allowed
        super().__init__(
            f"{what} needs dimension {required} per side, cap is {allowed}"
        )

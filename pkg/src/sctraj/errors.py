"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument lies outside the domain an operation accepts."""


class NoExitError(ParameterError):
    """A trajectory suffix never leaves the ball it started in."""


class StructureError(RuntimeError):
    """A dynamic-forest operation would break the forest invariants."""


class GuardError(ValueError):
    """An oracle was asked to run on an instance that is too large."""

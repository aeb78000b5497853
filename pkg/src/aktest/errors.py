"""Exception types shared across the package."""


class InvalidInput(ValueError):
    """A precondition on user-supplied data or configuration failed."""


class CapExceeded(InvalidInput):
    """An exact-search size cap was exceeded (oracle inputs too large)."""

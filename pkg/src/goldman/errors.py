"""Exception types shared across the package."""


class GoldmanError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateElement(GoldmanError, ValueError):
    """An element is too close to +1 or -1 for log / variation / flow."""

    def __init__(self, message, name=None):
        super().__init__(message)
        self.name = name


class TraceMismatch(GoldmanError, ValueError):
    pass


class ArityMismatch(GoldmanError, ValueError):
    pass


class NotInVariety(GoldmanError, ValueError):
    pass


class SamplerStuck(GoldmanError, RuntimeError):
    pass


class Inconclusive(GoldmanError):
    """Orbit comparison found a multi-dimensional intertwiner space but no witness."""


class SpecMismatch(GoldmanError, ValueError):
    pass

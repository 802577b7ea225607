"""Exception hierarchy for isoflow."""


class IsoflowError(Exception):
    pass


class UnsupportedFamilyParams(IsoflowError, ValueError):
    pass


class NonpositiveMultiplicity(IsoflowError, ValueError):
    pass


class OutsideChamber(IsoflowError, ValueError):
    pass


class WallContact(IsoflowError, ValueError):
    """A wall gap that enters a denominator is (numerically) zero."""


class NotOnSphere(IsoflowError, ValueError):
    pass


class StepUnderflow(IsoflowError, RuntimeError):
    pass


class NotCollapsed(IsoflowError, RuntimeError):
    pass


class UnsupportedFamily(IsoflowError, ValueError):
    pass


class NotInImage(IsoflowError, ValueError):
    pass


class OutOfDomain(IsoflowError, ValueError):
    pass


class UnsupportedG(IsoflowError, ValueError):
    pass


class NoConvergence(IsoflowError, RuntimeError):
    def __init__(self, msg, iterates=None):
        super().__init__(msg)
        self.iterates = iterates or []


class ConfigError(IsoflowError, ValueError):
    pass


class MultipleRootAtBoundary(IsoflowError, ValueError):
    """Recovered point lies on the chamber boundary (a repeated or zero root)."""

    def __init__(self, msg, point=None):
        super().__init__(msg)
        self.point = point

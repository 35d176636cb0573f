"""Exception types raised by the library."""


class DualOrliczError(Exception):
    """Base class for all library errors."""


class InvalidPolytope(DualOrliczError):
    pass


class NoBoundingFacet(InvalidPolytope):
    """No facet normal has a positive inner product with the query direction."""


class Unbounded(InvalidPolytope):
    pass


class UnsupportedDimension(DualOrliczError):
    pass


class DegenerateVertex(DualOrliczError):
    pass


class DegenerateFacet(DualOrliczError):
    pass


class TailNotIntegrable(DualOrliczError):
    """A density has no tail bounds, so its radial tail cannot be truncated safely."""


class ToleranceNotMet(DualOrliczError):
    pass


class NonPositiveSupport(DualOrliczError):
    pass


class BisectionBracketFailure(DualOrliczError):
    pass


class MeasureConcentrated(DualOrliczError):
    """The target measure is concentrated on a closed hemisphere."""

    def __init__(self, message, worst=None, witness=None):
        super().__init__(message)
        self.worst = worst
        self.witness = witness


class NonIntegrableDensity(DualOrliczError):
    pass

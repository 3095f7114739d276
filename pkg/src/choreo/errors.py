"""Exception hierarchy.

Errors are grouped so the scenario runner can map them to exit codes:
``DiscriminantHit`` -> 2, ``TrackingFailure`` -> 3, ``ConfigError`` -> 4.
"""

from __future__ import annotations


class ChoreoError(Exception):
    """Base class for every error raised by this package."""


# algebra
class DegenerateLine(ChoreoError):
    pass


class NotARoot(ChoreoError):
    pass


class UnpairedPoint(ChoreoError):
    pass


# topology
class SingularCurve(ChoreoError):
    pass


class SeedMiss(ChoreoError):
    pass


class OffCurve(ChoreoError):
    pass


class Ambiguous(ChoreoError):
    pass


class NotInterior(ChoreoError):
    pass


class CoveringDegree(ChoreoError):
    pass


# family
class NotOnCurve(ChoreoError):
    pass


class ProportionalForms(ChoreoError):
    pass


class NotClosed(ChoreoError):
    pass


class TooCoarse(ChoreoError):
    pass


# tracking
class NonSimpleStart(ChoreoError):
    pass


class DiscriminantHit(ChoreoError):
    """The loop left the space of simple real divisors at parameter ``t``."""

    def __init__(self, t: float, reason: str = ""):
        self.t = float(t)
        self.reason = reason
        super().__init__(f"discriminant hit at t={self.t:.6g}" + (f": {reason}" if reason else ""))


class TrackingFailure(ChoreoError):
    pass


class CorrectorDiverged(TrackingFailure):
    def __init__(self, t: float, j: int):
        self.t = float(t)
        self.j = int(j)
        super().__init__(f"corrector diverged at t={self.t:.6g} for point {self.j}")


class MatchAmbiguity(TrackingFailure):
    def __init__(self, t: float):
        self.t = float(t)
        super().__init__(f"ambiguous point matching at t={self.t:.6g}")


class NotCubic(ChoreoError):
    pass


# choreography
class NonIntegerWinding(TrackingFailure):
    pass


class MatchFailure(TrackingFailure):
    pass


class UnoccupiedNonzero(ChoreoError):
    pass


class EndpointMismatch(ChoreoError):
    pass


# cli
class ConfigError(ChoreoError):
    pass


class UnknownPreset(ConfigError):
    pass

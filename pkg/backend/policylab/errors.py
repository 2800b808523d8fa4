"""Exception hierarchy for the policy choice laboratory."""

from __future__ import annotations


class PolicyLabError(RuntimeError):
    """Base class for errors raised by :mod:`policylab`."""


class InstanceError(PolicyLabError, ValueError):
    """Raised when a parameter vector is not a valid problem instance."""


class TooFewArmsError(InstanceError):
    """Raised when fewer than two arms are supplied."""


class OutOfRangeError(InstanceError):
    """Raised when a success probability lies outside the open unit interval."""


class TiedBestArmError(InstanceError):
    """Raised when the best arm is not unique."""


class InvalidStatsError(PolicyLabError, ValueError):
    """Raised when assignment or success counts are inconsistent."""


class DegenerateBeliefError(PolicyLabError):
    """Raised when every probability-of-best entry is exactly 0 or 1."""


class StateSpaceTooLargeError(PolicyLabError):
    """Raised when an exact solve would exceed the configured state cap."""


class PathExplosionError(PolicyLabError):
    """Raised when exhaustive outcome enumeration exceeds its path budget."""


class ExponentFitError(PolicyLabError):
    """Raised when too few grid points remain to fit a decay exponent."""


class AllocationSolveError(PolicyLabError):
    """Raised when the optimal allocation cannot be resolved to the required precision."""


__all__ = [
    "PolicyLabError",
    "InstanceError",
    "TooFewArmsError",
    "OutOfRangeError",
    "TiedBestArmError",
    "InvalidStatsError",
    "DegenerateBeliefError",
    "StateSpaceTooLargeError",
    "PathExplosionError",
    "ExponentFitError",
    "AllocationSolveError",
]

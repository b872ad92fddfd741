"""Semantic exception hierarchy.

Every error raised by this package derives from :class:`PslocalError`, so
callers can catch domain failures without masking programming errors.
"""


class PslocalError(Exception):
    """Base class for all domain errors."""


class SignalingInput(PslocalError):
    """A correlation table violates the no-signaling conditions exactly."""


class NotAProbability(PslocalError):
    """A reconstructed or supplied entry lies outside [0, 1]."""


class EfficiencyMismatch(PslocalError):
    """An a-priori table does not satisfy the detection-efficiency constraints."""


class ZeroEfficiency(PslocalError):
    """Post-selection requested with a vanishing efficiency product."""


class UnknownName(PslocalError):
    """Unknown named correlation."""


class DimensionMismatch(PslocalError):
    """Objects defined over incompatible scenarios or dimensions."""


class SizeLimit(PslocalError):
    """A combinatorial enumeration exceeds its configured cap."""


class BudgetExceeded(PslocalError):
    """A budgeted computation ran out of its time allowance."""


class Unbounded(PslocalError):
    """A linear program is unbounded (malformed H-representation)."""


class Infeasible(PslocalError):
    """A linear program has no feasible point."""


class ThresholdViolated(PslocalError):
    """An efficiency pair lies outside the regime required by the operation."""


class PreconditionFailed(PslocalError):
    """A documented precondition does not hold for the given arguments."""


class IdentityFailed(PslocalError):
    """An exact algebraic identity check failed (transcription bug)."""


class OffSlice(PslocalError):
    """A point does not lie in the affine hull of the requested 2-D slice."""


class TooCoarse(PslocalError):
    """Rationalization with the given denominator cap distorts the table."""


class InvalidSetup(PslocalError):
    """A quantum measurement setup fails its normalization checks."""

"""Exception types shared across the toolkit.

Every operational failure mode named by the solver contracts gets its own
class so callers (and the CLI exit-code mapping) can discriminate without
string matching.
"""


class FoldedMapError(Exception):
    """Base class for all toolkit errors."""


class DomainError(FoldedMapError):
    """Input outside the admissible geometric domain (e.g. |y| > 1)."""


class InputError(FoldedMapError):
    """Malformed user input (CLI arguments, files, parameter ranges)."""


class ResolutionError(FoldedMapError):
    """Boundary samples carry too much energy near the Nyquist band."""


class PeriodObstructionError(FoldedMapError):
    """A boundary 1-form that must integrate to zero does not."""


class NonTransverseCrossingError(FoldedMapError):
    """Fold crossing is not transverse: a pullback denominator vanished."""


class GapSignError(FoldedMapError):
    """Gap function came out non-positive; the two sides are not opposite."""


class DegenerateSplittingError(FoldedMapError):
    """Eigenvalue gap of the skew endomorphism is below tolerance."""


class NonImmersedBoundaryError(FoldedMapError):
    """F-part of the boundary derivative degenerates below tolerance."""


class TierViolationError(FoldedMapError):
    """Fold locus is not a circle; outside the Tier-1 surface."""


class VerificationError(FoldedMapError):
    """A constructed object failed its own verification contract."""

"""Exception hierarchy shared across the package."""

from __future__ import annotations


class WrightDecompError(Exception):
    """Base class for all package-specific errors."""


class ParseError(WrightDecompError, ValueError):
    """Malformed literal or instance document."""


class ResolutionExceededError(WrightDecompError):
    """A comparison could not be decided above the resolution cap.

    Raised instead of guessing a sign once the separating enclosure has
    been refined below the supported width.
    """


class EmptyDomainError(WrightDecompError):
    """A shifted intersection exhausted the interval."""


class OutOfDomainError(WrightDecompError):
    """Evaluation point lies outside the instance interval."""


class OutOfSpanError(WrightDecompError):
    """Evaluation point uses radicals outside the instance basis."""


class DegeneratePairError(WrightDecompError):
    """Chord slope requested for two equal abscissae."""


class NonPositiveStepError(WrightDecompError):
    """Double difference requires strictly positive steps."""


class BracketViolationError(WrightDecompError):
    """Lipschitz bracket rationals do not satisfy the required ordering."""


class BracketUnavailableError(WrightDecompError):
    """No admissible rational bracket could be placed inside the interval."""


class NotJensenConvexError(WrightDecompError):
    """Decomposition precondition failed; carries the violation certificate."""

    def __init__(self, certificate):
        self.certificate = certificate
        super().__init__("source is not Jensen convex on the sampled rationals")


class InconsistentEnclosureError(WrightDecompError):
    """Certified enclosures became contradictory (source breaks the
    convexity assumptions the enclosure construction relies on)."""

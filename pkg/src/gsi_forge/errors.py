"""Exception hierarchy shared across the engine."""


class GsiForgeError(Exception):
    """Base class for all engine errors."""


# geometry
class BehindCamera(GsiForgeError):
    """Point has camera-frame depth <= near threshold."""


class InvalidMargin(GsiForgeError):
    """Containment margin meets or exceeds the outer box half-extents."""


# scene
class ParseError(GsiForgeError):
    """Scene document is not well-formed."""


class ValidationError(GsiForgeError):
    """Scene violates an invariant; `field` names the offender."""

    def __init__(self, field: str, message: str = ""):
        self.field = field
        super().__init__(f"{field}: {message}" if message else field)


class NoSupport(GsiForgeError):
    """Object has no support_id."""


# spatial ops
class UnknownTarget(GsiForgeError):
    pass


class UnknownReference(GsiForgeError):
    pass


class SameObject(GsiForgeError):
    pass


class NonManipulable(GsiForgeError):
    pass


class AngleOutOfRange(GsiForgeError):
    pass


class NotAReceptacle(GsiForgeError):
    pass


class DoesNotFit(GsiForgeError):
    pass


class MagnitudeOutOfRange(GsiForgeError):
    pass


class AmbiguousCriterion(GsiForgeError):
    """Removal criterion matched zero or more than one visible object."""


class FactorOutOfRange(GsiForgeError):
    pass


class DanglingReference(GsiForgeError):
    """Transform references an id absent from the scene."""


class PostTransformCollision(GsiForgeError):
    """Applying the transform produced an intersecting pair."""


# sampling
class KTooLarge(GsiForgeError):
    pass


class NoFreeSpace(GsiForgeError):
    """Environment floor has no free sample points."""


# rendering / imaging
class DimensionMismatch(GsiForgeError):
    pass


class ImageTooSmall(GsiForgeError):
    pass


class NothingVisible(GsiForgeError):
    pass


# pipeline
class BudgetExhausted(GsiForgeError):
    """Generation retry budget ran out before counts were met."""

    def __init__(self, op_kind: str, achieved: int, requested: int):
        self.op_kind = op_kind
        self.achieved = achieved
        self.requested = requested
        super().__init__(
            f"{op_kind}: achieved {achieved}/{requested} before budget ran out"
        )


class NoFeasibleOperation(GsiForgeError):
    pass


# evaluation
class ProviderUnavailable(GsiForgeError):
    pass


class PaletteAmbiguous(GsiForgeError):
    """Two palette entries are closer than the classification tolerance."""


class EstimationUnavailable(GsiForgeError):
    """Post-edit state could not be recovered from the image."""


class EmptyInput(GsiForgeError):
    pass


# judge
class JudgeUnavailable(GsiForgeError):
    """Judge endpoint failed after all retries; sample stays pending."""


class SchemaViolation(GsiForgeError):
    """Judge reply did not match the verdict schema."""


# review service
class PortInUse(GsiForgeError):
    pass


class ManifestLocked(GsiForgeError):
    pass

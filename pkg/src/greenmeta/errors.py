"""Exception hierarchy shared by every greenmeta module."""


class GreenMetaError(Exception):
    """Base class for all domain errors raised by greenmeta."""


# -- message codec ---------------------------------------------------------

class OutOfRange(GreenMetaError, ValueError):
    pass


class OddPercentage(GreenMetaError, ValueError):
    pass


class FieldOutOfRange(GreenMetaError, ValueError):
    def __init__(self, field, value, lo, hi):
        self.field = field
        self.value = value
        super().__init__(f"{field}={value!r} outside [{lo}, {hi}]")


class Truncated(GreenMetaError, ValueError):
    pass


# -- energy model ----------------------------------------------------------

class DimensionMismatch(GreenMetaError, ValueError):
    pass


class EmptyCandidateSet(GreenMetaError, ValueError):
    pass


class MissingTool(GreenMetaError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing tool"


# -- adaptation ------------------------------------------------------------

class EmptyProfile(GreenMetaError, ValueError):
    pass


class Unreachable(GreenMetaError):
    """No codeword sequence within the length bound hits the tolerance window.

    ``best_sequence`` and ``best_residual`` describe the closest attempt that
    never overshoots the upper bound.
    """

    def __init__(self, message, best_sequence, best_residual):
        super().__init__(message)
        self.best_sequence = best_sequence
        self.best_residual = best_residual


class ProfileFormatError(GreenMetaError, ValueError):
    pass


# -- session simulation ----------------------------------------------------

class SessionEnded(GreenMetaError):
    pass


class ScenarioError(GreenMetaError, ValueError):
    pass


# -- analysis --------------------------------------------------------------

class NonPositiveReference(GreenMetaError, ValueError):
    pass


class OutOfDomain(GreenMetaError, ValueError):
    pass


class TooFewKnots(GreenMetaError, ValueError):
    pass


class MalformedCurve(GreenMetaError, ValueError):
    pass


class MisalignedMeasurements(GreenMetaError, ValueError):
    pass


class MalformedHex(GreenMetaError, ValueError):
    pass

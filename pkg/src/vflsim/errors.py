"""Exception types shared across the library."""


class VflError(Exception):
    """Base class for all library errors."""


class DivisionByZero(VflError):
    """Multiplicative inverse of zero requested."""


class OffCurveInput(VflError):
    """A point operand does not satisfy the curve equation."""


class EmptyInput(VflError):
    """An operation received an empty input list."""


class EmptyBatch(VflError):
    """A batch operation received zero records."""


class RangeExceeded(VflError):
    """Real value outside the encodable fixed-point range."""


class FixedOverflow(VflError):
    """Fixed-point raw value left the guarded 32-bit signed range."""


class SourceExhausted(VflError):
    """A device's data source has fewer records than requested."""


class ArityMismatch(VflError):
    """Input counts do not match a circuit's declared partition."""


class LengthMismatch(VflError):
    """Assignment length does not match the constraint system."""


class UnsatisfiableInputs(VflError):
    """Witness synthesis produced an assignment violating a constraint."""

    def __init__(self, constraint_index, message=""):
        self.constraint_index = constraint_index
        super().__init__(message or f"constraint {constraint_index} violated")


class KeyMismatch(VflError):
    """Proving key does not belong to the supplied circuit."""


class SerializationError(VflError):
    """Malformed bytes while decoding an artifact."""


class MalformedRow(VflError):
    """A dataset row could not be parsed."""

    def __init__(self, line_no, message=""):
        self.line_no = line_no
        super().__init__(message or f"malformed row at line {line_no}")


class TooFewClasses(VflError):
    """Dataset does not contain enough distinct classes."""


class ConfigError(VflError):
    """Experiment configuration is invalid."""


class RunInvariantError(VflError):
    """An honest experiment run hit an unexpected rejection."""

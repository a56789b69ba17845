"""Exception types shared across the toolkit.

Builtin exceptions are used where they fit (FileNotFoundError for missing
inputs, OverflowError for log magnitudes that cannot be exponentiated,
ValueError for bad parameters); the classes below cover contracts that
need their own identity.
"""


class LsnormError(Exception):
    """Base class for toolkit-specific errors."""


class UnsupportedFormatError(LsnormError):
    """Audio file is structurally valid but not mono PCM16/float32 WAV."""


class CorruptHeaderError(LsnormError):
    """Audio file does not parse as a RIFF/WAVE container."""


class TooLongError(LsnormError):
    """Signal exceeds the uniform transform length chosen for the run."""


class SymmetryViolationError(LsnormError):
    """Spectrum is not consistent with a real time-domain signal."""


class SampleRateMismatchError(LsnormError):
    """Operands carry different sample rates."""


class MetadataMismatchError(LsnormError):
    """Transform length, sample rate, or magnitude floor disagree."""


class EmptyAccumulatorError(LsnormError):
    """Mean requested from an accumulator with no utterances in it."""


class LengthMismatchError(LsnormError):
    """Frames passed to overlap-add do not all share the plan's length."""


class BadMagicError(LsnormError):
    """Normalization-vector file is truncated or not in the expected format."""


class VersionUnsupportedError(LsnormError):
    """Normalization-vector file was written by an unknown format version."""

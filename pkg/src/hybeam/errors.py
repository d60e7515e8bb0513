"""Exception types shared across the toolkit."""


class BeamformError(Exception):
    """Base class for every error raised by this package."""


# -- matrix kernels ----------------------------------------------------------

class DimensionMismatch(BeamformError):
    pass


class NotSquare(DimensionMismatch):
    pass


class NotHermitian(BeamformError):
    pass


class NotPSD(BeamformError):
    pass


class SingularForInverse(BeamformError):
    pass


class KOutOfRange(BeamformError):
    pass


class ZeroMatrix(BeamformError):
    pass


# -- channel / hardware generators -------------------------------------------

class InvalidSize(BeamformError):
    pass


class InvalidSigma(BeamformError):
    pass


class TooManyGains(BeamformError):
    pass


# -- beamformer design -------------------------------------------------------

class SingularInterference(BeamformError):
    pass


class RankDeficientAnalog(BeamformError):
    pass


class SingularInner(BeamformError):
    pass


class SingularB(BeamformError):
    pass


class SingularGram(BeamformError):
    pass


class EmptyDictionary(BeamformError):
    pass


class RepeatSelectionExhausted(BeamformError):
    pass


class InnerSolverFailure(BeamformError):
    pass


class DictionaryExhausted(BeamformError):
    pass


class InRangeSpace(BeamformError):
    pass


class RankTooLow(BeamformError):
    pass


# -- harness ------------------------------------------------------------------

class UnknownPreset(BeamformError):
    pass


class ConfigError(BeamformError):
    pass


class IoError(BeamformError):
    pass

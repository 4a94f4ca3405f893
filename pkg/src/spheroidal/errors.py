"""Exception hierarchy shared by all modules."""


class SpectralError(Exception):
    """Base class."""


class DomainError(SpectralError, ValueError):
    pass


class ParameterError(SpectralError, ValueError):
    pass


class ConfigError(SpectralError, ValueError):
    pass


class SeriesDiverged(SpectralError):
    pass


class StepUnderflow(SpectralError):
    pass


class BlowUp(SpectralError):
    pass


class NonFiniteZeta(SpectralError):
    pass


class UndefinedFrame(SpectralError):
    pass


class NoTurningPoints(SpectralError):
    pass


class BracketFailure(SpectralError):
    pass


class NewtonDiverged(SpectralError):
    pass


class CertificationMismatch(SpectralError):
    pass


class BoundaryZero(SpectralError):
    pass


class PhaseJump(SpectralError):
    pass


class NearSpectrum(SpectralError):
    pass


class ContourThroughSpectrum(SpectralError):
    pass


class RankAmbiguous(SpectralError):
    pass


class TrackLost(SpectralError):
    pass


class CountMismatch(SpectralError):
    pass


class AprioriViolation(SpectralError):
    pass

"""Exception types shared across the toolkit."""


class CalibrationError(Exception):
    """Base class for geometric or numerical failures."""


class UnreachablePoint(CalibrationError):
    """Cartesian point outside the reach of at least one leg."""


class SingularJoint(CalibrationError):
    """An actual joint coordinate is zero; the midpoint parameterization fails."""


class NoRealSolution(CalibrationError):
    """The legs cannot close for the requested joint coordinates."""


class SingularPosture(CalibrationError):
    """Jacobian (or its inverse) is singular at the requested posture."""


class DegenerateLeg(CalibrationError):
    """Leg has no extent along its longitudinal axis."""


class StationOutOfRange(CalibrationError):
    """Gauge station is not strictly between the leg end points."""


class RankDeficient(CalibrationError):
    """Design matrix is numerically rank deficient; offsets are unidentifiable."""


class EmptyVector(CalibrationError):
    """Empty input where at least one value is required."""


class ConfigError(Exception):
    """Invalid configuration file or option set."""


class MeasurementFormatError(Exception):
    """Measurement file does not match the expected CSV schema."""

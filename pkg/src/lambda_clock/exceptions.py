"""Exception hierarchy.

All errors derive from :class:`LambdaClockError`, itself a ``ValueError`` so
that generic input-validation handlers keep working.
"""


class LambdaClockError(ValueError):
    """Base class for every error raised by this package."""


class DimensionMismatch(LambdaClockError):
    pass


class NonNormalizedDensity(LambdaClockError):
    pass


class DegenerateSupport(LambdaClockError):
    """A probability vanishes where the score has to be evaluated."""


class TooFewSamples(LambdaClockError):
    pass


class NonMonotoneSamples(LambdaClockError):
    """Labels or calibration knots are not strictly increasing."""


class SingularMetric(LambdaClockError):
    """The Fisher metric is not invertible: some parameter is not identifiable."""


class InvalidState(LambdaClockError):
    pass


class NotHermitian(LambdaClockError):
    pass


class TraceNotPreserved(LambdaClockError):
    pass


class UndersampledTrajectory(LambdaClockError):
    pass


class InvalidParameterization(LambdaClockError):
    pass


class DegenerateGenerator(LambdaClockError):
    """Zero energy spread: the state only picks up a global phase."""


class OutOfCalibrationRange(LambdaClockError):
    pass


class InvalidPopulation(LambdaClockError):
    pass


class TooFewTicks(LambdaClockError):
    pass


class SupportViolation(LambdaClockError):
    """Relative entropy is infinite: ``rho`` has weight outside ``sigma``'s support.

    ``index`` is set by :func:`lambda_clock.records.record_terms` to the record
    position ``k`` whose term ``D(rho_k || rho_{k-1})`` diverged.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConfigError(LambdaClockError):
    pass

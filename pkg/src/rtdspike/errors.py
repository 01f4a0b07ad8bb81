"""Exception hierarchy for rtdspike."""


class RtdSpikeError(Exception):
    """Base class for all rtdspike errors."""


class NoNdcError(RtdSpikeError):
    """The I-V curve has no negative-differential-conductance window in range."""


class BiasBeyondPeakError(RtdSpikeError):
    """No load-line root exists on the stable branch below the current peak."""


class LaserSteadyStateError(RtdSpikeError):
    """The laser rate equations admit no physical steady state for this bias."""


class IntegrationBlowUpError(RtdSpikeError):
    """A state variable became non-finite during integration."""

    def __init__(self, variable, time):
        self.variable = variable
        self.time = time
        super().__init__(
            f"integration blow-up: {variable} became non-finite at t = {time:.6e} s"
        )


class SubThresholdPulseError(RtdSpikeError):
    """A protocol required a super-threshold pulse but the pulse did not spike."""


class AmplitudeCalibrationError(RtdSpikeError):
    """Task amplitudes violate the required sub/super-threshold calibration."""


class ConfigError(RtdSpikeError):
    """Base class for configuration problems (CLI exit code 2)."""


class ConfigParseError(ConfigError):
    """The config file is not valid key/value text."""


class UnknownKeyError(ConfigError):
    """The config contains a section or key that is not recognised."""


class InvariantViolationError(ConfigError):
    """A parameter value violates a declared invariant."""

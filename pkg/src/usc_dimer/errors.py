"""Exception types shared across the toolkit."""


class UscDimerError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(UscDimerError):
    """Invalid run or sweep configuration."""


class StepSizeUnderflow(UscDimerError):
    """The adaptive step controller collapsed below the underflow floor.

    Signals a stiff blow-up of the trajectory (expected for strongly
    attractive nonlinearities in rare cases); the run is reported, not
    silently truncated.
    """


class DegenerateNorm(UscDimerError):
    """Total norm fell below the resolvable floor while normalizing."""


class UnconvergedCutoff(UscDimerError):
    """Probability leaked into the Fock-space boundary shells beyond tolerance.

    The caller should raise n_max and retry, or explicitly accept the
    truncated model by loosening the leakage tolerance.
    """


class EmptySeries(UscDimerError):
    """A time series shorter than two samples was supplied."""


class NotApplicable(UscDimerError):
    """The requested diagnostic is undefined for these parameters."""

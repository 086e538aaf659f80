"""Exception types shared across the toolkit."""


class LfikitError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(LfikitError):
    """Invalid configuration, dimension mismatch or schema violation."""


class NumericError(LfikitError):
    """A computation produced non-finite values."""


class PrecisionNotPD(LfikitError):
    """A combined precision matrix is not positive definite.

    Raised by the forward posterior-to-proposal-posterior transforms when
    the proposal is wider than the prior in precision order.
    """

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


class NonPositiveDefinite(LfikitError):
    """A recovered covariance matrix is not positive definite.

    Raised by the SNPE-A post-hoc correction; must be surfaced to the
    caller, never silently repaired.
    """

    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


class InvalidAtomError(LfikitError):
    """An atom lies outside the prior support."""


class LeakageTooHigh(LfikitError):
    """Rejection sampling could not reach the requested sample count.

    Carries the partial results and the measured acceptance rate.
    """

    def __init__(self, message, samples=None, acceptance_rate=None):
        super().__init__(message)
        self.samples = samples
        self.acceptance_rate = acceptance_rate


class TrainingError(LfikitError):
    """Optimization failed (e.g. too many consecutive rejected steps)."""


class BandwidthError(LfikitError):
    """No usable kernel bandwidth (all points identical)."""


class ResolutionError(LfikitError):
    """A reference grid is too coarse to represent its density."""

"""Exception types raised by the numerics."""


class AmplifierError(ValueError):
    """Base class for domain errors in this package."""


class DegenerateStateError(AmplifierError):
    """A state with zero norm was passed where a physical state is needed."""


class AliasingError(AmplifierError):
    """Quadrature too coarse for the requested Fock cutoff."""


class RegimeError(AmplifierError):
    """Parameters lie outside the regime where a formula is valid."""


class TruncationError(AmplifierError):
    """Fock cutoff too small for the operator being built."""


class NearDegenerateError(AmplifierError):
    """Ensemble too close to linear dependence at float64 precision."""


class ConfigurationError(AmplifierError):
    """Objects built for different parameters were combined."""


class UndefinedPhaseError(AmplifierError):
    """State has no mean field, so the quadrature frame is undefined."""


class ConvergenceError(AmplifierError):
    """A root search did not reach its tolerance."""

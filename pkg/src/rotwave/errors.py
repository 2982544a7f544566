"""Exception types shared by all rotwave modules."""


class RotwaveError(Exception):
    """Base class for all toolkit errors."""


class DomainError(RotwaveError):
    """A coordinate lies outside the strip the model is defined on."""


class SingularPoint(RotwaveError):
    """Evaluation requested exactly at a non-removable singularity."""


class QuadratureFailure(RotwaveError):
    """Adaptive quadrature could not meet the requested tolerance."""


class DivergentNorm(RotwaveError):
    """A norm estimate keeps growing under refinement (non-integrable input)."""


class ParameterError(RotwaveError):
    """A parameter is outside its admissible range."""


class IntegrationFailure(RotwaveError):
    """The ODE step controller failed (step size underflow or step cap)."""


class NoConvergence(RotwaveError):
    """A fixed-point iteration exceeded its sweep budget."""


class BracketFailure(RotwaveError):
    """No sign change found while expanding a root bracket."""


class ScanExhausted(RotwaveError):
    """A parameter scan hit its cap without resolving the target."""


class InfimumUnresolved(RotwaveError):
    """Extrapolation toward a parameter boundary was inconclusive."""


class CollinearityViolation(RotwaveError):
    """Cross-check of the dispersion derivative failed at a root."""


class StagnationDetected(RotwaveError):
    """The height function lost strict monotonicity (h_p <= 0 somewhere)."""


class NewtonDivergence(RotwaveError):
    """Newton iteration did not reach the residual tolerance."""


class InterpolationFailure(RotwaveError):
    """Field interpolation onto the physical mesh failed."""


class ConfigError(RotwaveError):
    """A run configuration is malformed or inconsistent."""


class NearSingularWarning(UserWarning):
    """The streamline parameter is close to the stagnation threshold."""

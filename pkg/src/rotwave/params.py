"""Physical parameters of the wave problem."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParameterError


@dataclass(frozen=True)
class FluidParams:
    """Bulk parameters of the flow.

    Attributes
    ----------
    p0 : float
        Relative mass flux (value of the stream function at the bed), < 0.
    g : float
        Gravitational acceleration, >= 0 (g = 0 is the pure capillary case).
    sigma : float
        Surface tension coefficient, > 0.
    r : float
        Integrability exponent of the vorticity function, in (1, inf).
    """

    p0: float
    g: float
    sigma: float
    r: float = 2.0

    def __post_init__(self):
        if not self.p0 < 0:
            raise ParameterError(f"p0 must be negative, got {self.p0}")
        if not self.g >= 0:
            raise ParameterError(f"g must be nonnegative, got {self.g}")
        if not self.sigma > 0:
            raise ParameterError(f"sigma must be positive, got {self.sigma}")
        if not self.r > 1:
            raise ParameterError(f"r must exceed 1, got {self.r}")

    @property
    def depth_span(self) -> float:
        return -self.p0

"""Laminar (flat-surface, parallel-streamline) flows.

For every streamline parameter lam above twice the primitive maximum the
strip carries a laminar height profile, obtained by integrating the
reciprocal relative speed from the bed up.  These flows are the trivial
branch every wavy solution bifurcates from.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import quadrature
from .errors import NearSingularWarning, ParameterError
from .params import FluidParams
from .vorticity import VorticityModel, gamma_max_primitive

LAMBDA_MARGIN = 1e-12
NEAR_SINGULAR = 1e-8


@dataclass(frozen=True)
class LaminarFlow:
    """A laminar solution sampled on a p-grid.

    ``a_values`` holds the relative speed sqrt(lam - 2*Gamma(p)); ``H_values``
    the height above the bed; ``Q`` the head constant; ``d`` the depth.
    """

    lam: float
    pgrid: np.ndarray
    a_values: np.ndarray
    H_values: np.ndarray
    Q: float
    d: float


def chebyshev_pgrid(p0: float, n: int = 257) -> np.ndarray:
    """Chebyshev-distributed nodes on [p0, 0], clustered at both ends."""
    j = np.arange(n)
    t = -np.cos(np.pi * j / (n - 1))  # ascending on [-1, 1]
    return p0 * (1.0 - (t + 1.0) / 2.0)


def _check_lambda(model: VorticityModel, lam: float, gamma_m: float | None = None) -> float:
    gm = gamma_max_primitive(model) if gamma_m is None else gamma_m
    if not lam > 2.0 * gm + LAMBDA_MARGIN:
        raise ParameterError(
            f"lam = {lam} is not above the admissible threshold 2*Gamma_M = {2 * gm}")
    if lam - 2.0 * gm < NEAR_SINGULAR:
        warnings.warn(
            f"lam - 2*Gamma_M = {lam - 2 * gm:.3e} is close to the stagnation limit",
            NearSingularWarning, stacklevel=3)
    return gm


def coefficient_a(model: VorticityModel, lam: float, p: float,
                  gamma_m: float | None = None) -> float:
    """Relative speed sqrt(lam - 2*Gamma(p)) of the laminar flow at level p."""
    _check_lambda(model, lam, gamma_m)
    return float(np.sqrt(lam - 2.0 * model.primitive(p)))


def coefficient_a_array(model: VorticityModel, lam: float, p: np.ndarray) -> np.ndarray:
    return np.sqrt(lam - 2.0 * model.primitive_array(np.asarray(p, dtype=float)))


def laminar_height(model: VorticityModel, lam: float, p: float,
                   gamma_m: float | None = None) -> float:
    """Height of the streamline at level p above the bed."""
    _check_lambda(model, lam, gamma_m)
    if p == model.p0:
        return 0.0

    def recip(s: float) -> float:
        return 1.0 / float(np.sqrt(lam - 2.0 * model.primitive_array(np.asarray([s]))[0]))

    def recip_vec(s):
        return 1.0 / coefficient_a_array(model, lam, s)

    return quadrature.integrate(
        recip, model.p0, p, breakpoints=model.panel_breakpoints(),
        singular_right=model.singular_at_zero and p == 0.0, f_vec=recip_vec)


def head_constant(model: VorticityModel, lam: float, params: FluidParams,
                  gamma_m: float | None = None) -> float:
    """Head Q(lam) = lam + 2*g*depth(lam)."""
    return lam + 2.0 * params.g * laminar_height(model, lam, 0.0, gamma_m)


def build_laminar(model: VorticityModel, lam: float, params: FluidParams,
                  pgrid: np.ndarray | None = None) -> LaminarFlow:
    """Assemble a laminar flow on a grid (Chebyshev 257 nodes by default)."""
    gm = _check_lambda(model, lam)
    if pgrid is None:
        pgrid = chebyshev_pgrid(model.p0)
    pgrid = np.asarray(pgrid, dtype=float)
    if pgrid[0] != model.p0 or pgrid[-1] != 0.0 or np.any(np.diff(pgrid) <= 0):
        raise ParameterError("pgrid must ascend from p0 to 0")
    a_vals = coefficient_a_array(model, lam, pgrid)

    def recip_vec(s):
        return 1.0 / coefficient_a_array(model, lam, s)

    def recip(s: float) -> float:
        return float(recip_vec(np.asarray([s]))[0])

    H_vals = quadrature.cumulative(
        recip, pgrid, breakpoints=model.panel_breakpoints(),
        singular_right=model.singular_at_zero, f_vec=recip_vec)
    d = float(H_vals[-1])
    return LaminarFlow(lam=lam, pgrid=pgrid, a_values=a_vals, H_values=H_vals,
                       Q=lam + 2.0 * params.g * d, d=d)

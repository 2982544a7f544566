"""Dispersion threshold, dispersion map, bifurcation points, and bound checks.

The surface Wronskian W(lam, mu) is positive at mu = 0 once lam exceeds a
threshold lambda0 and tends to -inf as mu grows, so it has a unique positive
root mu(lam) for every lam above the threshold.  Bifurcation points are the
parameters lambda_n where the root equals a squared integer wavenumber.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.optimize import brentq

from . import quadrature
from .errors import (BracketFailure, InfimumUnresolved, ParameterError,
                     ScanExhausted)
from .laminar import chebyshev_pgrid
from .params import FluidParams
from .sturm import (DispersionPoint, surface_state_v1, wronskian_at_surface,
                    wronskian_partials, _descale, _speed_closure)
from .vorticity import VorticityModel, gamma_max_primitive

SCAN_CAP = 1.0e6       # additive lambda scan range above 2*Gamma_M
MU_CAP = 1.0e8         # mu bracket cap
ROOT_XTOL = 1e-10      # absolute tolerance on located parameters
THRESHOLD_PROBE = 1e-10


@dataclass(frozen=True)
class ThresholdResult:
    """Outcome of the lambda0 scan.

    ``no_root`` is set when W(., 0) stays positive on the whole admissible
    range, in which case lambda0 degenerates to 2*Gamma_M (this happens for
    every flow without gravity and for strongly sheared singular profiles).
    """

    lambda0: float
    no_root: bool
    gamma_max: float


@dataclass(frozen=True)
class DispersionCurve:
    lambda_samples: np.ndarray
    mu_values: np.ndarray
    lambda0: float
    mu_inf: float
    N: int


@dataclass(frozen=True)
class L3BoundCheck:
    FE1_lhs: float
    FE1_rhs: float
    FE2_lhs: float
    FE2_rhs: float
    passed: bool


def _w_at(model, params, lam, mu=0.0, rescale=False) -> float:
    return wronskian_at_surface(model, lam, mu, params, rescale=rescale).W


def lambda_threshold(model: VorticityModel, params: FluidParams) -> ThresholdResult:
    """Minimal lambda0 >= 2*Gamma_M with W(lam, 0) > 0 for all lam > lambda0.

    Without gravity W(lam, 0) is a positive multiple of 1, so lambda0 is
    exactly 2*Gamma_M.  With gravity, W(., 0) is monotone through a single
    sign change when one exists; otherwise the ``no_root`` flag is set.
    """
    gm = gamma_max_primitive(model)
    floor = 2.0 * gm
    if params.g == 0.0:
        return ThresholdResult(lambda0=floor, no_root=True, gamma_max=gm)
    scale = max(1.0, abs(floor))
    probe = floor + THRESHOLD_PROBE * scale
    w_probe = _w_at(model, params, probe)
    if w_probe > 0.0:
        # positive already arbitrarily close to the stagnation limit
        return ThresholdResult(lambda0=floor, no_root=True, gamma_max=gm)
    step = scale
    hi = floor + step
    while _w_at(model, params, hi) <= 0.0:
        step *= 2.0
        hi = floor + step
        if step > SCAN_CAP:
            raise ScanExhausted(
                f"W(., 0) still nonpositive at lam = 2*Gamma_M + {SCAN_CAP:g}")
    lo = max(probe, floor + step / 2.0 if step > scale else probe)
    if _w_at(model, params, lo) > 0.0:
        lo = probe
    root = brentq(lambda lam: _w_at(model, params, lam), lo, hi,
                  xtol=ROOT_XTOL, rtol=4.0 * np.finfo(float).eps)
    return ThresholdResult(lambda0=float(root), no_root=False, gamma_max=gm)


def _newton_bisect(eval_point, lo, hi, w_lo, *, xtol=ROOT_XTOL, max_iter=80):
    """Safeguarded Newton on a bracketed sign change.

    ``eval_point(x)`` returns (value, slope); the bracket [lo, hi] carries a
    sign change with sign(w_lo) at lo.  Newton steps are taken whenever they
    stay inside the current bracket, bisection otherwise.
    """
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        val, slope = eval_point(x)
        if val == 0.0:
            return x
        if (val > 0.0) == (w_lo > 0.0):
            lo = x
        else:
            hi = x
        x_new = x - val / slope if slope != 0.0 else 0.5 * (lo + hi)
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= xtol * max(1.0, abs(x_new)):
            return x_new
        x = x_new
    return x


def mu_of_lambda(model: VorticityModel, params: FluidParams, lam: float, *,
                 threshold: ThresholdResult | None = None,
                 guess: float | None = None) -> float:
    """The unique mu > 0 solving W(lam, mu) = 0, for lam above the threshold.

    Brackets by doubling (W is positive at mu = 0 and eventually negative),
    then polishes with slope-informed Newton safeguarded by bisection.
    """
    if threshold is None:
        threshold = lambda_threshold(model, params)
    if not lam > threshold.lambda0:
        raise ParameterError(
            f"lam = {lam} is not above the dispersion threshold {threshold.lambda0}")
    w0 = _w_at(model, params, lam, 0.0)
    if w0 <= 0.0:
        raise ParameterError(
            f"W(lam, 0) = {w0:.3e} <= 0 at lam = {lam}; threshold violated")
    lo, w_lo = 0.0, w0
    hi = guess if guess is not None and guess > 0.0 else 1.0
    w_hi = _w_at(model, params, lam, hi, rescale=True)
    while w_hi >= 0.0:
        lo, w_lo = hi, w_hi
        hi *= 2.0
        if hi > MU_CAP:
            raise BracketFailure(f"no sign change of W(lam, .) up to mu = {MU_CAP:g}")
        w_hi = _w_at(model, params, lam, hi, rescale=True)

    def eval_point(mu):
        pt = wronskian_partials(model, lam, mu, params)
        return pt.W, pt.W_mu

    return float(_newton_bisect(eval_point, lo, hi, w_lo))


def bifurcation_points(model: VorticityModel, params: FluidParams, n_max: int,
                       *, threshold: ThresholdResult | None = None,
                       n_min: int | None = None) -> list[tuple[int, float]]:
    """The increasing sequence lambda_n with mu(lambda_n) = n^2, n >= N.

    Solved on the equivalent scalar equation W(lambda, n^2) = 0 in lambda
    (same root, one level of nesting cheaper than iterating on mu(lambda)):
    mu(lam) < n^2 exactly when W(lam, n^2) < 0, so the bracket logic of the
    mu root transfers directly.
    """
    if threshold is None:
        threshold = lambda_threshold(model, params)
    n_start = n_min if n_min is not None else minimal_wavenumber(
        model, params, threshold=threshold)
    if n_max < n_start:
        raise ParameterError(f"n_max = {n_max} below the minimal wavenumber {n_start}")
    out: list[tuple[int, float]] = []
    scale = max(1.0, abs(threshold.lambda0))
    lam_floor = threshold.lambda0
    for n in range(n_start, n_max + 1):
        mu_target = float(n * n)
        eps = 1e-4 * scale
        lo = lam_floor + eps
        w_lo = _w_at(model, params, lo, mu_target, rescale=True)
        while w_lo >= 0.0 and eps > 1e-13 * scale:
            eps *= 0.25
            lo = lam_floor + eps
            w_lo = _w_at(model, params, lo, mu_target, rescale=True)
        if w_lo >= 0.0:
            raise BracketFailure(
                f"W(., {mu_target}) not negative near the threshold; "
                f"wavenumber n = {n} may be below the admissible minimum")
        step = scale
        hi = lo + step
        w_hi = _w_at(model, params, hi, mu_target, rescale=True)
        while w_hi <= 0.0:
            lo, w_lo = hi, w_hi
            step *= 2.0
            hi = lo + step
            if hi > lam_floor + SCAN_CAP:
                raise ScanExhausted(f"lambda_{n} beyond scan cap")
            w_hi = _w_at(model, params, hi, mu_target, rescale=True)

        def eval_point(lam):
            pt = wronskian_partials(model, lam, mu_target, params)
            return pt.W, pt.W_lambda

        lam_n = float(_newton_bisect(eval_point, lo, hi, w_lo))
        out.append((n, lam_n))
        lam_floor = lam_n  # mu(lam_n) = n^2 < (n+1)^2 keeps the next bracket left end
    return out


def mu_infimum(model: VorticityModel, params: FluidParams, *,
               threshold: ThresholdResult | None = None) -> tuple[float, list[float]]:
    """Estimate of inf mu over the admissible range by one-sided extrapolation
    toward the threshold (valid because the dispersion map increases)."""
    if threshold is None:
        threshold = lambda_threshold(model, params)
    lam0 = threshold.lambda0
    scale = max(1.0, abs(lam0))
    mus: list[float] = []
    guess = None
    for eps in (1e-2, 1e-3, 1e-4):
        mu = mu_of_lambda(model, params, lam0 + eps * scale,
                          threshold=threshold, guess=guess)
        mus.append(mu)
        guess = mu
    if not (mus[0] > mus[1] > mus[2]):
        if max(mus) - min(mus) <= 1e-9 * max(1.0, abs(mus[0])):
            return mus[2], mus  # flat to rounding; already converged
        raise InfimumUnresolved(
            f"mu samples {mus} do not decrease toward the threshold")
    d1, d2 = mus[0] - mus[1], mus[1] - mus[2]
    if d1 <= 0.0 or d2 <= 0.0 or d2 >= d1:
        return mus[2], mus
    rho = d2 / d1
    est = mus[2] - d2 * rho / (1.0 - rho)
    return max(est, 0.0), mus


def minimal_wavenumber(model: VorticityModel, params: FluidParams, *,
                       threshold: ThresholdResult | None = None) -> int:
    """Smallest positive integer N with N^2 above the dispersion infimum."""
    est, _ = mu_infimum(model, params, threshold=threshold)
    n = int(math.floor(math.sqrt(max(est, 0.0)))) + 1
    while (n - 1) >= 1 and (n - 1) ** 2 > est:
        n -= 1
    return max(n, 1)


def dispersion_curve(model: VorticityModel, params: FluidParams,
                     lambda_samples: np.ndarray | None = None,
                     n_samples: int = 33, span: float = 10.0) -> DispersionCurve:
    """Sample the dispersion map above the threshold."""
    thr = lambda_threshold(model, params)
    scale = max(1.0, abs(thr.lambda0))
    if lambda_samples is None:
        lambda_samples = thr.lambda0 + scale * np.geomspace(1e-3, span, n_samples)
    lambda_samples = np.asarray(lambda_samples, dtype=float)
    mus = []
    guess = None
    for lam in lambda_samples:
        guess = mu_of_lambda(model, params, lam, threshold=thr, guess=guess)
        mus.append(guess)
    est, _ = mu_infimum(model, params, threshold=thr)
    n_min = minimal_wavenumber(model, params, threshold=thr)
    return DispersionCurve(lambda_samples=lambda_samples,
                           mu_values=np.asarray(mus), lambda0=thr.lambda0,
                           mu_inf=est, N=n_min)


# ---------------------------------------------------------------------------
# secondary verifications

def condCG_values(model: VorticityModel, params: FluidParams, *,
                  threshold: ThresholdResult | None = None,
                  n_nodes: int = 4097) -> tuple[float, float]:
    """Left side (nested double integral of the threshold flow) and right
    side sigma/g^2 of the N = 1 sufficient criterion."""
    if params.g <= 0.0:
        raise ParameterError("the criterion applies to flows with gravity")
    if params.r < 3.0:
        warnings.warn("criterion evaluated outside its r >= 3 hypothesis",
                      stacklevel=2)
    if threshold is None:
        threshold = lambda_threshold(model, params)
    if threshold.no_root:
        raise ParameterError(
            "criterion needs a finite threshold root; scan reported no_root")
    lam0 = threshold.lambda0
    nodes = np.unique(np.concatenate([
        chebyshev_pgrid(model.p0, n_nodes),
        np.asarray(model.panel_breakpoints(), dtype=float)]))
    speed = _speed_closure(model, lam0)
    a_vals = np.array([speed(t) for t in nodes])
    inner = cumulative_simpson(1.0 / a_vals ** 3, x=nodes, initial=0.0)
    lhs = float(simpson(a_vals * inner ** 2, x=nodes))
    rhs = params.sigma / params.g ** 2
    return lhs, rhs


def check_condCG(model: VorticityModel, params: FluidParams, *,
                 threshold: ThresholdResult | None = None) -> bool:
    """Sufficient criterion for the minimal wavenumber to be 1."""
    lhs, rhs = condCG_values(model, params, threshold=threshold)
    return lhs < rhs


def _sinhc(z: float) -> float:
    if z < 1e-4:
        z2 = z * z
        return 1.0 + z2 / 6.0 * (1.0 + z2 / 20.0)
    return math.sinh(z) / z


def _coshm1_over_z2(z: float) -> float:
    if z < 1e-4:
        z2 = z * z
        return 0.5 + z2 / 24.0 * (1.0 + z2 / 30.0)
    half = math.sinh(0.5 * z)
    return 2.0 * half * half / (z * z)


def _sinhm_over_z3(z: float) -> float:
    if z < 1e-3:
        z2 = z * z
        return (1.0 + z2 / 20.0 * (1.0 + z2 / 42.0)) / 6.0
    return (math.sinh(z) - z) / (z * z * z)


def _speed_extrema(model, lam, p1) -> tuple[float, float, float]:
    """(a(p1), min a, max a) over [p1, 0]."""
    speed = _speed_closure(model, lam)
    grid = np.linspace(p1, 0.0, 4097)
    grid = np.unique(np.concatenate([
        grid, [b for b in model.panel_breakpoints() if p1 < b < 0.0], [p1, 0.0]]))
    vals = np.array([speed(t) for t in grid])
    i_min, i_max = int(np.argmin(vals)), int(np.argmax(vals))

    def refine(idx, sign):
        lo = grid[max(idx - 1, 0)]
        hi = grid[min(idx + 1, grid.size - 1)]
        if hi <= lo:
            return vals[idx]
        x, fx = quadrature.golden_max(lambda t: sign * speed(t), lo, hi)
        return sign * fx

    a_min = min(vals[i_min], refine(i_min, -1.0))
    a_max = max(vals[i_max], refine(i_max, 1.0))
    return float(speed(p1)), float(a_min), float(a_max)


def bound_check_L3(model: VorticityModel, lam: float, mu: float, p1: float,
                   A: float, B: float, *, tol: float = 1e-8) -> L3BoundCheck:
    """Comparison-solution bounds for the mean and first moment of the
    solution of the dispersion ODE restarted at p1 with v = A, v' = B.

    FE1 bounds the integral of v from above through the constant-coefficient
    majorant; FE2 bounds the first moment integral of (-p) v from below
    through the minorant.  Both are exact equalities for constant speed.
    """
    gm = gamma_max_primitive(model)
    if not lam > 2.0 * gm:
        raise ParameterError(f"lam = {lam} not above 2*Gamma_M = {2 * gm}")
    if not (model.p0 < p1 < 0.0):
        raise ParameterError(f"p1 = {p1} must lie strictly inside (p0, 0)")
    if A <= 0.0 or B <= 0.0:
        raise ParameterError("A and B must be positive")
    if mu < 0.0:
        raise ParameterError("mu must be nonnegative")
    a_p1, a_min, a_max = _speed_extrema(model, lam, p1)
    c_bar = (a_p1 / a_min) ** 3
    c_und = (a_p1 / a_max) ** 3
    d_bar = a_max / a_min ** 3
    d_und = a_min / a_max ** 3
    s = -p1
    z_bar = s * math.sqrt(d_bar * mu)
    z_und = s * math.sqrt(d_und * mu)
    if max(z_bar, z_und) > 700.0:
        raise ParameterError("bound evaluation overflows; reduce mu or |p1|")
    fe1_rhs = A * s * _sinhc(z_bar) + B * c_bar * s * s * _coshm1_over_z2(z_bar)
    fe2_rhs = A * s * s * _coshm1_over_z2(z_und) + B * c_und * s ** 3 * _sinhm_over_z3(z_und)
    state, log_scale = surface_state_v1(model, lam, mu, with_moments=True,
                                        rescale=True, p_start=p1, v0=A, vp0=B)
    fe1_lhs = _descale(state[2], log_scale)
    fe2_lhs = _descale(state[3], log_scale)
    band1 = tol * max(1.0, abs(fe1_rhs))
    band2 = tol * max(1.0, abs(fe2_rhs))
    passed = (fe1_lhs <= fe1_rhs + band1) and (fe2_lhs >= fe2_rhs - band2)
    return L3BoundCheck(FE1_lhs=fe1_lhs, FE1_rhs=fe1_rhs, FE2_lhs=fe2_lhs,
                        FE2_rhs=fe2_rhs, passed=passed)


def asymptote_check_L4(model: VorticityModel, params: FluidParams, lam: float,
                       mu_list) -> np.ndarray:
    """W(lam, mu) along an increasing mu list (renormalized internally, so
    values may legitimately return as -inf once they leave float range)."""
    mus = np.asarray(list(mu_list), dtype=float)
    if np.any(np.diff(mus) <= 0):
        raise ParameterError("mu_list must be increasing")
    return np.array([
        wronskian_at_surface(model, lam, mu, params, rescale=True).W
        for mu in mus])

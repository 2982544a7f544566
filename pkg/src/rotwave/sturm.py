"""Fundamental solutions of the dispersion ODE and the surface Wronskian.

The second-order problem (a^3 v')' = mu * a * v has an L_r coefficient only,
so it is integrated as a first-order system in (v, w) with w = a^3 v': the
flux w stays absolutely continuous even when the vorticity is unbounded,
and the right-hand side (v' = w/a^3, w' = mu*a*v) is continuous in p.

Integration uses an adaptive embedded Dormand-Prince 5(4) stepper that lands
exactly on grid nodes and model breakpoints.  For power-law vorticity the
panel next to p = 0 is closed with product-integration sweeps of the
equivalent Volterra relations instead of Runge-Kutta steps, because the
coefficient has unbounded slope there.  An independent global Volterra
solver doubles as an oracle for the whole trajectory.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import CubicSpline

from .errors import (CollinearityViolation, IntegrationFailure, NoConvergence,
                     ParameterError)
from .laminar import chebyshev_pgrid
from .params import FluidParams
from .vorticity import (Constant, PiecewiseConstant, PowerLaw, VorticityModel,
                        Zero, gamma_max_primitive)

DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-12
STEP_FLOOR = 1e-12
RESCALE_AT = 1e100
CLOSURE_FRACTION = 1e-3   # width of the singular closure panel, relative to |p0|
CLOSURE_POINTS = 241
CLOSURE_GRADING = 6
QQQ_TOL = 1e-6


@dataclass(frozen=True)
class SturmSolution:
    """A fundamental solution sampled on a p-grid.

    ``flux`` holds w = a^3 v', the natural continuous companion of v.
    """

    lam: float
    mu: float
    pgrid: np.ndarray
    v: np.ndarray
    flux: np.ndarray
    which: str  # "v1" (bed-anchored) or "v2" (surface-anchored)


@dataclass
class DispersionPoint:
    """Surface Wronskian value at (lam, mu), optionally with its slopes."""

    lam: float
    mu: float
    W: float
    W_lambda: float | None = None
    W_mu: float | None = None


# ---------------------------------------------------------------------------
# fast scalar coefficient closures

def _primitive_closure(model: VorticityModel):
    if isinstance(model, Zero):
        return lambda t: 0.0
    if isinstance(model, Constant):
        c = model.c
        return lambda t: c * t
    if isinstance(model, PowerLaw):
        beta = model.exponent
        coef = model.delta / (1.0 - beta)
        expo = 1.0 - beta
        return lambda t: -coef * (-t) ** expo if t < 0.0 else 0.0
    if isinstance(model, PiecewiseConstant):
        edges = [model.p0, *model.breakpoints, 0.0]
        vals = list(model.values)
        gedges = [0.0] * len(edges)
        for i in range(len(edges) - 2, -1, -1):
            gedges[i] = gedges[i + 1] - vals[i] * (edges[i + 1] - edges[i])

        def gpw(t, edges=edges, vals=vals, gedges=gedges):
            j = min(max(bisect_right(edges, t) - 1, 0), len(vals) - 1)
            return gedges[j] + vals[j] * (t - edges[j])

        return gpw

    def generic(t, _m=model):
        return float(_m.primitive_array(np.asarray([t]))[0])

    return generic


def _speed_closure(model: VorticityModel, lam: float):
    prim = _primitive_closure(model)
    return lambda t: math.sqrt(lam - 2.0 * prim(t))


def _require_admissible(model: VorticityModel, lam: float, mu: float) -> None:
    gm = gamma_max_primitive(model)
    if not lam > 2.0 * gm:
        raise ParameterError(f"lam = {lam} not above 2*Gamma_M = {2 * gm}")
    if mu < 0:
        raise ParameterError(f"mu must be nonnegative, got {mu}")


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) with forced stop points and optional renormalization

_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                                -17253 / 339200, 22 / 525, -1 / 40)
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9


def _dp45(f, t0, t1, y0, *, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
          stops=(), rescale=False, max_steps=400_000):
    """Integrate y' = f(t, y) from t0 to t1, landing exactly on each stop.

    ``f`` maps (t, sequence) to a sequence; the hot loop runs on plain
    Python floats, which is several times faster than small-ndarray
    arithmetic at these dimensions.  Returns (targets, out, log_scale):
    ``targets`` lists the interior stops in marching order followed by t1;
    ``out`` holds one state row per target.  With ``rescale`` the state is
    renormalized whenever it grows past RESCALE_AT (exact for linear
    systems); every returned row then carries the factor exp(log_scale).
    """
    t = float(t0)
    y = [float(v) for v in y0]
    dim = len(y)
    rng = range(dim)
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    if span == 0.0:
        return [float(t1)], np.asarray([y]), 0.0
    interior = [s for s in set(stops)
                if (s - t0) * direction > 0 and (t1 - s) * direction > 0]
    interior.sort(reverse=direction < 0)
    targets = interior + [float(t1)]
    out: list[list[float]] = []
    log_scale = 0.0
    hmin = STEP_FLOOR * span
    h = direction * span / 64.0
    k1 = f(t, y)
    idx = 0
    for _ in range(max_steps):
        remaining = targets[idx] - t
        if abs(remaining) <= abs(h):
            hs = remaining
            hitting = True
        else:
            hs = h
            hitting = False
        k2 = f(t + _C2 * hs, [y[i] + hs * (_A21 * k1[i]) for i in rng])
        k3 = f(t + _C3 * hs, [y[i] + hs * (_A31 * k1[i] + _A32 * k2[i])
                              for i in rng])
        k4 = f(t + _C4 * hs, [y[i] + hs * (_A41 * k1[i] + _A42 * k2[i]
                                           + _A43 * k3[i]) for i in rng])
        k5 = f(t + _C5 * hs, [y[i] + hs * (_A51 * k1[i] + _A52 * k2[i]
                                           + _A53 * k3[i] + _A54 * k4[i])
                              for i in rng])
        k6 = f(t + hs, [y[i] + hs * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i]
                                     + _A64 * k4[i] + _A65 * k5[i]) for i in rng])
        y5 = [y[i] + hs * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i]
                           + _B5 * k5[i] + _B6 * k6[i]) for i in rng]
        k7 = f(t + hs, y5)
        enorm2 = 0.0
        for i in rng:
            err = hs * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                        + _E6 * k6[i] + _E7 * k7[i])
            ay, ay5 = abs(y[i]), abs(y5[i])
            sc = atol + rtol * (ay if ay > ay5 else ay5)
            q = err / sc
            enorm2 += q * q
        enorm = math.sqrt(enorm2 / dim)
        if enorm <= 1.0 or abs(hs) <= hmin:
            t = t + hs
            y = y5
            k1 = k7
            if hitting:
                out.append(list(y))
                idx += 1
                if idx == len(targets):
                    return targets, np.asarray(out), log_scale
            if rescale:
                big = max(abs(v) for v in y)
                if big > RESCALE_AT:
                    y = [v / big for v in y]
                    k1 = [v / big for v in k1]
                    for row in out:
                        for i in rng:
                            row[i] /= big
                    log_scale += math.log(big)
        factor = 0.9 * enorm ** -0.2 if enorm > 0.0 else 5.0
        h = hs * min(5.0, max(0.2, factor))
        if abs(h) < hmin:
            h = math.copysign(hmin, direction)
    raise IntegrationFailure(f"step budget exhausted at t = {t}")


# ---------------------------------------------------------------------------
# product-integration closure for the panel touching a power-law singularity

def _merge_nodes(synthetic: np.ndarray, mandatory: np.ndarray,
                 span: float) -> np.ndarray:
    """Union of node sets where mandatory nodes always survive; synthetic
    nodes closer than 1e-14*span to a mandatory one are dropped so the
    nonuniform Simpson weights stay finite."""
    mandatory = np.unique(mandatory)
    if mandatory.size == 0:
        return np.unique(synthetic)
    pos = np.searchsorted(mandatory, synthetic)
    gap = np.full(synthetic.size, np.inf)
    left = pos > 0
    gap[left] = np.abs(synthetic[left] - mandatory[pos[left] - 1])
    right = pos < mandatory.size
    gap[right] = np.minimum(gap[right],
                            np.abs(mandatory[pos[right]] - synthetic[right]))
    keep = synthetic[gap > 1e-14 * span]
    return np.unique(np.concatenate([keep, mandatory]))


def _closure_nodes(t_lo: float, t_hi: float, extra=()) -> np.ndarray:
    """Nodes on [t_lo, t_hi] graded toward t_hi (the singular end)."""
    u = np.linspace(0.0, 1.0, CLOSURE_POINTS)
    t = t_lo + (t_hi - t_lo) * (1.0 - (1.0 - u) ** CLOSURE_GRADING)
    t[0], t[-1] = t_lo, t_hi
    mand = np.asarray([t_lo, t_hi, *extra], dtype=float)
    mand = mand[(mand >= t_lo) & (mand <= t_hi)]
    return _merge_nodes(t, mand, t_hi - t_lo)


def _cumint(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    return cumulative_simpson(y, x=x, initial=0.0)


def _sweep_to_convergence(update, v0, w0, *, tol=1e-13, max_iter=100):
    """Run Picard sweeps until the sup-norm update settles or plateaus."""
    v, w = v0, w0
    prev = math.inf
    for _ in range(max_iter):
        v_new, w_new = update(v, w)
        delta = max(float(np.max(np.abs(v_new - v))),
                    float(np.max(np.abs(w_new - w))))
        v, w = v_new, w_new
        scale = max(1.0, float(np.max(np.abs(v))), float(np.max(np.abs(w))))
        if delta <= tol * scale:
            return v, w
        if delta >= prev and prev <= 1e-9 * scale:
            return v, w  # rounding plateau
        prev = delta
    raise NoConvergence("closure panel iteration did not settle")


def _picard_base(model, lam, mu, nodes, anchor, v_a, w_a):
    """Solve the (v, w) system on a short panel by product integration.

    ``anchor`` is "lo" (data at nodes[0]) or "hi" (data at nodes[-1]).
    """
    a_vals = np.sqrt(lam - 2.0 * model.primitive_array(nodes))
    a3 = a_vals ** 3

    def update(v, w):
        inner = _cumint(a_vals * v, nodes)
        if anchor == "hi":
            inner = inner - inner[-1]
        w_new = w_a + mu * inner
        outer = _cumint(w_new / a3, nodes)
        if anchor == "hi":
            outer = outer - outer[-1]
        return v_a + outer, w_new

    v0 = np.full(nodes.size, float(v_a))
    w0 = np.full(nodes.size, float(w_a))
    v, w = _sweep_to_convergence(update, v0, w0)
    return a_vals, a3, v, w


def _picard_linear(model, lam, mu, nodes, a_vals, a3, source_mid, source_w,
                   anchor, y_a, z_a):
    """Companion linear system y' = (z + source_mid)/a^3, z' = mu*a*y + source_w
    on the closure panel, anchored like the base system."""

    def update(y, z):
        inner = _cumint(mu * a_vals * y + source_w, nodes)
        if anchor == "hi":
            inner = inner - inner[-1]
        z_new = z_a + inner
        outer = _cumint((z_new + source_mid) / a3, nodes)
        if anchor == "hi":
            outer = outer - outer[-1]
        return y_a + outer, z_new

    y0 = np.full(nodes.size, float(y_a))
    z0 = np.full(nodes.size, float(z_a))
    return _sweep_to_convergence(update, y0, z0)


# ---------------------------------------------------------------------------
# trajectory driver

def _rhs_base(model, lam, mu, with_moments=False):
    if isinstance(model, Zero):  # constant coefficients hoist out of the loop
        inv_a3 = lam ** -1.5
        ma = mu * math.sqrt(lam)
        if with_moments:
            return lambda t, y: (y[1] * inv_a3, ma * y[0], y[0], -t * y[0])
        return lambda t, y: (y[1] * inv_a3, ma * y[0])
    speed = _speed_closure(model, lam)
    if with_moments:
        def f(t, y):
            a = speed(t)
            v = y[0]
            return (y[1] / (a * a * a), mu * a * v, v, -t * v)
        return f

    def f(t, y):
        a = speed(t)
        return (y[1] / (a * a * a), mu * a * y[0])
    return f


def _march_base(model, lam, mu, p_start, p_end, v0, w0, *, record_nodes=(),
                with_moments=False, rescale=False, rtol=DEFAULT_RTOL,
                atol=DEFAULT_ATOL):
    """March (v, w[, I1, I2]) from p_start to p_end.

    Returns (values, log_scale) where ``values`` is aligned with
    ``record_nodes`` plus a final row for p_end.  I1, I2 accumulate the mean
    and first-moment integrals of v from p_start.
    """
    record_nodes = np.asarray(list(record_nodes), dtype=float)
    dim = 4 if with_moments else 2
    y0 = np.zeros(dim)
    y0[0], y0[1] = v0, w0
    lo, hi = min(p_start, p_end), max(p_start, p_end)
    breaks = [b for b in model.panel_breakpoints() if lo < b < hi]
    f = _rhs_base(model, lam, mu, with_moments)
    singular = model.singular_at_zero and (p_start == 0.0 or p_end == 0.0)
    rows = {p_start: y0.copy()}

    if not singular:
        stops = list(record_nodes) + breaks
        targets, out, log_scale = _dp45(f, p_start, p_end, y0, rtol=rtol,
                                        atol=atol, stops=stops, rescale=rescale)
        rows.update(zip(targets, out))
    elif p_end == 0.0:
        cut = -CLOSURE_FRACTION * (-model.p0)
        stops = [p for p in record_nodes if p < cut] + breaks
        targets, out, log_scale = _dp45(f, p_start, cut, y0, rtol=rtol,
                                        atol=atol, stops=stops + [cut],
                                        rescale=rescale)
        rows.update(zip(targets, out))
        y_cut = out[-1]
        extra = record_nodes[record_nodes >= cut]
        nodes = _closure_nodes(cut, 0.0, extra=extra)
        a_vals, a3, v, w = _picard_base(model, lam, mu, nodes, "lo",
                                        y_cut[0], y_cut[1])
        if with_moments:
            m1 = y_cut[2] + _cumint(v, nodes)
            m2 = y_cut[3] + _cumint(-nodes * v, nodes)
        for i, p in enumerate(nodes):
            row = np.zeros(dim)
            row[0], row[1] = v[i], w[i]
            if with_moments:
                row[2], row[3] = m1[i], m2[i]
            rows[float(p)] = row
    else:  # p_start == 0.0, backward march away from the singular surface
        cut = -CLOSURE_FRACTION * (-model.p0)
        extra = record_nodes[record_nodes >= cut]
        nodes = _closure_nodes(cut, 0.0, extra=extra)
        a_vals, a3, v, w = _picard_base(model, lam, mu, nodes, "hi", v0, w0)
        for i, p in enumerate(nodes):
            row = np.zeros(dim)
            row[0], row[1] = v[i], w[i]
            rows[float(p)] = row
        y_cut = rows[float(nodes[0])]
        stops = [p for p in record_nodes if p < cut] + breaks
        targets, out, log_scale = _dp45(f, cut, p_end, y_cut, rtol=rtol,
                                        atol=atol, stops=stops, rescale=rescale)
        rows.update(zip(targets, out))

    values = np.empty((record_nodes.size + 1, dim))
    for j, p in enumerate(record_nodes):
        values[j] = rows[float(p)]
    values[-1] = rows[float(p_end)]
    return values, log_scale


# ---------------------------------------------------------------------------
# public operations

def solve_v1(model: VorticityModel, lam: float, mu: float,
             pgrid: np.ndarray | None = None, *, rtol=DEFAULT_RTOL,
             atol=DEFAULT_ATOL) -> SturmSolution:
    """Bed-anchored fundamental solution: v(p0) = 0, v'(p0) = 1."""
    _require_admissible(model, lam, mu)
    if pgrid is None:
        pgrid = chebyshev_pgrid(model.p0)
    pgrid = np.asarray(pgrid, dtype=float)
    speed = _speed_closure(model, lam)
    w0 = speed(model.p0) ** 3
    values, _ = _march_base(model, lam, mu, model.p0, 0.0, 0.0, w0,
                            record_nodes=pgrid, rtol=rtol, atol=atol)
    return SturmSolution(lam=lam, mu=mu, pgrid=pgrid, v=values[:-1, 0],
                         flux=values[:-1, 1], which="v1")


def solve_v2(model: VorticityModel, lam: float, mu: float, params: FluidParams,
             pgrid: np.ndarray | None = None, *, rtol=DEFAULT_RTOL,
             atol=DEFAULT_ATOL) -> SturmSolution:
    """Surface-anchored fundamental solution: v(0) = lam^(3/2),
    v'(0) = g + sigma*mu (integrated backward from the surface)."""
    _require_admissible(model, lam, mu)
    if pgrid is None:
        pgrid = chebyshev_pgrid(model.p0)
    pgrid = np.asarray(pgrid, dtype=float)
    v0 = lam ** 1.5
    w0 = v0 * (params.g + params.sigma * mu)
    values, _ = _march_base(model, lam, mu, 0.0, model.p0, v0, w0,
                            record_nodes=pgrid, rtol=rtol, atol=atol)
    return SturmSolution(lam=lam, mu=mu, pgrid=pgrid, v=values[:-1, 0],
                         flux=values[:-1, 1], which="v2")


def surface_state_v1(model: VorticityModel, lam: float, mu: float, *,
                     with_moments=False, rescale=False, rtol=DEFAULT_RTOL,
                     atol=DEFAULT_ATOL, p_start=None, v0=0.0, vp0=1.0):
    """March v1-type data up to the surface without recording a grid.

    Returns (state, log_scale); state = (v(0), w(0)[, I1, I2]) with the
    moment accumulators I1 = integral of v and I2 = integral of (-p) v.
    The start point and initial data may be overridden (comparison runs on
    subintervals [p1, 0] use v(p1) = A, v'(p1) = B).
    """
    start = model.p0 if p_start is None else p_start
    speed = _speed_closure(model, lam)
    w0 = speed(start) ** 3 * vp0
    values, log_scale = _march_base(
        model, lam, mu, start, 0.0, v0, w0, record_nodes=(),
        with_moments=with_moments, rescale=rescale, rtol=rtol, atol=atol)
    return values[-1], log_scale


def _descale(raw: float, log_scale: float) -> float:
    if log_scale == 0.0 or raw == 0.0:
        return float(raw)
    total = math.log(abs(raw)) + log_scale
    if total > 700.0:
        return math.copysign(math.inf, raw)
    return math.copysign(math.exp(total), raw)


def wronskian_at_surface(model: VorticityModel, lam: float, mu: float,
                         params: FluidParams, *, rescale=False,
                         rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> DispersionPoint:
    """Surface Wronskian W(lam, mu) = lam^(3/2) v1'(0) - (g + sigma*mu) v1(0).

    Its zeros in mu mark the parameters where the linearized operator has a
    nontrivial kernel.  With ``rescale`` the value survives exponentially
    growing trajectories (returned as +/-inf if it truly overflows).
    """
    _require_admissible(model, lam, mu)
    end, log_scale = surface_state_v1(model, lam, mu, rescale=rescale,
                                      rtol=rtol, atol=atol)
    # a^3(0) = lam^(3/2), so lam^(3/2) v1'(0) is exactly the flux at 0
    raw = end[1] - (params.g + params.sigma * mu) * end[0]
    return DispersionPoint(lam=lam, mu=mu, W=_descale(raw, log_scale))


def _rhs_partials(model, lam, mu):
    speed = _speed_closure(model, lam)

    def f(t, y):
        a = speed(t)
        a3 = a * a * a
        v, w, vl, wl, vm, wm = y[0], y[1], y[2], y[3], y[4], y[5]
        return (
            w / a3,
            mu * a * v,
            (wl - 1.5 * w / (a * a)) / a3,
            mu * (a * vl + v / (2.0 * a)),
            wm / a3,
            mu * a * vm + a * v,
            a * v * v,
        )
    return f


def wronskian_partials(model: VorticityModel, lam: float, mu: float,
                       params: FluidParams, *, rtol=DEFAULT_RTOL,
                       atol=DEFAULT_ATOL) -> DispersionPoint:
    """Wronskian together with its analytic slopes in lam and mu.

    The slopes come from the variational systems obtained by differentiating
    the flux-form ODE in each parameter (the lam-derivative of the
    coefficient is 1/(2a)).  At a root the mu-slope is cross-checked against
    the quadrature identity
    W_mu = (integral of a v1^2 - sigma v1(0)^2) / v1(0);
    a mismatch raises CollinearityViolation.
    """
    _require_admissible(model, lam, mu)
    speed = _speed_closure(model, lam)
    a_b = speed(model.p0)
    y0 = np.array([0.0, a_b ** 3, 0.0, 1.5 * a_b, 0.0, 0.0, 0.0])
    f = _rhs_partials(model, lam, mu)
    breaks = list(model.panel_breakpoints())
    if model.singular_at_zero:
        cut = -CLOSURE_FRACTION * (-model.p0)
        _, out, _ = _dp45(f, model.p0, cut, y0, rtol=rtol, atol=atol,
                          stops=breaks)
        y = out[-1]
        nodes = _closure_nodes(cut, 0.0)
        a_vals, a3, v, w = _picard_base(model, lam, mu, nodes, "lo", y[0], y[1])
        vl, wl = _picard_linear(model, lam, mu, nodes, a_vals, a3,
                                -1.5 * w / (a_vals * a_vals),
                                mu * v / (2.0 * a_vals), "lo", y[2], y[3])
        vm, wm = _picard_linear(model, lam, mu, nodes, a_vals, a3,
                                np.zeros_like(v), a_vals * v, "lo", y[4], y[5])
        iq = y[6] + _cumint(a_vals * v * v, nodes)[-1]
        ysurf = np.array([v[-1], w[-1], vl[-1], wl[-1], vm[-1], wm[-1], iq])
    else:
        _, out, _ = _dp45(f, model.p0, 0.0, y0, rtol=rtol, atol=atol,
                          stops=breaks)
        ysurf = out[-1]

    v0s, w0s, vl0, wl0, vm0, wm0, iq = ysurf
    gs = params.g + params.sigma * mu
    W = w0s - gs * v0s
    W_lambda = wl0 - gs * vl0
    W_mu = wm0 - params.sigma * v0s - gs * vm0
    point = DispersionPoint(lam=lam, mu=mu, W=float(W),
                            W_lambda=float(W_lambda), W_mu=float(W_mu))
    w_scale = max(1.0, abs(w0s), abs(gs * v0s))
    if abs(W) <= 1e-8 * w_scale and v0s != 0.0:
        alt = (iq - params.sigma * v0s * v0s) / v0s
        # away from the exact root the identity carries a W * v1_mu/v1 slack
        tol = (QQQ_TOL * max(1.0, abs(W_mu), abs(alt))
               + 2.0 * abs(W * vm0 / v0s))
        if abs(W_mu - alt) > tol:
            raise CollinearityViolation(
                f"mu-slope {W_mu:.6e} disagrees with quadrature identity "
                f"{alt:.6e} at the root (lam={lam}, mu={mu})")
    return point


def volterra_oracle_v1(model: VorticityModel, lam: float, mu: float,
                       pgrid: np.ndarray | None = None, *, tol: float = 1e-12,
                       max_sweeps: int = 200) -> SturmSolution:
    """Independent v1 solver: successive substitution on the integral form.

    v is rebuilt by alternating the two cumulative integrals of the
    equivalent Volterra equation with spline product integration until the
    sup-norm update falls below ``tol``.  Entirely quadrature-based, so it
    shares no machinery with the Runge-Kutta path above.
    """
    _require_admissible(model, lam, mu)
    if pgrid is None:
        pgrid = chebyshev_pgrid(model.p0)
    pgrid = np.asarray(pgrid, dtype=float)
    p0 = model.p0
    if model.singular_at_zero:
        u = np.linspace(0.0, 1.0, 3072)
        base = p0 * (1.0 - u) ** CLOSURE_GRADING
        base[0], base[-1] = p0, 0.0
    else:
        base = np.linspace(p0, 0.0, 3072)
    mand = np.concatenate([pgrid, np.asarray(model.panel_breakpoints()),
                           [p0, 0.0]])
    mand = mand[(mand >= p0) & (mand <= 0.0)]
    nodes = _merge_nodes(base, mand, -p0)
    a_vals = np.sqrt(lam - 2.0 * model.primitive_array(nodes))
    a3 = a_vals ** 3
    inv_a3 = 1.0 / a3

    def cumspline(y):
        anti = CubicSpline(nodes, y).antiderivative()(nodes)
        return anti - anti[0]

    first = a3[0] * cumspline(inv_a3)
    v = first.copy()
    for _ in range(max_sweeps):
        inner = cumspline(a_vals * v)
        v_new = first + mu * cumspline(inner * inv_a3)
        delta = float(np.max(np.abs(v_new - v)))
        v = v_new
        if delta <= tol * max(1.0, float(np.max(np.abs(v)))):
            break
    else:
        raise NoConvergence(f"no convergence after {max_sweeps} sweeps")
    flux = a3[0] + mu * cumspline(a_vals * v)
    sel = np.searchsorted(nodes, pgrid)
    return SturmSolution(lam=lam, mu=mu, pgrid=pgrid, v=v[sel], flux=flux[sel],
                         which="v1")


def wronskian_constancy_defect(sol1: SturmSolution, sol2: SturmSolution) -> float:
    """Relative variation of v1*w2 - v2*w1 across the shared grid.

    The combination equals a^3 times the Wronskian of the two solutions and
    is an exact invariant of the ODE; its drift measures integration error.
    """
    if sol1.pgrid.shape != sol2.pgrid.shape or np.any(sol1.pgrid != sol2.pgrid):
        raise ParameterError("solutions must share a grid")
    q = sol1.v * sol2.flux - sol2.v * sol1.flux
    scale = max(float(np.max(np.abs(q))), 1e-300)
    return float((np.max(q) - np.min(q)) / scale)

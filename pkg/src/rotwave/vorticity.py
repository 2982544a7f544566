"""Vorticity models on the strip (p0, 0) and their primitives.

A model represents the vorticity expressed along stream-function levels,
gamma(p) for p in (p0, 0).  Models may be unbounded near p = 0 as long as
they stay integrable; the primitive is always Hölder continuous, so every
downstream quantity is computed from the primitive rather than from
pointwise vorticity values.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import quadrature
from .errors import DivergentNorm, DomainError, ParameterError, SingularPoint


@dataclass(frozen=True)
class VorticityModel:
    """Base class; concrete models implement value/primitive closed forms."""

    p0: float

    def __post_init__(self):
        if not self.p0 < 0:
            raise ParameterError(f"p0 must be negative, got {self.p0}")

    # -- overridable hooks -------------------------------------------------
    @property
    def singular_at_zero(self) -> bool:
        return False

    def panel_breakpoints(self) -> tuple[float, ...]:
        """Interior p-values where the model loses smoothness."""
        return ()

    def value_array(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def primitive_array(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- uniform scalar interface ------------------------------------------
    def value(self, p: float) -> float:
        self._check_domain(p)
        if self.singular_at_zero and p == 0.0:
            raise SingularPoint("vorticity is unbounded at p = 0")
        return float(self.value_array(np.asarray([p]))[0])

    def primitive(self, p: float) -> float:
        self._check_domain(p)
        return float(self.primitive_array(np.asarray([p]))[0])

    def _check_domain(self, p: float) -> None:
        if not (self.p0 <= p <= 0.0):
            raise DomainError(f"p = {p} outside [{self.p0}, 0]")


@dataclass(frozen=True)
class Zero(VorticityModel):
    """Irrotational flow, gamma = 0."""

    def value_array(self, p):
        return np.zeros_like(np.asarray(p, dtype=float))

    def primitive_array(self, p):
        return np.zeros_like(np.asarray(p, dtype=float))


@dataclass(frozen=True)
class Constant(VorticityModel):
    """Uniform vorticity gamma = c."""

    c: float = 0.0

    def value_array(self, p):
        return np.full_like(np.asarray(p, dtype=float), self.c)

    def primitive_array(self, p):
        return self.c * np.asarray(p, dtype=float)


@dataclass(frozen=True)
class PowerLaw(VorticityModel):
    """Unbounded profile gamma(p) = delta * (-p)^(-1/(k*r)).

    Requires k, r in (1, 3) with k*r < 3, which keeps gamma in L_r and the
    primitive finite on [p0, 0].
    """

    delta: float = 1.0
    k: float = 1.5
    r: float = 1.5

    def __post_init__(self):
        super().__post_init__()
        if not self.delta > 0:
            raise ParameterError(f"delta must be positive, got {self.delta}")
        if not (1.0 < self.k < 3.0 and 1.0 < self.r < 3.0):
            raise ParameterError(f"k and r must lie in (1, 3), got k={self.k}, r={self.r}")
        if not self.k * self.r < 3.0:
            raise ParameterError(f"k*r must be < 3, got {self.k * self.r}")

    @property
    def exponent(self) -> float:
        return 1.0 / (self.k * self.r)

    @property
    def singular_at_zero(self) -> bool:
        return True

    def value_array(self, p):
        p = np.asarray(p, dtype=float)
        return self.delta * (-p) ** (-self.exponent)

    def primitive_array(self, p):
        # antiderivative of delta*(-s)^(-beta) vanishing at 0
        p = np.asarray(p, dtype=float)
        beta = self.exponent
        return -self.delta * (-p) ** (1.0 - beta) / (1.0 - beta)


@dataclass(frozen=True)
class PiecewiseConstant(VorticityModel):
    """Step profile: gamma = values[i] on (edges[i], edges[i+1]).

    ``breakpoints`` are the interior jump locations, strictly increasing in
    (p0, 0); ``values`` has one more entry than ``breakpoints``.
    """

    breakpoints: tuple[float, ...] = ()
    values: tuple[float, ...] = (0.0,)

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "breakpoints", tuple(float(b) for b in self.breakpoints))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        bps = self.breakpoints
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ParameterError("breakpoints must be strictly increasing")
        if bps and not (self.p0 < bps[0] and bps[-1] < 0.0):
            raise ParameterError("breakpoints must lie strictly inside (p0, 0)")
        if len(self.values) != len(bps) + 1:
            raise ParameterError("need exactly len(breakpoints)+1 values")

    def panel_breakpoints(self):
        return self.breakpoints

    def _edges(self) -> np.ndarray:
        return np.array([self.p0, *self.breakpoints, 0.0])

    def value_array(self, p):
        p = np.asarray(p, dtype=float)
        idx = np.clip(np.searchsorted(self._edges(), p, side="right") - 1, 0,
                      len(self.values) - 1)
        return np.asarray(self.values, dtype=float)[idx]

    def primitive_array(self, p):
        p = np.asarray(p, dtype=float)
        edges = self._edges()
        vals = np.asarray(self.values, dtype=float)
        # primitive at the panel edges, anchored at Gamma(0) = 0
        gamma_edges = np.zeros(edges.size)
        widths = np.diff(edges)
        gamma_edges[:-1] = -np.cumsum((vals * widths)[::-1])[::-1]
        idx = np.clip(np.searchsorted(edges, p, side="right") - 1, 0, vals.size - 1)
        return gamma_edges[idx] + vals[idx] * (p - edges[idx])


@dataclass(frozen=True)
class Tabulated(VorticityModel):
    """Vorticity sampled at nodes, interpolated with order 0 or 1.

    Outside the node range the nearest sample is extended as a constant.
    """

    nodes: tuple[float, ...] = (-1.0, 0.0)
    values: tuple[float, ...] = (0.0, 0.0)
    order: int = 1
    _edge_primitive: tuple[float, ...] = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        super().__post_init__()
        object.__setattr__(self, "nodes", tuple(float(x) for x in self.nodes))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.nodes) != len(self.values) or len(self.nodes) < 2:
            raise ParameterError("need at least two nodes with matching values")
        if any(x2 <= x1 for x1, x2 in zip(self.nodes, self.nodes[1:])):
            raise ParameterError("nodes must be strictly increasing")
        if self.order not in (0, 1):
            raise ParameterError("interpolation order must be 0 or 1")
        object.__setattr__(self, "_edge_primitive", self._build_edge_primitive())

    def panel_breakpoints(self):
        return tuple(x for x in self.nodes if self.p0 < x < 0.0)

    def _build_edge_primitive(self) -> tuple[float, ...]:
        # exact primitive of the interpolant at the panel edges [p0, nodes, 0]
        edges = self._all_edges()
        vals = np.zeros(edges.size - 1)
        for i in range(edges.size - 1):
            vals[i] = self._panel_integral(edges[i], edges[i + 1])
        cum = np.concatenate([[0.0], np.cumsum(vals)])
        anchor = np.interp(0.0, edges, cum)  # edges include 0
        return tuple(cum - anchor)

    def _all_edges(self) -> np.ndarray:
        pts = sorted({self.p0, 0.0, *[x for x in self.nodes if self.p0 <= x <= 0.0]})
        return np.asarray(pts)

    def _interp(self, p: np.ndarray) -> np.ndarray:
        x = np.asarray(self.nodes)
        v = np.asarray(self.values)
        if self.order == 1:
            return np.interp(p, x, v)
        idx = np.clip(np.searchsorted(x, p, side="right") - 1, 0, v.size - 1)
        return v[idx]

    def _panel_integral(self, a: float, b: float) -> float:
        # interpolant is linear (order 1) or constant (order 0) between edges
        mid = 0.5 * (a + b)
        if self.order == 1:
            ga, gb = self._interp(np.asarray([a, b]))
            return 0.5 * (ga + gb) * (b - a)
        return float(self._interp(np.asarray([mid]))[0]) * (b - a)

    def value_array(self, p):
        return self._interp(np.asarray(p, dtype=float))

    def primitive_array(self, p):
        p = np.asarray(p, dtype=float)
        edges = self._all_edges()
        base = np.asarray(self._edge_primitive)
        out = np.empty_like(p)
        for i, pi in np.ndenumerate(p):
            j = min(max(bisect.bisect_right(edges, pi) - 1, 0), edges.size - 2)
            out[i] = base[j] + self._panel_integral(edges[j], min(pi, edges[j + 1]))
        return out


def model_from_json(spec: dict, p0: float) -> VorticityModel:
    """Build a model from its JSON description (see the CLI docs)."""
    kind = spec.get("type")
    if kind == "zero":
        return Zero(p0)
    if kind == "constant":
        return Constant(p0, c=float(spec["value"]))
    if kind == "power_law":
        return PowerLaw(p0, delta=float(spec["delta"]), k=float(spec["k"]),
                        r=float(spec["r"]))
    if kind == "piecewise":
        return PiecewiseConstant(p0, breakpoints=tuple(spec["breakpoints"]),
                                 values=tuple(spec["values"]))
    if kind == "tabulated":
        return Tabulated(p0, nodes=tuple(spec["nodes"]), values=tuple(spec["values"]),
                         order=int(spec.get("order", 1)))
    raise ParameterError(f"unknown vorticity type {kind!r}")


# ---------------------------------------------------------------------------
# module-level operations

def gamma_eval(model: VorticityModel, p: float) -> float:
    """Pointwise vorticity gamma(p)."""
    return model.value(p)


def gamma_primitive(model: VorticityModel, p: float) -> float:
    """Primitive of the vorticity anchored at the surface: integral of gamma
    from 0 down to p.  Exactly 0 at p = 0."""
    return model.primitive(p)


def gamma_primitive_quad(model: VorticityModel, p: float,
                         atol: float = quadrature.DEFAULT_ATOL,
                         rtol: float = quadrature.DEFAULT_RTOL) -> float:
    """Primitive recomputed by adaptive quadrature (cross-check path)."""
    model._check_domain(p)
    if p == 0.0:
        return 0.0
    val = quadrature.integrate(
        lambda s: float(model.value_array(np.asarray([s]))[0]), p, 0.0,
        breakpoints=model.panel_breakpoints(),
        singular_right=model.singular_at_zero,
        atol=atol, rtol=rtol, f_vec=model.value_array,
    )
    return -val


@lru_cache(maxsize=512)
def gamma_max_primitive(model: VorticityModel, p0: float | None = None) -> float:
    """Maximum of the primitive over [p0, 0]; nonnegative by anchoring."""
    if p0 is None:
        p0 = model.p0
    grid = np.linspace(p0, 0.0, 2048)
    cand = np.concatenate([grid, np.asarray(model.panel_breakpoints()), [p0, 0.0]])
    cand = cand[(cand >= p0) & (cand <= 0.0)]
    vals = model.primitive_array(cand)
    j = int(np.argmax(vals))
    best_x, best = float(cand[j]), float(vals[j])
    # refine around the discrete maximizer on the continuous primitive
    order = np.argsort(cand)
    sorted_c = cand[order]
    pos = int(np.searchsorted(sorted_c, best_x))
    lo = sorted_c[max(pos - 1, 0)]
    hi = sorted_c[min(pos + 1, sorted_c.size - 1)]
    if hi > lo:
        x_ref, val_ref = quadrature.golden_max(
            lambda x: float(model.primitive_array(np.asarray([x]))[0]), lo, hi)
        if val_ref > best:
            best = val_ref
    return max(best, 0.0)


def gamma_lr_norm(model: VorticityModel, r: float) -> float:
    """L_r norm of gamma over (p0, 0)."""
    if not r > 1:
        raise ParameterError(f"r must exceed 1, got {r}")
    if isinstance(model, Zero):
        return 0.0
    if isinstance(model, Constant):
        return abs(model.c) * (-model.p0) ** (1.0 / r)
    if isinstance(model, PowerLaw):
        # |gamma|^r = delta^r * (-p)^(-r*beta); integrable iff r*beta < 1
        expo = r * model.exponent
        if expo >= 1.0:
            raise DivergentNorm(
                f"gamma^r has endpoint exponent {expo:.3f} >= 1; norm diverges")
        total = model.delta ** r * (-model.p0) ** (1.0 - expo) / (1.0 - expo)
        return total ** (1.0 / r)

    def integrand(s):
        return abs(float(model.value_array(np.asarray([s]))[0])) ** r

    def integrand_vec(s):
        return np.abs(model.value_array(np.asarray(s))) ** r

    coarse = quadrature.integrate(
        integrand, model.p0, 0.0, breakpoints=model.panel_breakpoints(),
        singular_right=model.singular_at_zero, f_vec=integrand_vec,
        atol=1e-13, rtol=1e-11)
    # refinement check: split the panel nearest the potential singularity
    edge = -1e-6 * (-model.p0)
    fine = quadrature.integrate(
        integrand, model.p0, edge, breakpoints=model.panel_breakpoints(),
        f_vec=integrand_vec, atol=1e-13, rtol=1e-11)
    fine += quadrature.integrate(
        integrand, edge, 0.0, singular_right=model.singular_at_zero,
        f_vec=integrand_vec, atol=1e-13, rtol=1e-11)
    if not np.isfinite(coarse) or not np.isfinite(fine) or (
            abs(fine - coarse) > 1e-6 * max(1.0, abs(coarse))):
        raise DivergentNorm("norm estimate unstable under refinement")
    return coarse ** (1.0 / r)

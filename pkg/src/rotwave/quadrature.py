"""Panel-based quadrature with singular-endpoint handling.

Smooth panels go through adaptive Gauss-Kronrod (QUADPACK via scipy);
panels that touch a flagged endpoint singularity use a tanh-sinh
substitution, which converges for integrands whose primitive is Hölder
continuous even when the integrand itself is unbounded.
"""

from __future__ import annotations

import math
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate as _si

from .errors import QuadratureFailure

DEFAULT_ATOL = 1e-12
DEFAULT_RTOL = 1e-10

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _panel_edges(a: float, b: float, breakpoints: Iterable[float]) -> list[float]:
    pts = sorted(p for p in set(breakpoints) if a < p < b)
    return [a, *pts, b]


def integrate(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    breakpoints: Sequence[float] = (),
    singular_left: bool = False,
    singular_right: bool = False,
    atol: float = DEFAULT_ATOL,
    rtol: float = DEFAULT_RTOL,
    f_vec: Callable[[np.ndarray], np.ndarray] | None = None,
) -> float:
    """Integrate f over [a, b], a <= b, splitting at interior breakpoints.

    ``singular_left``/``singular_right`` flag a known endpoint singularity of
    f (or of its derivatives); the touching panel is then integrated by
    tanh-sinh instead of Gauss-Kronrod.  ``f_vec`` is an optional vectorized
    version of f used on tanh-sinh panels.
    """
    if b < a:
        return -integrate(
            f, b, a, breakpoints=breakpoints, singular_left=singular_right,
            singular_right=singular_left, atol=atol, rtol=rtol, f_vec=f_vec,
        )
    if a == b:
        return 0.0
    edges = _panel_edges(a, b, breakpoints)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        sing = (singular_left and lo == edges[0]) or (singular_right and hi == edges[-1])
        if sing:
            total += _tanh_sinh_panel(f, lo, hi, atol=atol, rtol=rtol, f_vec=f_vec)
        else:
            total += _gk_panel(f, lo, hi, atol=atol, rtol=rtol)
    return total


def _gk_panel(f, lo, hi, *, atol, rtol) -> float:
    val, err = _si.quad(f, lo, hi, epsabs=atol, epsrel=rtol, limit=200)
    if not np.isfinite(val):
        raise QuadratureFailure(f"non-finite quadrature result on [{lo}, {hi}]")
    if err > 100.0 * max(atol, rtol * abs(val)) and err > 1e-8 * max(1.0, abs(val)):
        raise QuadratureFailure(
            f"Gauss-Kronrod error estimate {err:.3e} on [{lo}, {hi}] "
            f"exceeds tolerance (value {val:.6e})"
        )
    return val


def _tanh_sinh_panel(f, lo, hi, *, atol, rtol, f_vec=None) -> float:
    g = f_vec if f_vec is not None else np.vectorize(f, otypes=[float])
    res = _si.tanhsinh(g, lo, hi, atol=atol, rtol=rtol)
    val = float(res.integral)
    if not res.success and not np.isfinite(val):
        raise QuadratureFailure(f"tanh-sinh failed on [{lo}, {hi}]")
    return val


def cumulative(
    f: Callable[[float], float],
    nodes: np.ndarray,
    *,
    breakpoints: Sequence[float] = (),
    singular_right: bool = False,
    atol: float = DEFAULT_ATOL,
    rtol: float = DEFAULT_RTOL,
    f_vec: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Cumulative integral of f from nodes[0] along an ascending node set.

    Returns F with F[0] = 0 and F[j] = integral of f over [nodes[0], nodes[j]].
    The node set itself provides the panel structure; extra breakpoints are
    honoured inside panels.  ``singular_right`` applies tanh-sinh on the
    final panel (singularity at nodes[-1]).
    """
    nodes = np.asarray(nodes, dtype=float)
    out = np.zeros_like(nodes)
    extra = sorted(breakpoints)
    for j in range(1, nodes.size):
        lo, hi = nodes[j - 1], nodes[j]
        inner = [p for p in extra if lo < p < hi]
        sing = singular_right and j == nodes.size - 1
        out[j] = out[j - 1] + integrate(
            f, lo, hi, breakpoints=inner, singular_right=sing,
            atol=atol, rtol=rtol, f_vec=f_vec,
        )
    return out


def golden_max(
    f: Callable[[float], float], a: float, b: float, *, tol: float = 1e-12
) -> tuple[float, float]:
    """Golden-section maximization of a continuous unimodal-near-peak f."""
    lo, hi = float(a), float(b)
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol * max(1.0, abs(lo), abs(hi)):
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
    xm = 0.5 * (lo + hi)
    return xm, f(xm)

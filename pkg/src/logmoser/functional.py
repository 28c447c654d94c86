"""The nonlocal functional Phi and its threshold constants.

Two independent evaluators are provided:

* :func:`phi_radial` works in the radius, using the radial (Newton) reduction
  Phi = 2 omega^2 int_0^1 r^{N-1} F(u) log(1/r) int_0^r rho^{N-1} F(u) drho dr.
* :func:`phi_transformed` works in t = -N log r, where
  Phi = (2 omega^2/N^3) int_0^inf y E(y) int_y^inf E(x) dx dy,
  E(t) = exp(w^{N/(N-1)}(t) - t) g(c w(t)) / (1 + c w(t))^{N/(2(N-1))}.

The t-form keeps every exponent <= 0 for admissible profiles, so it is the
only one usable on concentrating sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ._numerics import exact_sum, gauss_legendre, panel_edges
from .constants import DimensionContext, F_value, Nonlinearity
from .profiles import RadialProfile, TransformedProfile

CHUNK = 4096


class QuadratureError(RuntimeError):
    """The requested accuracy could not be certified."""


@dataclass(frozen=True)
class QuadratureConfig:
    panels: int = 2
    nodes_per_panel: int = 8
    tail_cut: float = 1e-13
    tol_rel: float = 1e-7
    max_width: float = 0.5
    max_refine: int = 5

    def __post_init__(self):
        if self.panels < 1 or self.nodes_per_panel < 2 or self.tol_rel <= 0:
            raise ValueError("need panels >= 1, nodes_per_panel >= 2, tol_rel > 0")
        if self.max_width <= 0 or self.tail_cut < 0:
            raise ValueError("max_width must be > 0 and tail_cut >= 0")

    def refined(self, level: int) -> "QuadratureConfig":
        k = 2**level
        return replace(self, panels=self.panels * k, max_width=self.max_width / k)


@dataclass
class PhiReport:
    value: float
    tail_bracket: float = 0.0
    refinements: int = 0
    panels: int = 0
    change: float = 0.0


# --------------------------------------------------------------------------
# ordered double integrals on composite Gauss-Legendre panels


@dataclass
class PanelSums:
    edges: np.ndarray
    outer: np.ndarray   # integral of the outer factor per panel
    inner: np.ndarray   # integral of the inner factor per panel
    tri: np.ndarray     # within-panel ordered part


def panel_sums(
    f_outer: Callable[[np.ndarray], np.ndarray],
    f_inner: Callable[[np.ndarray], np.ndarray],
    edges: np.ndarray,
    order: int,
    inner_after: bool,
    skip_below: float = 0.0,
) -> PanelSums:
    """Per-panel pieces of the ordered integral of f_outer(s) f_inner(s').

    ``inner_after`` selects the region s' >= s (otherwise s' <= s).  Panels
    whose factors are all below ``skip_below`` times the global maximum get
    no nested quadrature for the within-panel triangle.
    """
    x, w = gauss_legendre(order)
    a, b = edges[:-1], edges[1:]
    h = b - a
    nodes = a[:, None] + h[:, None] * x[None, :]
    fo = f_outer(nodes)
    fi = f_inner(nodes)
    outer = (fo * w).sum(axis=1) * h
    inner = (fi * w).sum(axis=1) * h
    tri = np.zeros_like(outer)
    scale = max(float(np.max(np.abs(fo), initial=0.0)), float(np.max(np.abs(fi), initial=0.0)))
    live = np.flatnonzero(
        (np.max(np.abs(fo), axis=1) > skip_below * scale)
        & (np.max(np.abs(fi), axis=1) > skip_below * scale)
    )
    for start in range(0, live.size, CHUNK):
        idx = live[start:start + CHUNK]
        s = nodes[idx]                              # (P, q) outer nodes
        if inner_after:
            lo, span = s, (b[idx, None] - s)
        else:
            lo, span = a[idx, None] + 0.0 * s, (s - a[idx, None])
        z = lo[:, :, None] + span[:, :, None] * x[None, None, :]
        fz = f_inner(z.reshape(len(idx), -1)).reshape(z.shape)
        inner_partial = (fz * w).sum(axis=2) * span
        tri[idx] = (fo[idx] * inner_partial * w).sum(axis=1) * h[idx]
    return PanelSums(edges, outer, inner, tri)


def ordered_total(ps: PanelSums, inner_after: bool, inner_boundary: float = 0.0) -> float:
    """Combine panel sums; ``inner_boundary`` is the inner mass outside the panels."""
    if inner_after:
        rest = np.concatenate([np.cumsum(ps.inner[::-1])[::-1][1:], [0.0]]) + inner_boundary
    else:
        rest = np.concatenate([[0.0], np.cumsum(ps.inner)[:-1]]) + inner_boundary
    return exact_sum(ps.tri) + exact_sum(ps.outer * rest)


# --------------------------------------------------------------------------
# transformed evaluator


def integrand_E(ctx: DimensionContext, nl: Nonlinearity, w, F: Callable | None = None):
    """E(t) for the profile w (anything callable on t arrays)."""
    c, p, beta = ctx.u_from_w, ctx.p, ctx.beta

    def E(t):
        wt = w(t)
        u = c * wt
        if F is not None:
            return np.exp(-t) * F(u)
        with np.errstate(over="raise"):
            expo = np.exp(wt**p - t)
        return expo * nl.g(u) / (1.0 + u) ** beta

    return E


def tail_factor(ctx: DimensionContext, nl: Nonlinearity, W: float, T: float, F: Callable | None = None) -> float:
    """K e^{-T} where E(t) = K e^{-t} on a plateau w = W beyond T."""
    u = ctx.u_from_w * W
    if F is not None:
        return float(F(np.asarray(u))) * math.exp(-T)
    return math.exp(W**ctx.p - T) * float(nl.g(np.asarray(u))) / (1.0 + u) ** ctx.beta


def t_breakpoints(w: TransformedProfile, extra=()) -> np.ndarray:
    br = np.asarray(w.t_grid, dtype=float)
    if len(extra):
        ex = np.asarray([e for e in extra if 0.0 < e < w.t_max], dtype=float)
        br = np.union1d(br, ex)
    return br


def _transformed_once(ctx, nl, w, q: QuadratureConfig, F, extra=()):
    E = integrand_E(ctx, nl, w, F)
    edges = panel_edges(t_breakpoints(w, extra), q.panels, q.max_width)
    ps = panel_sums(lambda t: t * E(t), E, edges, q.nodes_per_panel, True, q.tail_cut)
    return ps


def transformed_tail(ctx, nl, w: TransformedProfile, ps: PanelSums, F=None, plateau: float | None = None):
    """Closed-form plateau contributions beyond T_max: (total, bracket)."""
    T = w.t_max
    W_T = float(w(np.asarray(T)))
    kT = tail_factor(ctx, nl, W_T, T, F)
    total_outer = exact_sum(ps.outer)

    def contribution(k):
        return total_outer * k + k * k * (2.0 * T + 1.0) / 4.0

    base = contribution(kT)
    bracket = 0.0
    if plateau is not None and math.isfinite(plateau) and plateau != W_T:
        bracket = abs(contribution(tail_factor(ctx, nl, plateau, T, F)) - base)
    return base, kT, bracket


def evaluate_transformed(
    ctx: DimensionContext,
    nl: Nonlinearity,
    w: TransformedProfile,
    q: QuadratureConfig = QuadratureConfig(),
    F: Callable | None = None,
) -> PhiReport:
    """Phi via the half-line representation, refined until two levels agree."""
    if w.N != ctx.N:
        raise ValueError("profile dimension does not match context")
    if w.tail_slope > 0:
        raise ValueError("phi_transformed needs a flat tail (finite energy)")
    prev = None
    for level in range(q.max_refine + 1):
        ql = q.refined(level)
        try:
            ps = _transformed_once(ctx, nl, w, ql, F)
        except FloatingPointError as exc:
            raise QuadratureError("integrand overflow: profile is far outside the unit ball") from exc
        body = ordered_total(ps, True, 0.0)
        tail, kT, bracket = transformed_tail(ctx, nl, w, ps, F, getattr(w, "exact_plateau", None))
        # the within-tail part of the cross term is already in `tail`
        val = ctx.phi_prefactor * (body + tail)
        bracket *= ctx.phi_prefactor
        if prev is not None:
            change = abs(val - prev)
            if change <= q.tol_rel * abs(val) or val == prev:
                if bracket > q.tol_rel * abs(val):
                    raise QuadratureError(f"tail bracket {bracket:.3e} exceeds tolerance")
                return PhiReport(val, bracket, level, len(ps.edges) - 1, change)
        prev = val
    raise QuadratureError(
        f"no convergence to tol_rel={q.tol_rel:g} after {q.max_refine} refinements "
        f"(last change {abs(val - prev):.3e} of {val:.6g})"
    )


def phi_transformed(ctx, nl, w, q: QuadratureConfig = QuadratureConfig(), F=None) -> float:
    return evaluate_transformed(ctx, nl, w, q, F).value


def phi_transformed_fixed(ctx, nl, w, q: QuadratureConfig = QuadratureConfig(), F=None) -> float:
    """Single quadrature level, no refinement loop.

    A smooth function of the node values, which is what finite-difference
    gradients need; the adaptive evaluator can jump between levels.
    """
    try:
        ps = _transformed_once(ctx, nl, w, q, F)
    except FloatingPointError as exc:
        raise QuadratureError("integrand overflow") from exc
    tail, _, _ = transformed_tail(ctx, nl, w, ps, F)
    return ctx.phi_prefactor * (ordered_total(ps, True, 0.0) + tail)


# --------------------------------------------------------------------------
# radial evaluator


def _radial_factors(ctx, nl, p: RadialProfile, F):
    N = ctx.N

    def Fu(r):
        u = p(r)
        if F is not None:
            return F(u)
        return F_value(ctx, nl, u)

    def inner(r):
        return r ** (N - 1) * Fu(r)

    def outer(r):
        return r ** (N - 1) * Fu(r) * np.log(1.0 / r)

    return Fu, inner, outer


def radial_edges(p: RadialProfile, q: QuadratureConfig) -> np.ndarray:
    # panels uniform in log r inside each piece; nodes are still placed in r
    logs = panel_edges(np.log(p.r_grid), q.panels, q.max_width / p.N)
    edges = np.exp(logs)
    edges[-1] = 1.0
    return edges


def _log_moment(a: float, m: int) -> float:
    """int_0^a r^m log(1/r) dr."""
    k = m + 1
    return a**k / k * (math.log(1.0 / a) + 1.0 / k)


def _radial_once(ctx, nl, p, q, F):
    Fu, inner, outer = _radial_factors(ctx, nl, p, F)
    N, r0 = ctx.N, p.r_min
    F0 = float(Fu(np.asarray(r0)))
    edges = radial_edges(p, q)
    ps = panel_sums(outer, inner, edges, q.nodes_per_panel, False, q.tail_cut)
    core_mass = F0 * r0**N / N
    core = F0 * F0 / N * _log_moment(r0, 2 * N - 1)
    total = core + ordered_total(ps, False, core_mass)
    return 2.0 * ctx.omega**2 * total


def evaluate_radial(
    ctx: DimensionContext,
    nl: Nonlinearity,
    p: RadialProfile,
    q: QuadratureConfig = QuadratureConfig(),
    F: Callable | None = None,
) -> PhiReport:
    """Phi in the radial variable.

    The core [0, r_0] carries a constant value, so its contribution (and the
    log(1/r) singularity at the origin) is integrated in closed form.
    """
    if p.N != ctx.N:
        raise ValueError("profile dimension does not match context")
    prev = None
    for level in range(q.max_refine + 1):
        val = _radial_once(ctx, nl, p, q.refined(level), F)
        if prev is not None:
            change = abs(val - prev)
            if change <= q.tol_rel * abs(val) or val == prev:
                return PhiReport(val, 0.0, level, 0, change)
        prev = val
    raise QuadratureError(f"radial quadrature did not reach tol_rel={q.tol_rel:g}")


def phi_radial(ctx, nl, p, q: QuadratureConfig = QuadratureConfig(), F=None) -> float:
    return evaluate_radial(ctx, nl, p, q, F).value


def l1_norm_F(ctx, nl, p: RadialProfile, q: QuadratureConfig = QuadratureConfig(), F=None) -> float:
    """||F(u)||_{L^1(B_1)} = omega int_0^1 r^{N-1} F(u(r)) dr."""
    Fu, inner, _ = _radial_factors(ctx, nl, p, F)
    x, wts = gauss_legendre(q.nodes_per_panel)
    edges = radial_edges(p, q)
    a, b = edges[:-1], edges[1:]
    nodes = a[:, None] + (b - a)[:, None] * x
    body = exact_sum((inner(nodes) * wts).sum(axis=1) * (b - a))
    core = float(Fu(np.asarray(p.r_min))) * p.r_min**ctx.N / ctx.N
    return ctx.omega * (core + body)


def phi_minus_bound(ctx, nl, p, q: QuadratureConfig = QuadratureConfig(), F=None) -> float:
    """Upper bound (log 2) ||F(u)||_1^2 for the part of Phi where |x - y| > 1."""
    return math.log(2.0) * l1_norm_F(ctx, nl, p, q, F) ** 2


# --------------------------------------------------------------------------
# thresholds


def scs_threshold(ctx: DimensionContext, g0: float, Cg: float) -> float:
    """Limit value of Phi along the sharp concentrating sequence."""
    if not (math.isfinite(g0) and math.isfinite(Cg)) or g0 < 0 or Cg < 0:
        raise ValueError("g0 and Cg must be finite and nonnegative")
    N = ctx.N
    conc = 0.5 * N * ctx.omega ** (1.0 / (N - 1)) * Cg**2 * math.exp(2.0 * ctx.H)
    return ctx.phi_prefactor * (g0**2 / 4.0 + conc)


def threshold_for(ctx: DimensionContext, nl: Nonlinearity) -> float:
    if nl.Cg_infinite:
        raise ValueError("threshold undefined for unbounded g")
    return scs_threshold(ctx, nl.g0, nl.Cg)


def sufficient_condition_verdict(ctx: DimensionContext, nl: Nonlinearity, phi_value: float) -> bool:
    """True when phi_value strictly exceeds the concentration threshold,
    which guarantees that the supremum is attained."""
    return phi_value > threshold_for(ctx, nl)

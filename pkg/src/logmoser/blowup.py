"""The sharp concentrating sequence w_n and its diagnostics.

For t <= n the profile is a straight ramp; past n it bends into a
logistic-log tail whose constant A_n is fixed by the unit-energy condition.
All transcendental equations are solved in log form so that factors such as
exp(n (1 - (1 - delta_n)^N)) never have to be formed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from ._numerics import bisect, exact_sum, gauss_legendre, panel_edges, RootNotBracketed
from .constants import DimensionContext, Nonlinearity
from .functional import (
    QuadratureConfig,
    QuadratureError,
    integrand_E,
    panel_sums,
    scs_threshold,
    t_breakpoints,
    tail_factor,
)
from .profiles import TransformedProfile

CSV_HEADER = "# logmoser-scs v1"
CSV_COLUMNS = ("n", "s", "delta_n", "A_n", "a_n", "xi_n", "I", "J", "K", "phi", "threshold", "above")
DEFAULT_S = 0.1
GRID_NODES = 512


def default_tau(N: int, s: float) -> float:
    return 0.5 * (1.0 / N - s)


@dataclass(frozen=True)
class SequenceParams:
    n: int
    s: float
    delta_n: float
    A_n: float
    tau: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.s <= 0:
            raise ValueError("s must be positive")


# --------------------------------------------------------------------------
# A_n


def An_residual(N: int, n: float, s: float, x: float) -> float:
    """Log form of the defining equation for A_n; strictly decreasing in x."""
    delta = s * math.log(n) / n
    one_minus_pow = -math.expm1(N * math.log1p(-delta))
    series = math.fsum(1.0 / ((N - k) * (x + 1.0) ** (N - k)) for k in range(1, N))
    return math.fsum([
        math.log1p(1.0 / x),
        -series,
        s / (N - 1) * math.log(n),
        -n / (N - 1) * one_minus_pow,
    ])


def solve_An(ctx: DimensionContext, n: int, s: float) -> float:
    N = ctx.N
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 < s < 1.0 / N:
        raise ValueError(f"s must lie in (0, 1/N) = (0, {1.0 / N:g})")

    def f(lx):
        return An_residual(N, n, s, math.exp(lx))

    lo, hi = math.log(1e-300), math.log(1e6)
    while f(hi) > 0:
        hi *= 2.0
        if hi > 700:
            raise RootNotBracketed("A_n equation has no root below 1e300")
    if f(lo) < 0:
        raise RootNotBracketed("A_n equation has no root above 1e-300")
    return math.exp(bisect(f, lo, hi, xtol=1e-16, ftol=1e-14))


def sequence_params(ctx: DimensionContext, n: int, s: float = DEFAULT_S, tau: float | None = None) -> SequenceParams:
    tau = default_tau(ctx.N, s) if tau is None else tau
    if not 0.0 < tau < 1.0 / ctx.N - s:
        raise ValueError("tau must lie in (0, 1/N - s)")
    return SequenceParams(n, s, s * math.log(n) / n, solve_An(ctx, n, s), tau)


# --------------------------------------------------------------------------
# w_n


@dataclass(frozen=True, eq=False)
class SharpProfile(TransformedProfile):
    """w_n sampled on a grid, but evaluated from its closed form."""

    n: int = 2
    s: float = DEFAULT_S
    A_n: float = 1.0

    @property
    def delta_n(self) -> float:
        return self.s * math.log(self.n) / self.n

    @property
    def _m(self) -> float:
        return self.n * (1.0 - self.delta_n)

    @property
    def exact_plateau(self) -> float:
        N, m = self.N, self._m
        return (N - 1) / m ** (1.0 / N) * math.log1p(1.0 / self.A_n) + m ** ((N - 1) / N)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        N, n, m, A = self.N, self.n, self._m, self.A_n
        ramp = t * n ** (-1.0 / N) * (1.0 - self.delta_n) ** ((N - 1) / N)
        tau = np.maximum(t - n, 0.0) / (N - 1)
        tail = (N - 1) / m ** (1.0 / N) * (math.log(A + 1.0) - np.log(A + np.exp(-tau))) + m ** ((N - 1) / N)
        return np.where(t <= n, ramp, tail)

    def tail_energy(self) -> float:
        N, A = self.N, self.A_n
        series = math.fsum(1.0 / (k * (A + 1.0) ** k) for k in range(1, N))
        return (N - 1) / self._m * (math.log1p(1.0 / A) - series)

    def energy(self) -> float:
        ramp = (1.0 - self.delta_n) ** (self.N - 1)
        return ramp + self.tail_energy()


def default_tmax(N: int, n: int, A_n: float) -> float:
    return n + 40.0 * (N - 1) * max(1.0, math.log1p(1.0 / A_n))


def sharp_sequence(
    ctx: DimensionContext,
    n: int,
    s: float = DEFAULT_S,
    nodes: int = GRID_NODES,
    T_max: float | None = None,
) -> SharpProfile:
    N = ctx.N
    A = solve_An(ctx, n, s)
    T = default_tmax(N, n, A) if T_max is None else float(T_max)
    if T <= n:
        raise ValueError("T_max must exceed n")
    head = np.linspace(0.0, float(n), max(nodes, 2))
    # geometric in exp(-(t - n)/(N - 1)), i.e. evenly spaced in t
    z = np.geomspace(1.0, math.exp(-(T - n) / (N - 1)), max(nodes, 2) + 1)[1:]
    tail = n - (N - 1) * np.log(z)
    tail[-1] = T
    t = np.concatenate([head, tail])
    proto = SharpProfile(t, np.zeros_like(t), N, 0.0, n, s, A)
    vals = proto(t)
    vals[0] = 0.0
    return SharpProfile(t, vals, N, 0.0, n, s, A)


# --------------------------------------------------------------------------
# xi_n


def _xi_integrand(N: int, n: float):
    q = 1.0 / (N - 1)

    def f(y):
        return np.exp(n * y * (y**q - 1.0))

    return f


def _xi_edges(N: int, n: float) -> np.ndarray:
    # graded toward both ends, where the exponent vanishes on scales 1/n and (N-1)/n
    left = np.geomspace(1e-4 / n, 0.5, 160)
    right = 1.0 - np.geomspace(1e-4 * (N - 1) / n, 0.5, 160)[::-1]
    mid = np.linspace(0.0, 1.0, 257)
    return np.unique(np.concatenate([[0.0, 1.0], left, right, mid]))


def solve_xi(ctx: DimensionContext, n: float, order: int = 16) -> float:
    """Balance point of int_0^1 exp(n y (y^{1/(N-1)} - 1)) dy."""
    N = ctx.N
    if n < 1:
        raise ValueError("n must be >= 1")
    f = _xi_integrand(N, n)
    x, w = gauss_legendre(order)
    edges = _xi_edges(N, n)
    a, b = edges[:-1], edges[1:]
    pan = (f(a[:, None] + (b - a)[:, None] * x) * w).sum(axis=1) * (b - a)
    cum = np.concatenate([[0.0], np.cumsum(pan)])
    total = cum[-1]

    def h(xv):
        k = min(int(np.searchsorted(edges, xv, side="right")) - 1, len(a) - 1)
        part = float((f(edges[k] + (xv - edges[k]) * x) * w).sum() * (xv - edges[k]))
        left = cum[k] + part
        return left - (total - left)

    return bisect(h, 0.0, 1.0, xtol=1e-15, ftol=1e-12 * total)


# --------------------------------------------------------------------------
# a_n


def _crossing_gap(w, p: float):
    def d(t):
        return float(w(np.asarray(t))) ** p - (t - 3.0 * math.log(t))

    return d


def find_an(w: TransformedProfile, literal: bool = False) -> float:
    """First point where w^{N/(N-1)} climbs back above t - 3 log t.

    Taken literally (``literal=True``), the infimum over t >= 3 is always 3,
    since t - 3 log t < 0 there.  The default looks for the first upward
    crossing after the gap has turned negative, which is the crossing the
    concentration argument relies on.  Returns ``math.inf`` when there is
    none (the plateau past T_max can never catch up, as t - 3 log t is
    increasing on [3, inf)).
    """
    p = w.N / (w.N - 1)
    d = _crossing_gap(w, p)
    if literal:
        return 3.0 if d(3.0) >= 0 else _first_root(d, w, 3.0, p)
    start = _first_negative(d, w, p)
    if start is None:
        return math.inf
    return _first_root(d, w, start, p)


def _scan_points(w, lo):
    t = np.asarray(w.t_grid, dtype=float)
    return np.concatenate([[lo], t[t > lo]])


def _first_negative(d, w, p):
    for t in _scan_points(w, 3.0):
        if d(t) < 0:
            return float(t)
    # past T_max the gap only decreases, so it turns negative eventually
    T, step = max(w.t_max, 3.0), 1.0
    while d(T + step) >= 0:
        step *= 2.0
        if step > 1e15:
            return None
    return T + step


def _first_root(d, w, start, p):
    if d(start) >= 0:
        return start
    pts = _scan_points(w, start)
    prev = start
    for t in pts[1:]:
        if d(t) >= 0:
            return bisect(d, prev, t, xtol=1e-14)
        prev = t
    return math.inf


# --------------------------------------------------------------------------
# integrals


def cc_tail(w: TransformedProfile, a: float, q: QuadratureConfig = QuadratureConfig()) -> float:
    """int_a^inf exp(w^{N/(N-1)}(x) - x) dx with the plateau tail in closed form."""
    if a < 0:
        raise ValueError("a must be >= 0")
    p = w.N / (w.N - 1)
    T = w.t_max
    W = getattr(w, "exact_plateau", None) or float(w(np.asarray(T)))

    def once(level):
        ql = q.refined(level)
        body = 0.0
        if a < T:
            br = t_breakpoints(w, [a])
            br = br[br >= a]
            edges = panel_edges(br, ql.panels, ql.max_width)
            x, wt = gauss_legendre(ql.nodes_per_panel)
            lo, hi = edges[:-1], edges[1:]
            nodes = lo[:, None] + (hi - lo)[:, None] * x
            vals = np.exp(w(nodes) ** p - nodes)
            body = exact_sum((vals * wt).sum(axis=1) * (hi - lo))
        start = max(a, T)
        wT = float(w(np.asarray(start)))
        return body + math.exp(wT**p - start)

    prev = once(0)
    for level in range(1, q.max_refine + 1):
        val = once(level)
        if abs(val - prev) <= q.tol_rel * abs(val):
            return val
        prev = val
    raise QuadratureError("cc_tail did not converge")


@dataclass
class Decomposition:
    I: float
    J: float
    K: float
    bracket: float
    refinements: int

    @property
    def total(self) -> float:
        return self.I + self.J + self.K


def _split_once(ctx, nl, w, q, split):
    E = integrand_E(ctx, nl, w)
    edges = panel_edges(t_breakpoints(w, [split]), q.panels, q.max_width)
    try:
        ps = panel_sums(lambda t: t * E(t), E, edges, q.nodes_per_panel, True, q.tail_cut)
    except FloatingPointError as exc:
        raise QuadratureError("integrand overflow") from exc
    T = w.t_max
    W_T = float(w(np.asarray(T)))
    kT = tail_factor(ctx, nl, W_T, T)
    tail_dd = kT * kT * (2.0 * T + 1.0) / 4.0

    left = edges[1:] <= split
    right = ~left
    in_l, in_r = ps.inner[left], ps.inner[right]
    out_l, out_r = ps.outer[left], ps.outer[right]
    suffix_l = np.concatenate([np.cumsum(in_l[::-1])[::-1][1:], [0.0]])
    suffix_r = np.concatenate([np.cumsum(in_r[::-1])[::-1][1:], [0.0]]) + kT
    J = exact_sum(ps.tri[left]) + exact_sum(out_l * suffix_l)
    K = exact_sum(ps.tri[right]) + exact_sum(out_r * suffix_r) + tail_dd
    I = exact_sum(out_l) * (exact_sum(in_r) + kT)

    bracket = 0.0
    plateau = getattr(w, "exact_plateau", None)
    if plateau is not None and plateau != W_T:
        k_sup = tail_factor(ctx, nl, plateau, T)
        total_outer = exact_sum(ps.outer)
        bracket = abs((k_sup - kT) * total_outer + (k_sup**2 - kT**2) * (2.0 * T + 1.0) / 4.0)
    return I, J, K, bracket


def decompose_IJK(
    ctx: DimensionContext,
    nl: Nonlinearity,
    w: TransformedProfile,
    split: float,
    q: QuadratureConfig = QuadratureConfig(),
) -> Decomposition:
    """Split the half-line double integral at ``split`` into I (y < split < x),
    J (both below) and K (both above).  Values exclude the 2 omega^2/N^3 factor."""
    if not 0.0 < split < w.t_max:
        raise ValueError("split must lie in (0, T_max)")
    prev = None
    for level in range(q.max_refine + 1):
        I, J, K, bracket = _split_once(ctx, nl, w, q.refined(level), split)
        tot = I + J + K
        if prev is not None and abs(tot - prev) <= q.tol_rel * abs(tot):
            if bracket > q.tol_rel * abs(tot):
                raise QuadratureError(f"tail bracket {bracket:.3e} exceeds tolerance")
            return Decomposition(I, J, K, bracket, level)
        prev = tot
    raise QuadratureError("decomposition did not converge")


# --------------------------------------------------------------------------
# sweeps


@dataclass
class SequenceReport:
    params: SequenceParams | None
    n: int
    s: float
    a_n: float = math.nan
    xi_n: float = math.nan
    I: float = math.nan
    J: float = math.nan
    K: float = math.nan
    phi: float = math.nan
    threshold: float = math.nan
    above: bool = False
    normalization: float = math.nan
    split: float = math.nan
    error: str | None = None
    extra: dict = field(default_factory=dict)

    def row(self) -> dict:
        prm = self.params
        return {
            "n": self.n, "s": self.s,
            "delta_n": prm.delta_n if prm else math.nan,
            "A_n": prm.A_n if prm else math.nan,
            "a_n": self.a_n, "xi_n": self.xi_n, "I": self.I, "J": self.J, "K": self.K,
            "phi": self.phi, "threshold": self.threshold, "above": self.above,
        }


def sequence_report(
    ctx: DimensionContext,
    nl: Nonlinearity,
    n: int,
    s: float = DEFAULT_S,
    tau: float | None = None,
    q: QuadratureConfig = QuadratureConfig(),
    nodes: int = GRID_NODES,
    T_max: float | None = None,
) -> SequenceReport:
    """Build w_n and evaluate everything for a single n.

    The decomposition is split at a_n; when a_n is infinite it falls back
    to n.
    """
    if nl.Cg_infinite:
        raise ValueError("the sequence threshold needs a finite C_g")
    prm = sequence_params(ctx, n, s, tau)
    w = sharp_sequence(ctx, n, s, nodes, T_max)
    a_n = find_an(w)
    split = a_n if math.isfinite(a_n) and a_n < w.t_max else float(n)
    dec = decompose_IJK(ctx, nl, w, split, q)
    phi = ctx.phi_prefactor * dec.total
    thr = scs_threshold(ctx, nl.g0, nl.Cg)
    return SequenceReport(
        prm, n, s, a_n=a_n, xi_n=solve_xi(ctx, n), I=dec.I, J=dec.J, K=dec.K,
        phi=phi, threshold=thr, above=phi > thr, normalization=w.energy(), split=split,
        extra={"tail_bracket": dec.bracket, "refinements": dec.refinements,
               "has_shift_data": nl.rho is not None and nl.C2 is not None},
    )


def convergence_report(
    ctx: DimensionContext,
    nl: Nonlinearity,
    n_list,
    s: float = DEFAULT_S,
    tau: float | None = None,
    q: QuadratureConfig = QuadratureConfig(),
    nodes: int = GRID_NODES,
) -> list[SequenceReport]:
    """One report per n; failures are recorded in the row instead of raised."""
    out = []
    for n in n_list:
        try:
            out.append(sequence_report(ctx, nl, int(n), s, tau, q, nodes))
        except (ArithmeticError, ValueError, RuntimeError) as exc:
            out.append(SequenceReport(None, int(n), s, error=f"{type(exc).__name__}: {exc}"))
    return out


def fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def reports_to_csv(reports: list[SequenceReport]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(CSV_COLUMNS + ("error",))
    for r in reports:
        row = r.row()
        wr.writerow([fmt(row[c]) for c in CSV_COLUMNS] + [r.error or ""])
    return buf.getvalue()

"""Dimension constants and the nonlinearity family g.

The growth function is always of the shape

    F(t) = exp(alpha_N t^{N/(N-1)}) g(t) / (1 + t)^{N/(2(N-1))},

so a nonlinearity is fully described by ``g`` together with a few scalars
(``g(0)``, the limit ``C_g`` at infinity, growth constants).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ._numerics import bisect

TABLE_HEADER = "# logmoser-g v1"
G1_TOL = 1e-9


@dataclass(frozen=True)
class DimensionContext:
    N: int
    omega: float
    alpha_N: float
    H: float

    @property
    def p(self) -> float:
        """Critical exponent N/(N-1)."""
        return self.N / (self.N - 1)

    @property
    def beta(self) -> float:
        """Power of (1+t) in the denominator of F, N/(2(N-1))."""
        return self.N / (2.0 * (self.N - 1))

    @property
    def phi_prefactor(self) -> float:
        """2 omega^2 / N^3, the factor in front of the half-line double integral."""
        return 2.0 * self.omega**2 / self.N**3

    @property
    def u_from_w(self) -> float:
        """Scale c with u = c * w under the Carleson-Chang substitution."""
        return self.N ** ((1.0 - self.N) / self.N) * self.omega ** (-1.0 / self.N)


def make_dimension_context(N: int) -> DimensionContext:
    if int(N) != N or N < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {N!r}")
    N = int(N)
    omega = 2.0 * math.pi ** (N / 2.0) / math.gamma(N / 2.0)
    alpha_N = N * omega ** (1.0 / (N - 1))
    H = math.fsum(1.0 / k for k in range(1, N))
    return DimensionContext(N=N, omega=omega, alpha_N=alpha_N, H=H)


@dataclass(frozen=True)
class Nonlinearity:
    """The function g of the growth shape, with its admissibility data.

    ``Cg`` is only meaningful when ``Cg_infinite`` is False; an unbounded g is
    flagged rather than carried around as ``float('inf')``.
    """

    g: Callable[[np.ndarray], np.ndarray]
    g_prime: Callable[[np.ndarray], np.ndarray]
    g0: float
    Cg: float
    Cg_infinite: bool = False
    gamma: float = 1.0
    rho: float | None = None
    C2: float | None = None
    kind: str = "custom"
    spec: str = ""
    derivative_note: str = "analytic"
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, t):
        return self.g(np.asarray(t, dtype=float))


def _fit_gamma(g, p: float) -> float:
    # smallest gamma >= 1 with g(t) <= gamma exp(t^p) on a probe grid; the
    # factor exp((gamma-1) t^p) only helps, so this certifies (g0) on the grid
    t = np.concatenate([np.linspace(0.0, 5.0, 501), np.geomspace(5.0, 1e4, 200)])
    with np.errstate(over="ignore"):
        ratio = g(t) * np.exp(-np.minimum(t**p, 700.0))
    return max(1.0, float(np.max(ratio)))


def const_g(c: float) -> Nonlinearity:
    c = float(c)
    if c < 0:
        raise ValueError("const family needs c >= 0")
    return Nonlinearity(
        g=lambda t: np.full_like(np.asarray(t, dtype=float), c),
        g_prime=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        g0=c, Cg=c, gamma=max(1.0, c), kind="const", spec=f"const:{c:g}",
        params={"c": c},
    )


def log_pow_g(sigma: float, p: float = 2.0) -> Nonlinearity:
    """g(t) = log^sigma(2 + t); unbounded, so C_g is flagged infinite."""
    sigma = float(sigma)

    def g(t):
        return np.log(2.0 + t) ** sigma

    def gp(t):
        L = np.log(2.0 + t)
        return sigma * L ** (sigma - 1.0) / (2.0 + t)

    return Nonlinearity(
        g=g, g_prime=gp, g0=math.log(2.0) ** sigma, Cg=math.nan, Cg_infinite=True,
        gamma=_fit_gamma(g, p), kind="log-pow", spec=f"log-pow:{sigma:g}",
        params={"sigma": sigma},
    )


def ratio_log_g(sigma: float, p: float = 2.0) -> Nonlinearity:
    """g(t) = t/(2+t) * log^{-sigma}(2+t); vanishes at 0 and at infinity."""
    sigma = float(sigma)

    def g(t):
        return t / (2.0 + t) * np.log(2.0 + t) ** (-sigma)

    def gp(t):
        L = np.log(2.0 + t)
        return (2.0 / (2.0 + t) ** 2) * L ** (-sigma) - sigma * t / (2.0 + t) ** 2 * L ** (-sigma - 1.0)

    return Nonlinearity(
        g=g, g_prime=gp, g0=0.0, Cg=0.0, gamma=_fit_gamma(g, p), kind="ratio-log",
        spec=f"ratio-log:{sigma:g}", params={"sigma": sigma},
    )


def shift_g(c: float, rho: float, C2: float, p: float = 2.0) -> Nonlinearity:
    """g(t) = c + C2/(1+t)^rho, which tends to c from above at rate t^-rho."""
    c, rho, C2 = float(c), float(rho), float(C2)
    if c < 0 or C2 < 0 or rho <= 0:
        raise ValueError("shift family needs c >= 0, C2 >= 0, rho > 0")

    def g(t):
        return c + C2 * (1.0 + t) ** (-rho)

    def gp(t):
        return -rho * C2 * (1.0 + t) ** (-rho - 1.0)

    return Nonlinearity(
        g=g, g_prime=gp, g0=c + C2, Cg=c, gamma=_fit_gamma(g, p), rho=rho, C2=C2,
        kind="shift", spec=f"shift:{c:g},{rho:g},{C2:g}",
        params={"c": c, "rho": rho, "C2": C2},
    )


def read_g_table(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != TABLE_HEADER:
        raise ValueError(f"{path}: missing header line {TABLE_HEADER!r}")
    rows = [ln.split() for ln in lines[1:] if ln.strip() and not ln.lstrip().startswith("#")]
    data = np.array([[float(a), float(b)] for a, b in rows])
    t, g = data[:, 0], data[:, 1]
    if len(t) < 2 or np.any(np.diff(t) <= 0):
        raise ValueError(f"{path}: t column must be strictly increasing with >= 2 rows")
    if t[0] != 0.0:
        raise ValueError(f"{path}: table must start at t = 0")
    if np.any(g < 0):
        raise ValueError(f"{path}: g must be nonnegative")
    return t, g


def write_g_table(path: str | Path, t, g) -> None:
    body = "\n".join(f"{a:.17g} {b:.17g}" for a, b in zip(t, g))
    Path(path).write_text(f"{TABLE_HEADER}\n{body}\n")


def table_g(ts, gs, p: float = 2.0, spec: str = "table") -> Nonlinearity:
    """Piecewise-linear g from samples, held constant past the last sample.

    The derivative uses central differences with h equal to the smallest
    sample spacing, since a table cannot guarantee C^1.
    """
    ts, gs = np.asarray(ts, dtype=float), np.asarray(gs, dtype=float)
    h = float(np.min(np.diff(ts)))

    def g(t):
        return np.interp(t, ts, gs)

    def gp(t):
        t = np.asarray(t, dtype=float)
        lo = np.maximum(t - h, 0.0)
        return (g(t + h) - g(lo)) / (t + h - lo)

    return Nonlinearity(
        g=g, g_prime=gp, g0=float(gs[0]), Cg=float(gs[-1]), gamma=_fit_gamma(g, p),
        kind="table", spec=spec, derivative_note=f"central differences, h={h:.6g}",
        params={"h": h},
    )


def parse_nonlinearity(spec: str, ctx: DimensionContext | None = None) -> Nonlinearity:
    """Build a nonlinearity from ``kind:args`` (e.g. ``shift:1,0.4,1``)."""
    p = ctx.p if ctx is not None else 2.0
    kind, _, arg = spec.partition(":")
    kind = kind.strip()
    try:
        if kind == "const":
            return const_g(float(arg))
        if kind == "log-pow":
            return log_pow_g(float(arg), p)
        if kind == "ratio-log":
            return ratio_log_g(float(arg), p)
        if kind == "shift":
            c, rho, C2 = (float(x) for x in arg.split(","))
            return shift_g(c, rho, C2, p)
        if kind == "table":
            t, g = read_g_table(arg)
            return table_g(t, g, p, spec=spec)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad nonlinearity spec {spec!r}: {exc}") from exc
    raise ValueError(f"unknown nonlinearity kind {kind!r} in {spec!r}")


def F_log(ctx: DimensionContext, nl: Nonlinearity, t):
    """log F(t), usable where F itself overflows. Requires g(t) > 0."""
    t = np.asarray(t, dtype=float)
    gt = nl.g(t)
    if np.any(gt <= 0):
        raise ValueError("F_log undefined where g(t) = 0 (F is exactly 0 there)")
    out = ctx.alpha_N * t**ctx.p + np.log(gt) - ctx.beta * np.log1p(t)
    return out if out.ndim else float(out)


def F_value(ctx: DimensionContext, nl: Nonlinearity, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("F is evaluated on t >= 0 only")
    expo = ctx.alpha_N * t**ctx.p
    if np.any(expo > 709.0):
        raise OverflowError("F overflows double precision; use F_log")
    out = np.exp(expo) * nl.g(t) / (1.0 + t) ** ctx.beta
    return out if out.ndim else float(out)


def g1_expression(ctx: DimensionContext, nl: Nonlinearity, t):
    """Left side of the (g1) monotonicity condition; F' >= 0 iff this is >= 0."""
    t = np.asarray(t, dtype=float)
    a = ctx.alpha_N
    bracket = 2.0 * a * t**ctx.p + 2.0 * a * t ** (1.0 / (ctx.N - 1)) - 1.0
    return ctx.beta * bracket * nl.g(t) + (1.0 + t) * nl.g_prime(t)


@dataclass
class G1Report:
    violations: list[tuple[float, float]]
    checked: int
    tol: float
    derivative: str

    @property
    def ok(self) -> bool:
        return not self.violations


def check_g1(ctx: DimensionContext, nl: Nonlinearity, grid, tol: float = G1_TOL) -> G1Report:
    grid = np.asarray(list(grid), dtype=float)
    if grid.size == 0:
        return G1Report([], 0, tol, nl.derivative_note)
    vals = g1_expression(ctx, nl, grid)
    bad = [(float(t), float(v)) for t, v in zip(grid, vals) if v < -tol]
    return G1Report(bad, int(grid.size), tol, nl.derivative_note)


def t0_lhs(ctx: DimensionContext, t: float) -> float:
    a = ctx.alpha_N
    return 1.0 - 2.0 * a * t ** (1.0 / (ctx.N - 1)) - 2.0 * a * t**ctx.p


def find_t0(ctx: DimensionContext) -> float:
    """First positive zero of 1 - 2 a t^{1/(N-1)} - 2 a t^{N/(N-1)}.

    The left side is strictly decreasing from 1, so the zero is unique.
    """
    hi = 1.0
    while t0_lhs(ctx, hi) > 0:
        hi *= 2.0
    return bisect(lambda t: t0_lhs(ctx, t), 0.0, hi, xtol=1e-16)

"""Radial trial functions on the unit ball and their Carleson-Chang transforms.

A :class:`RadialProfile` stores node values of a nonnegative radial function
``u`` on a grid ``0 < r_0 < ... < r_K = 1`` and is constant on the core
``[0, r_0]``.  Between nodes it is linear in one of three coordinates:

``linear``  u is linear in r
``log``     u is linear in log r (equivalently, linear in t = -N log r)
``volume``  u is linear in r^N (the enclosed volume); the decreasing
            rearrangement is exact in this representation

A :class:`TransformedProfile` is the function ``w(t) = N^{(N-1)/N}
omega^{1/N} u(e^{-t/N})``, piecewise linear on a t-grid starting at 0 and
extended past the last node with ``tail_slope`` (0 for every finite-energy
profile).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .constants import DimensionContext, make_dimension_context

PROFILE_HEADER = "# logmoser-profile v1"
WPROFILE_HEADER = "# logmoser-wprofile v1"
INTERP_MODES = ("linear", "log", "volume")
DEFAULT_NODES = 2048


@lru_cache(maxsize=None)
def context(N: int) -> DimensionContext:
    return make_dimension_context(N)


def _coord(r, N: int, interp: str):
    r = np.asarray(r, dtype=float)
    if interp == "linear":
        return r
    if interp == "log":
        return np.log(r)
    if interp == "volume":
        return r**N
    raise ValueError(f"unknown interpolation mode {interp!r}")


@dataclass(frozen=True, eq=False)
class RadialProfile:
    r_grid: np.ndarray
    values: np.ndarray
    N: int
    interp: str = "linear"

    def __post_init__(self):
        r = np.array(self.r_grid, dtype=float)
        u = np.array(self.values, dtype=float)
        if r.ndim != 1 or r.shape != u.shape or r.size < 2:
            raise ValueError("r_grid and values must be 1-d arrays of equal length >= 2")
        if r[0] <= 0 or r[-1] != 1.0 or np.any(np.diff(r) <= 0):
            raise ValueError("r_grid must be strictly increasing in (0, 1] and end at 1")
        if np.any(u < 0) or not np.all(np.isfinite(u)):
            raise ValueError("profile values must be finite and nonnegative")
        if u[-1] != 0.0:
            raise ValueError("profile must vanish at r = 1")
        if self.interp not in INTERP_MODES:
            raise ValueError(f"interp must be one of {INTERP_MODES}")
        r.flags.writeable = False
        u.flags.writeable = False
        object.__setattr__(self, "r_grid", r)
        object.__setattr__(self, "values", u)
        object.__setattr__(self, "N", int(self.N))

    @property
    def ctx(self) -> DimensionContext:
        return context(self.N)

    @property
    def r_min(self) -> float:
        return float(self.r_grid[0])

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        x = _coord(np.clip(r, self.r_grid[0], 1.0), self.N, self.interp)
        return np.interp(x, _coord(self.r_grid, self.N, self.interp), self.values)

    def is_monotone(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.values) <= tol))

    def scaled(self, factor: float) -> "RadialProfile":
        return RadialProfile(self.r_grid, factor * self.values, self.N, self.interp)


@dataclass(frozen=True, eq=False)
class TransformedProfile:
    t_grid: np.ndarray
    values: np.ndarray
    N: int
    tail_slope: float = 0.0

    def __post_init__(self):
        t = np.array(self.t_grid, dtype=float)
        w = np.array(self.values, dtype=float)
        if t.ndim != 1 or t.shape != w.shape or t.size < 2:
            raise ValueError("t_grid and values must be 1-d arrays of equal length >= 2")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("t_grid must start at 0 and be strictly increasing")
        if w[0] != 0.0:
            raise ValueError("transformed profile must vanish at t = 0")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("transformed values must be finite and nonnegative")
        if self.tail_slope < 0:
            raise ValueError("tail_slope must be >= 0")
        t.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "values", w)
        object.__setattr__(self, "N", int(self.N))

    @property
    def ctx(self) -> DimensionContext:
        return context(self.N)

    @property
    def t_max(self) -> float:
        return float(self.t_grid[-1])

    @property
    def plateau(self) -> float:
        """Limit of w at infinity (inf when the tail keeps rising)."""
        return float(self.values[-1]) if self.tail_slope == 0 else math.inf

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.t_grid)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.interp(t, self.t_grid, self.values)
        if self.tail_slope:
            out = np.where(t > self.t_max, self.values[-1] + self.tail_slope * (t - self.t_max), out)
        return out

    def energy(self) -> float:
        """Integral of |w'|^N over the half-line, exact for piecewise-linear w."""
        if self.tail_slope > 0:
            raise ValueError("positive tail slope on an unbounded extension has infinite energy")
        dt = np.diff(self.t_grid)
        return math.fsum((np.abs(self.slopes) ** self.N * dt).tolist())

    def is_monotone(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.values) >= -tol))


def dirichlet_transformed(w: TransformedProfile) -> float:
    return w.energy()


def dirichlet_radial(p: RadialProfile) -> float:
    """omega * integral_0^1 |u'|^N r^{N-1} dr, in closed form on every piece."""
    N, omega = p.N, p.ctx.omega
    a, b = p.r_grid[:-1], p.r_grid[1:]
    du = np.abs(np.diff(p.values))
    if p.interp == "linear":
        terms = (du / (b - a)) ** N * (b**N - a**N) / N
    elif p.interp == "log":
        L = np.log(b / a)
        terms = (du / L) ** N * L
    else:
        dv = b**N - a**N
        terms = N**N * (du / dv) ** N * (b ** (N * N) - a ** (N * N)) / (N * N)
    return omega * math.fsum(terms.tolist())


def transform_scale(N: int) -> float:
    """Factor c with w = c u under the substitution r = exp(-t/N)."""
    omega = context(N).omega
    return N ** ((N - 1) / N) * omega ** (1.0 / N)


def to_transformed(p: RadialProfile, T_max: float | None = None, refine: int = 16) -> TransformedProfile:
    """Map u to w(t) = N^{(N-1)/N} omega^{1/N} u(exp(-t/N)).

    Node values carry over exactly.  ``log`` profiles are piecewise linear in
    t, so the map is exact there; the other modes get ``refine`` extra nodes
    per piece (uniform in t), which makes the result an interpolant.
    """
    N = p.N
    c = transform_scale(N)
    T0 = -N * math.log(p.r_min)
    if T_max is None:
        T_max = T0
    if T_max <= 0:
        raise ValueError("T_max must be positive")
    t_nodes = -N * np.log(p.r_grid[::-1])
    t_nodes[0] = 0.0
    if p.interp != "log" and refine > 0:
        frac = np.arange(1, refine + 1) / (refine + 1)
        inner = (t_nodes[:-1, None] + frac[None, :] * np.diff(t_nodes)[:, None]).ravel()
        t_nodes = np.union1d(t_nodes, inner)
    if T_max < T0:
        t_nodes = np.append(t_nodes[t_nodes < T_max], T_max)
    elif T_max > T0:
        t_nodes = np.append(t_nodes, T_max)
    w = c * p(np.exp(-t_nodes / N))
    w[0] = 0.0
    return TransformedProfile(t_nodes, w, N)


def to_radial(w: TransformedProfile) -> RadialProfile:
    """Inverse substitution; the result is linear in log r between nodes."""
    if w.tail_slope > 0:
        raise ValueError("a rising tail has no radial counterpart with finite core")
    N = w.N
    r = np.exp(-w.t_grid[::-1] / N)
    r[-1] = 1.0
    u = w.values[::-1] / transform_scale(N)
    return RadialProfile(r, u, N, "log")


def shell_volumes(p: RadialProfile) -> np.ndarray:
    """Volumes omega/N (r_i^N - r_{i-1}^N), the core first."""
    m = p.ctx.omega / p.N * p.r_grid**p.N
    return np.diff(np.concatenate([[0.0], m]))


def _as_volume_profile(p: RadialProfile, refine: int) -> RadialProfile:
    if p.interp == "volume":
        return p
    a, b = p.r_grid[:-1], p.r_grid[1:]
    frac = np.arange(1, refine + 1) / (refine + 1)
    if p.interp == "log":
        inner = np.exp(np.log(a)[:, None] + frac * np.log(b / a)[:, None])
    else:
        inner = a[:, None] + frac * (b - a)[:, None]
    r = np.union1d(p.r_grid, inner.ravel())
    return RadialProfile(r, p(r), p.N, "volume")


def rearrange_decreasing(p: RadialProfile, refine: int = 32) -> RadialProfile:
    """Radially nonincreasing rearrangement (discrete Schwarz symmetrization).

    Works on the layer cake in the volume coordinate m = omega r^N / N.  For a
    profile linear in m between nodes, the distribution function
    lambda -> |{u > lambda}| is piecewise linear with breaks at the node
    values, so its inverse is again linear in m and the result is exact.
    Other interpolation modes are first resampled in the volume coordinate
    with ``refine`` extra nodes per piece.
    """
    q = _as_volume_profile(p, refine)
    N, omega = q.N, q.ctx.omega
    m_nodes = omega / N * q.r_grid**N
    m_lo = np.concatenate([[0.0], m_nodes[:-1]])
    m_hi = m_nodes
    v_lo = np.concatenate([[q.values[0]], q.values[:-1]])
    v_hi = q.values
    top = np.maximum(v_lo, v_hi)
    bot = np.minimum(v_lo, v_hi)
    span = top - bot
    length = m_hi - m_lo

    def measure_above(lam: float, strict: bool) -> float:
        flat = span == 0
        frac = np.empty_like(span)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac[~flat] = np.clip((top[~flat] - lam) / span[~flat], 0.0, 1.0)
        frac[flat] = (bot[flat] > lam) if strict else (bot[flat] >= lam)
        return math.fsum((length * frac).tolist())

    levels = np.unique(q.values)[::-1]
    pts: list[tuple[float, float]] = []
    for lam in levels:
        for m in (measure_above(lam, True), measure_above(lam, False)):
            if not pts or m > pts[-1][0]:
                pts.append((m, float(lam)))
            elif m == pts[-1][0] and lam < pts[-1][1]:
                pts[-1] = (m, float(lam))
    m_out = np.array([m for m, _ in pts])
    u_out = np.array([v for _, v in pts])
    if m_out[0] == 0.0:
        # a strict peak: keep the point at m = 0 as a vanishing core
        m_out[0] = 1e-12 * m_out[1]
    r_out = (N * m_out / omega) ** (1.0 / N)
    r_out[-1] = 1.0
    return RadialProfile(r_out, u_out, N, "volume")


def moser_profile(ctx: DimensionContext, n: int, nodes: int = DEFAULT_NODES) -> RadialProfile:
    """Classical Moser function: log ramp on [1/n, 1], plateau inside 1/n.

    The ramp is linear in log r, so the ``log`` representation is exact.
    """
    if n < 2:
        raise ValueError("Moser profiles need n >= 2")
    N, omega = ctx.N, ctx.omega
    L = math.log(n)
    r = np.geomspace(1.0 / n, 1.0, max(nodes, 2))
    r[0], r[-1] = 1.0 / n, 1.0
    u = omega ** (-1.0 / N) * np.log(1.0 / r) / L ** (1.0 / N)
    u[0] = omega ** (-1.0 / N) * L ** ((N - 1) / N)
    u[-1] = 0.0
    return RadialProfile(r, u, N, "log")


def write_profile(path: str | Path, p: RadialProfile | TransformedProfile) -> None:
    if isinstance(p, RadialProfile):
        head = f"{PROFILE_HEADER}\n# N={p.N} interp={p.interp}"
        rows = zip(p.r_grid, p.values)
    else:
        head = f"{WPROFILE_HEADER}\n# N={p.N} tail_slope={p.tail_slope:.17g}"
        rows = zip(p.t_grid, p.values)
    body = "\n".join(f"{a:.17g} {b:.17g}" for a, b in rows)
    Path(path).write_text(f"{head}\n{body}\n")


def read_profile(path: str | Path, N: int | None = None) -> RadialProfile | TransformedProfile:
    """Read either profile format; ``N`` overrides the metadata line."""
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() not in (PROFILE_HEADER, WPROFILE_HEADER):
        raise ValueError(f"{path}: unrecognised profile header")
    meta = {}
    for ln in lines[1:]:
        if ln.startswith("#"):
            for tok in ln[1:].split():
                k, _, v = tok.partition("=")
                meta[k] = v
    data = np.array([[float(x) for x in ln.split()] for ln in lines[1:]
                     if ln.strip() and not ln.startswith("#")])
    if N is None:
        if "N" not in meta:
            raise ValueError(f"{path}: dimension missing; pass N explicitly")
        N = int(meta["N"])
    if lines[0].strip() == PROFILE_HEADER:
        return RadialProfile(data[:, 0], data[:, 1], N, meta.get("interp", "linear"))
    return TransformedProfile(data[:, 0], data[:, 1], N, float(meta.get("tail_slope", 0.0)))

"""Projected ascent for Phi over monotone profiles of energy at most one.

Profiles are parameterised by nonnegative slopes of w on a graded t-grid, so
every iterate is nondecreasing in t (nonincreasing in r) by construction.
The energy constraint is enforced by rescaling, which is the exact nearest
feasible point along the ray and keeps monotonicity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import DimensionContext, Nonlinearity
from .functional import QuadratureConfig, evaluate_transformed, phi_transformed_fixed
from .profiles import RadialProfile, TransformedProfile, dirichlet_radial, to_radial

FEAS_TOL = 1e-9


@dataclass(frozen=True)
class OptimizerConfig:
    knots: int = 24
    t_horizon: float | None = None
    max_iters: int = 60
    step_init: float = 0.25
    step_shrink: float = 0.5
    tol_obj: float = 1e-6
    stagnation: int = 20
    restarts: int = 3
    seed: int = 0
    fd_step: float = 1e-5
    moser_max_n: int = 1000
    sharp_warm: tuple[int, ...] = (4, 8, 16)
    quad: QuadratureConfig = QuadratureConfig(panels=2, max_width=0.25)

    def __post_init__(self):
        if self.knots < 2:
            raise ValueError("knots must be >= 2")
        if min(self.step_init, self.tol_obj, self.fd_step) <= 0 or not 0 < self.step_shrink < 1:
            raise ValueError("step sizes and tolerances must be positive, step_shrink in (0, 1)")
        if self.max_iters < 1 or self.restarts < 0 or self.moser_max_n < 2:
            raise ValueError("bad iteration budget")


@dataclass
class FeasibilityReport:
    energy: float
    violations: list[int]
    boundary: float
    tol: float = FEAS_TOL

    @property
    def passed(self) -> bool:
        return self.energy <= 1.0 + self.tol and not self.violations and self.boundary == 0.0

    def as_dict(self) -> dict:
        return {"energy": self.energy, "violations": self.violations,
                "boundary": self.boundary, "pass": self.passed}


def certify_feasible(ctx: DimensionContext, p: RadialProfile) -> FeasibilityReport:
    bad = [int(i) for i in np.flatnonzero(np.diff(p.values) > 0)]
    return FeasibilityReport(dirichlet_radial(p), bad, float(p.values[-1]))


def project_unit_energy(w: TransformedProfile) -> TransformedProfile:
    e = w.energy()
    if e <= 1.0:
        return w
    return TransformedProfile(w.t_grid, w.values * e ** (-1.0 / w.N), w.N, w.tail_slope)


# --------------------------------------------------------------------------
# parameterisation


def _from_slopes(t: np.ndarray, x: np.ndarray, N: int) -> TransformedProfile:
    vals = np.concatenate([[0.0], np.cumsum(x * np.diff(t))])
    return TransformedProfile(t, vals, N)


def _energy(t, x, N) -> float:
    return math.fsum((x**N * np.diff(t)).tolist())


def _project(t, x, N):
    x = np.maximum(x, 0.0)
    e = _energy(t, x, N)
    return x * e ** (-1.0 / N) if e > 1.0 else x


def moser_slopes(t: np.ndarray, N: int, L: float) -> np.ndarray:
    """Slopes of the transformed Moser profile with ramp length L = N log n."""
    mid = 0.5 * (t[:-1] + t[1:])
    return np.where(mid < L, L ** (-1.0 / N), 0.0)


def build_grid(N: int, cfg: OptimizerConfig, extra=()) -> np.ndarray:
    horizon = cfg.t_horizon or max(20.0, 1.5 * N * math.log(cfg.moser_max_n))
    base = horizon * (np.arange(cfg.knots + 1) / cfg.knots) ** 1.5
    pts = [p for p in extra if 0.0 < p < horizon]
    return np.union1d(base, pts)


@dataclass
class OptimizeResult:
    profile: TransformedProfile
    phi: float
    phi_fixed: float
    trace: list[float]
    converged: bool
    start: str
    feasibility: FeasibilityReport
    baselines: dict = field(default_factory=dict)
    restarts: list[dict] = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "phi": self.phi, "phi_fixed_quadrature": self.phi_fixed,
            "converged": self.converged, "start": self.start,
            "iterations": len(self.trace) - 1, "trace": self.trace,
            "feasibility": self.feasibility.as_dict(),
            "baselines": self.baselines, "restarts": self.restarts,
        }


class _Objective:
    def __init__(self, ctx, nl, t, q):
        self.ctx, self.nl, self.t, self.q = ctx, nl, t, q
        self.calls = 0

    def __call__(self, x) -> float:
        self.calls += 1
        return phi_transformed_fixed(self.ctx, self.nl, _from_slopes(self.t, x, self.ctx.N), self.q)

    def gradient(self, x, h_rel) -> np.ndarray:
        g = np.zeros_like(x)
        for i in range(x.size):
            h = h_rel * max(abs(x[i]), 1e-3)
            xp, xm = x.copy(), x.copy()
            xp[i] += h
            xm[i] = max(x[i] - h, 0.0)
            g[i] = (self(xp) - self(xm)) / (xp[i] - xm[i])
        return g


def _best_moser_length(ctx, nl, cfg) -> tuple[float, float]:
    """Best ramp length over the Moser family n in [2, moser_max_n].

    A coarse log-spaced scan followed by golden-section refinement in log n;
    non-integer n give valid (feasible) profiles, so the refined value
    dominates every integer member of the family.
    """
    N = ctx.N
    q = cfg.quad

    def val(logn):
        L = N * logn
        t = np.array([0.0, L, L + 1.0])
        x = moser_slopes(t, N, L)
        return phi_transformed_fixed(ctx, nl, _from_slopes(t, x, N), q)

    lo, hi = math.log(2.0), math.log(cfg.moser_max_n)
    grid = np.linspace(lo, hi, 41)
    vals = [val(v) for v in grid]
    k = int(np.argmax(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    gr = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = b - gr * (b - a), a + gr * (b - a)
    fc, fd = val(c), val(d)
    for _ in range(40):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - gr * (b - a)
            fc = val(c)
        else:
            a, c, fc = c, d, fd
            d = a + gr * (b - a)
            fd = val(d)
    cand = [(vals[k], grid[k]), (fc, c), (fd, d)]
    best_v, best_logn = max(cand, key=lambda z: z[0])
    return N * best_logn, best_v


def _ascend(obj: _Objective, x0: np.ndarray, cfg: OptimizerConfig):
    t, N = obj.t, obj.ctx.N
    x = _project(t, x0, N)
    fx = obj(x)
    trace = [fx]
    stagnant = 0
    converged = False
    for _ in range(cfg.max_iters):
        g = obj.gradient(x, cfg.fd_step)
        # coordinates pinned at zero with a descent gradient cannot move
        g[(x <= 0) & (g < 0)] = 0.0
        gn = float(np.linalg.norm(g))
        scale = max(float(np.linalg.norm(x)), 1e-3)
        moved = False
        if gn > 0:
            step = cfg.step_init * scale
            for _ in range(30):
                xn = _project(t, x + step * g / gn, N)
                fn = obj(xn)
                if fn > fx:
                    moved = True
                    break
                step *= cfg.step_shrink
        if not moved:
            xn, fn, moved = _coordinate_search(obj, x, fx, scale, cfg)
        if not moved:
            converged = True
            break
        gain = (fn - fx) / max(abs(fx), 1e-300)
        x, fx = xn, fn
        trace.append(fx)
        stagnant = stagnant + 1 if gain < cfg.tol_obj else 0
        if stagnant >= cfg.stagnation:
            converged = True
            break
    return x, fx, trace, converged


def _coordinate_search(obj, x, fx, scale, cfg):
    """Derivative-free fallback used when the gradient step fails."""
    t, N = obj.t, obj.ctx.N
    step = cfg.step_init * scale / math.sqrt(x.size)
    while step > 1e-8 * scale:
        for i in range(x.size):
            for sgn in (1.0, -1.0):
                xn = x.copy()
                xn[i] += sgn * step
                xn = _project(t, xn, N)
                fn = obj(xn)
                if fn > fx:
                    return xn, fn, True
        step *= cfg.step_shrink
    return x, fx, False


def maximize_phi(ctx: DimensionContext, nl: Nonlinearity, cfg: OptimizerConfig = OptimizerConfig()) -> OptimizeResult:
    """Best profile found from the zero profile, Moser and sharp-sequence
    warm starts and ``cfg.restarts`` randomised restarts."""
    if nl.Cg_infinite:
        raise ValueError("maximisation needs a nonlinearity with finite C_g")
    from .blowup import sharp_sequence

    N = ctx.N
    L_best, moser_best = _best_moser_length(ctx, nl, cfg)
    t = build_grid(N, cfg, [L_best])
    obj = _Objective(ctx, nl, t, cfg.quad)

    starts: list[tuple[str, np.ndarray]] = [("zero", np.zeros(t.size - 1))]
    starts.append((f"moser:L={L_best:.6g}", moser_slopes(t, N, L_best)))
    mid = 0.5 * (t[:-1] + t[1:])
    for n in cfg.sharp_warm:
        if n + 1 < t[-1]:
            w = sharp_sequence(ctx, n)
            starts.append((f"sharp:n={n}", np.diff(w(t)) / np.diff(t)))
    base_vals = {name: obj(_project(t, x, N)) for name, x in starts}
    best_name = max(base_vals, key=lambda k: base_vals[k])
    rng = np.random.default_rng(cfg.seed)
    x_best = _project(t, dict(starts)[best_name], N)
    for r in range(cfg.restarts):
        pert = x_best * np.exp(0.3 * rng.standard_normal(x_best.size)) + 0.05 * rng.random(x_best.size) * mid.max() ** (-1.0 / N)
        starts.append((f"restart:{r}", pert))

    runs = []
    for idx, (name, x0) in enumerate(starts):
        if name.startswith("sharp") or name == "zero":
            # cheap starts are evaluated only; the best warm start is ascended below
            x = _project(t, x0, N)
            runs.append((obj(x), idx, name, x, [obj(x)], True))
            continue
        x, fx, trace, conv = _ascend(obj, x0, cfg)
        runs.append((fx, idx, name, x, trace, conv))
    if best_name in ("zero",) or best_name.startswith("sharp"):
        x, fx, trace, conv = _ascend(obj, dict(starts)[best_name], cfg)
        runs.append((fx, len(runs), best_name + "+ascent", x, trace, conv))

    fx, _, name, x, trace, conv = max(runs, key=lambda r: (r[0], -r[1]))
    w = _from_slopes(t, x, N)
    rep = evaluate_transformed(ctx, nl, w)
    feas = certify_feasible(ctx, to_radial(w))
    return OptimizeResult(
        profile=w, phi=rep.value, phi_fixed=fx, trace=trace, converged=conv, start=name,
        feasibility=feas,
        baselines={"zero": base_vals["zero"], "moser_best": moser_best, "moser_L": L_best},
        restarts=[{"start": nm, "phi": v, "converged": c} for v, _, nm, _, _, c in runs],
    )

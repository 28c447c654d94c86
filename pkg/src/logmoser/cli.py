"""Command-line front end.

Exit codes: 0 success, 2 usage or unreadable input, 3 numerical failure.
Every float is written with 17 significant digits so that runs can be
compared byte for byte.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from ._numerics import RootNotBracketed
from .blowup import DEFAULT_S, GRID_NODES, convergence_report, fmt, reports_to_csv
from .constants import find_t0, make_dimension_context, parse_nonlinearity
from .functional import (
    QuadratureConfig,
    QuadratureError,
    evaluate_radial,
    evaluate_transformed,
    phi_minus_bound,
    scs_threshold,
    threshold_for,
)
from .optimize import OptimizerConfig, certify_feasible, maximize_phi
from .profiles import (
    DEFAULT_NODES,
    RadialProfile,
    dirichlet_radial,
    moser_profile,
    read_profile,
    to_radial,
    to_transformed,
    write_profile,
)

EXIT_USAGE = 2
EXIT_NUMERIC = 3
NUMERIC_ERRORS = (QuadratureError, OverflowError, FloatingPointError, RootNotBracketed, ZeroDivisionError)
COMMANDS = ("constants", "eval", "scs", "moser", "optimize")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    dim: int = 2
    g: str = "const:1"
    n_list: list[int] = field(default_factory=list)
    s: float = DEFAULT_S
    tau: float | None = None
    grid: int | None = None
    tmax: float | None = None
    tol: float = 1e-7
    format: str = "csv"
    out: str | None = None
    seed: int = 0
    g0: float | None = None
    cg: float | None = None
    profile: str | None = None
    knots: int = 24
    iters: int = 60
    restarts: int = 3

    def render(self) -> list[str]:
        """argv that parses back to this config."""
        argv = [self.command]
        if self.profile is not None:
            argv.append(self.profile)
        defaults = RunConfig(self.command)
        for f in fields(self):
            if f.name in ("command", "profile"):
                continue
            v = getattr(self, f.name)
            if v is None or v == getattr(defaults, f.name):
                continue
            flag = "--n" if f.name == "n_list" else f"--{f.name}"
            if f.name == "n_list":
                v = ",".join(str(k) for k in v)
            argv += [flag, str(v)]
        return argv

    @property
    def quad(self) -> QuadratureConfig:
        return QuadratureConfig(tol_rel=self.tol)


def _int_list(text: str) -> list[int]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        val = float(tok)
        if val != int(val):
            raise argparse.ArgumentTypeError(f"n must be an integer, got {tok}")
        out.append(int(val))
    if not out:
        raise argparse.ArgumentTypeError("empty n list")
    return out


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="logmoser", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, g=True):
        p.add_argument("--dim", type=int, default=None if p.prog.endswith("eval") else 2)
        if g:
            p.add_argument("--g", default="const:1", help="const:c | log-pow:s | ratio-log:s | shift:c,rho,C2 | table:path")
        p.add_argument("--tol", type=float, default=1e-7)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", default=None)

    p = sub.add_parser("constants", help="dimension constants and the threshold")
    common(p, g=False)
    p.add_argument("--g0", type=float, default=None)
    p.add_argument("--cg", type=float, default=None)

    p = sub.add_parser("eval", help="evaluate Phi for a profile file")
    p.add_argument("profile")
    common(p)

    p = sub.add_parser("scs", help="sharp concentrating sequence sweep")
    common(p)
    p.add_argument("--n", dest="n_list", type=_int_list, default=[100, 1000, 10000])
    p.add_argument("--s", type=float, default=DEFAULT_S)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--tmax", type=float, default=None)

    p = sub.add_parser("moser", help="Phi along the Moser sequence")
    common(p)
    p.add_argument("--n", dest="n_list", type=_int_list, default=[10, 100, 1000, 10000])
    p.add_argument("--grid", type=int, default=None)

    p = sub.add_parser("optimize", help="search for a maximiser")
    common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--knots", type=int, default=24)
    p.add_argument("--iters", type=int, default=60)
    p.add_argument("--restarts", type=int, default=3)
    p.add_argument("--tmax", type=float, default=None)
    return ap


def parse(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    names = {f.name for f in fields(RunConfig)}
    kw = {k: v for k, v in vars(ns).items() if k in names and (v is not None or k == "dim")}
    return RunConfig(**kw)


# --------------------------------------------------------------------------
# output


def json_text(obj) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return f"{x:.17g}" if math.isfinite(x) else json.dumps(str(x))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {json_text(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(json_text(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _table(tag: str, columns, rows, fmt_name: str) -> str:
    if fmt_name == "json":
        return json_text({"schema": f"logmoser-{tag} v1", "rows": [dict(zip(columns, r)) for r in rows]}) + "\n"
    lines = [f"# logmoser-{tag} v1", ",".join(columns)]
    lines += [",".join(fmt(v) if not isinstance(v, str) else v for v in r) for r in rows]
    return "\n".join(lines) + "\n"


def _emit(cfg: RunConfig, text: str, stdout) -> None:
    if cfg.out and cfg.command != "optimize":
        Path(cfg.out).write_text(text)
    else:
        stdout.write(text)


# --------------------------------------------------------------------------
# commands


def cmd_constants(cfg: RunConfig) -> str:
    ctx = make_dimension_context(cfg.dim)
    cols = ["N", "omega", "alpha_N", "H", "t0"]
    row = [ctx.N, ctx.omega, ctx.alpha_N, ctx.H, find_t0(ctx)]
    if cfg.g0 is not None or cfg.cg is not None:
        g0 = 0.0 if cfg.g0 is None else cfg.g0
        cg = 0.0 if cfg.cg is None else cfg.cg
        cols += ["g0", "Cg", "threshold"]
        row += [g0, cg, scs_threshold(ctx, g0, cg)]
    return _table("constants", cols, [row], cfg.format)


def _load_profile(cfg: RunConfig):
    try:
        return read_profile(cfg.profile, cfg.dim)
    except (OSError, ValueError, IndexError) as exc:
        raise UsageError(f"cannot read profile {cfg.profile}: {exc}") from exc


def cmd_eval(cfg: RunConfig) -> str:
    prof = _load_profile(cfg)
    ctx = make_dimension_context(prof.N)
    nl = parse_nonlinearity(cfg.g, ctx)
    q = cfg.quad
    radial = prof if isinstance(prof, RadialProfile) else to_radial(prof)
    w = to_transformed(prof) if isinstance(prof, RadialProfile) else prof
    feas = certify_feasible(ctx, radial)
    t_rep = evaluate_transformed(ctx, nl, w, q)
    note = ""
    try:
        r_val = evaluate_radial(ctx, nl, radial, q).value
        bound = phi_minus_bound(ctx, nl, radial, q)
    except OverflowError:
        r_val, bound, note = math.nan, math.nan, "F overflows in r; radial path skipped"
    cols = ["N", "g", "phi_radial", "phi_transformed", "difference", "tail_bracket",
            "refinements", "phi_minus_bound", "energy", "monotone", "boundary", "feasible", "note"]
    row = [ctx.N, cfg.g, r_val, t_rep.value, r_val - t_rep.value, t_rep.tail_bracket, t_rep.refinements,
           bound, feas.energy, not feas.violations, feas.boundary, "PASS" if feas.passed else "FAIL", note]
    return _table("eval", cols, [row], cfg.format)


def cmd_scs(cfg: RunConfig) -> str:
    ctx = make_dimension_context(cfg.dim)
    nl = parse_nonlinearity(cfg.g, ctx)
    if nl.Cg_infinite:
        raise UsageError("scs needs a nonlinearity with finite C_g")
    if not 0 < cfg.s < 1.0 / ctx.N:
        raise UsageError(f"--s must lie in (0, 1/N)")
    nodes = cfg.grid or GRID_NODES
    if cfg.tmax is not None:
        from .blowup import SequenceReport, sequence_report
        reps = []
        for n in cfg.n_list:
            try:
                reps.append(sequence_report(ctx, nl, n, cfg.s, cfg.tau, cfg.quad, nodes, cfg.tmax))
            except (ArithmeticError, ValueError, RuntimeError) as exc:
                reps.append(SequenceReport(None, n, cfg.s, error=f"{type(exc).__name__}: {exc}"))
    else:
        reps = convergence_report(ctx, nl, cfg.n_list, cfg.s, cfg.tau, cfg.quad, nodes)
    if cfg.format == "json":
        rows = [{**r.row(), "normalization": r.normalization, "split": r.split, "error": r.error} for r in reps]
        return json_text({"schema": "logmoser-scs v1", "rows": rows}) + "\n"
    return reports_to_csv(reps)


def cmd_moser(cfg: RunConfig) -> str:
    ctx = make_dimension_context(cfg.dim)
    nl = parse_nonlinearity(cfg.g, ctx)
    rows = []
    for n in cfg.n_list:
        if n < 2:
            raise UsageError("Moser profiles need n >= 2")
        m = moser_profile(ctx, n, cfg.grid or DEFAULT_NODES)
        rep = evaluate_transformed(ctx, nl, to_transformed(m), cfg.quad)
        rows.append([n, dirichlet_radial(m), rep.value])
    return _table("moser", ["n", "dirichlet", "phi"], rows, cfg.format)


def cmd_optimize(cfg: RunConfig) -> str:
    ctx = make_dimension_context(cfg.dim)
    nl = parse_nonlinearity(cfg.g, ctx)
    if nl.Cg_infinite:
        raise UsageError("optimize needs a nonlinearity with finite C_g")
    ocfg = OptimizerConfig(knots=cfg.knots, max_iters=cfg.iters, restarts=cfg.restarts,
                           seed=cfg.seed, t_horizon=cfg.tmax)
    res = maximize_phi(ctx, nl, ocfg)
    thr = threshold_for(ctx, nl)
    if cfg.out:
        write_profile(cfg.out, res.profile)
    summary = {"schema": "logmoser-optimize v1", "N": ctx.N, "g": cfg.g, "seed": cfg.seed,
               **res.summary(), "threshold": thr, "above": res.phi > thr,
               "profile_file": cfg.out}
    if not res.converged:
        summary["warning"] = "iteration budget exhausted; best-so-far reported"
    if cfg.format == "json":
        return json_text(summary) + "\n"
    cols = ["N", "g", "phi", "threshold", "above", "converged", "feasible", "start"]
    row = [ctx.N, cfg.g, res.phi, thr, res.phi > thr, res.converged,
           "PASS" if res.feasibility.passed else "FAIL", res.start]
    return _table("optimize", cols, [row], "csv")


HANDLERS = {"constants": cmd_constants, "eval": cmd_eval, "scs": cmd_scs,
            "moser": cmd_moser, "optimize": cmd_optimize}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg = parse(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        if cfg.dim is not None:
            make_dimension_context(cfg.dim)
        if cfg.tol <= 0:
            raise UsageError("--tol must be positive")
        text = HANDLERS[cfg.command](cfg)
        _emit(cfg, text, stdout)
    except UsageError as exc:
        stderr.write(f"logmoser: error: {exc}\n")
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        stderr.write(f"logmoser: numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        stderr.write(f"logmoser: error: {exc}\n")
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())

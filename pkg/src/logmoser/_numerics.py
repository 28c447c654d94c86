"""Small numerical building blocks shared by the evaluators and solvers."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

import numpy as np


class RootNotBracketed(ValueError):
    """Raised when a bisection interval shows no sign change."""


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = 1e-14,
    ftol: float = 0.0,
    maxiter: int = 500,
) -> float:
    """Plain bisection with both an interval and a residual stopping rule.

    scipy's bisect only stops early on an exact zero; several roots here are
    defined by a residual tolerance instead (flat regions, log-form equations),
    hence this helper.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise RootNotBracketed(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or abs(fm) <= ftol or (hi - lo) <= xtol * max(1.0, abs(mid)):
            return mid
        if math.copysign(1.0, fm) == math.copysign(1.0, flo):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def panel_edges(breaks: np.ndarray, per_piece: int, max_width: float) -> np.ndarray:
    """Subdivide every piece [breaks[i], breaks[i+1]] into equal panels.

    Each piece gets at least ``per_piece`` panels and no panel is wider than
    ``max_width``.
    """
    breaks = np.asarray(breaks, dtype=float)
    widths = np.diff(breaks)
    counts = np.maximum(per_piece, np.ceil(widths / max_width).astype(int))
    out = [breaks[:1]]
    for a, b, k in zip(breaks[:-1], breaks[1:], counts):
        out.append(np.linspace(a, b, k + 1)[1:])
    return np.concatenate(out)


def exact_sum(x: np.ndarray) -> float:
    # correctly rounded, so results do not depend on array layout or chunking
    return math.fsum(np.asarray(x, dtype=float).ravel().tolist())

"""One-dimensional search helpers shared by the diagnostic and selection code."""

from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import NoSignChange

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float = 1e-6):
    """Minimize a unimodal ``f`` on ``[a, b]``; returns ``(x, f(x))``.

    The endpoints are compared against the interior estimate so that a
    minimum sitting on the boundary is returned exactly.
    """
    if b < a:
        a, b = b, a
    lo, hi = a, b
    c = hi - _INV_PHI * (hi - lo)
    d = lo + _INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > tol:
        if fc <= fd:
            hi, d, fd = d, c, fc
            c = hi - _INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _INV_PHI * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    best = (x, f(x))
    for edge in (a, b):
        fe = f(edge)
        if fe < best[1]:
            best = (edge, fe)
    return best


def grid_then_golden(
    f: Callable[[float], float], grid: Sequence[float], tol: float = 1e-6
):
    """Scan ``grid`` for the smallest value, then refine between its neighbours.

    Returns ``(x, f(x), values)`` where ``values`` are the grid evaluations.
    """
    g = np.asarray(grid, dtype=float)
    values = np.array([f(x) for x in g])
    i = int(np.nanargmin(values))
    if g.size == 1:
        return float(g[0]), float(values[0]), values
    lo = g[max(i - 1, 0)]
    hi = g[min(i + 1, g.size - 1)]
    x, fx = golden_section(f, lo, hi, tol)
    if values[i] < fx:
        x, fx = float(g[i]), float(values[i])
    return float(x), float(fx), values


def bisect(f: Callable[[float], float], a: float, b: float, tol: float = 1e-7):
    """Root of ``f`` on ``[a, b]`` by plain bisection to interval width ``tol``.

    Raises
    ------
    NoSignChange
        If ``f(a)`` and ``f(b)`` have the same strict sign.
    """
    fa, fb = f(a), f(b)
    if fa == 0:
        return float(a)
    if fb == 0:
        return float(b)
    if np.sign(fa) == np.sign(fb):
        raise NoSignChange(f"no sign change on [{a:.6g}, {b:.6g}] ({fa:.6g}, {fb:.6g})")
    lo, hi = a, b
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return float(mid)
        if np.sign(fm) == np.sign(fa):
            lo, fa = mid, fm
        else:
            hi = mid
    return float(0.5 * (lo + hi))

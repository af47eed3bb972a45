"""
Coefficient length along the ridge path and sphere-constrained least squares.

The squared length ``g(lam) = ||beta_R(lam)||^2`` is available in two
coefficient spaces:

* ``standardized``: ``g(lam) = sum (xi_i U_i)^2 / (xi_i^2 + lam)^2``. This is
  strictly decreasing on ``(-xi_k^2, inf)``.
* ``original``: the slopes are divided by the column scales before taking
  the norm. Rescaling breaks the orthogonal structure, and on ill-conditioned
  data ``g`` can fall to an interior minimum and rise again.

Every ``lam`` on the path minimizes the residual sum of squares on the
sphere of radius ``||beta_R(lam)||``. Several ``lam`` can share one length;
among them the smallest has the smallest residual sum of squares.

The equality-constrained problem ``min ||y - z b||^2 s.t. ||b|| = c`` is
solved in standardized space through the secular equation ``g(lam) = c^2``
on ``(-xi_k^2, inf)``; the inequality version ``||b|| <= c`` returns OLS when
OLS is inside the ball and the equality solution otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import _search
from .dataset import CoefficientVector, StandardizedModel
from .errors import EmptyClass, KKTViolation, LambdaOutOfDomain, SpaceMismatch
from .estimators import fit_ols, fit_ridge, residual_sum_of_squares

__all__ = [
    "LengthFunction",
    "EquivalenceClass",
    "FeasibleInterval",
    "KKTResiduals",
    "length_sq",
    "length_sq_derivative",
    "equivalence_class",
    "minimizing_solution",
    "global_length_minimum",
    "feasible_interval",
    "solve_secular",
    "equality_constrained_fit",
    "inequality_constrained_fit",
    "kkt_residuals",
]

LengthSpace = Literal["original", "standardized"]

#: Upper end of the search when roots are sought beyond ``lambda_max``.
FAR_LAMBDA = 1e12


# ---------------------------------------------------------------------------
# Length function
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LengthFunction:
    """``g(lam) = ||beta_R(lam)||^2`` for one model in one coefficient space."""

    model: StandardizedModel
    space: LengthSpace = "original"
    _w: np.ndarray = field(init=False, repr=False)
    _map: np.ndarray | None = field(init=False, repr=False)

    def __post_init__(self):
        if self.space not in ("original", "standardized"):
            raise SpaceMismatch(f"length is defined in original or standardized space, not {self.space!r}")
        m = self.model
        object.__setattr__(self, "_w", m.xi * m.u)
        # Original-space slopes are diag(1/scales) Q theta.
        mapping = None if self.space == "standardized" else m.svd.right / m.scales[:, None]
        object.__setattr__(self, "_map", mapping)

    @property
    def pole(self) -> float:
        """``-xi_k^2``; the path is defined for ``lam`` strictly above it."""
        return float(-self.model.xi[-1] ** 2)

    def theta(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        return self._w / (self.model.xi**2 + lam[..., None])

    def __call__(self, lam):
        """Vectorized ``g``; accepts a scalar or an array of ``lam``."""
        theta = self.theta(lam)
        if self._map is not None:
            theta = theta @ self._map.T
        out = np.sum(theta**2, axis=-1)
        return float(out) if np.ndim(out) == 0 else out

    def length(self, lam):
        return np.sqrt(self(lam))


def length_sq(f: LengthFunction, lam: float) -> float:
    """``g(lam)``, checking that ``lam`` lies above the pole."""
    lam = float(lam)
    if not math.isfinite(lam) or lam <= f.pole:
        raise LambdaOutOfDomain(f"lambda must exceed -xi_k^2 = {f.pole:.6g}, got {lam}")
    return f(lam)


def length_sq_derivative(f: LengthFunction, lam: float) -> float:
    """``g'(lam) = -2 sum (xi_i U_i)^2 / (xi_i^2 + lam)^3`` (standardized only)."""
    if f.space != "standardized":
        raise SpaceMismatch("the closed-form derivative applies to standardized space only")
    lam = float(lam)
    if not math.isfinite(lam) or lam <= f.pole:
        raise LambdaOutOfDomain(f"lambda must exceed -xi_k^2 = {f.pole:.6g}, got {lam}")
    return float(-2.0 * np.sum(f._w**2 / (f.model.xi**2 + lam) ** 3))


# ---------------------------------------------------------------------------
# Equivalence classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivalenceClass:
    """Ridge parameters sharing the coefficient length ``target_length``."""

    target_length: float
    members: tuple[float, ...]
    space: str
    lambda_max: float

    @property
    def minimizing(self) -> float:
        return self.members[0]


def _roots_on_grid(f: LengthFunction, c2: float, grid: np.ndarray, rel: float) -> list[float]:
    """Roots of ``g - c2`` bracketed by ``grid``, plus tangential touches."""
    h = f(grid) - c2
    roots = [float(x) for x in grid[h == 0]]
    sign = np.sign(h)
    for i in np.nonzero(sign[:-1] * sign[1:] < 0)[0]:
        roots.append(_search.bisect(lambda x: f(x) - c2, grid[i], grid[i + 1], tol=1e-13))
    # A double root leaves no sign change; look at local extrema of g that
    # come within the membership tolerance of c2.
    for i in range(1, grid.size - 1):
        if sign[i] == 0 or sign[i - 1] != sign[i] or sign[i + 1] != sign[i]:
            continue
        if abs(h[i]) > abs(h[i - 1]) or abs(h[i]) > abs(h[i + 1]):
            continue
        x, hx = _search.golden_section(lambda t: abs(f(t) - c2), grid[i - 1], grid[i + 1], 1e-13)
        if abs(math.sqrt(max(hx + c2, 0.0)) - math.sqrt(c2)) <= rel * math.sqrt(c2):
            roots.append(x)
    roots.sort()
    merged: list[float] = []
    for r in roots:
        if not merged or r - merged[-1] > 1e-9:
            merged.append(r)
    return merged


def _far_grid(start: float, points: int) -> np.ndarray:
    lo = max(start, 1e-12)
    return np.geomspace(lo, FAR_LAMBDA, points)


def equivalence_class(
    f: LengthFunction,
    c: float,
    lambda_max: float = 1.0,
    scan_points: int = 10_000,
    search_beyond: bool = False,
) -> EquivalenceClass:
    """All ``lam`` in ``[0, lambda_max]`` with ``||beta_R(lam)|| = c``.

    A dense uniform scan brackets sign changes of ``g - c^2``, each of which
    is refined by bisection. With ``search_beyond`` the scan continues on a
    geometric grid up to ``FAR_LAMBDA``.

    Raises
    ------
    EmptyClass
        If no member is found.
    """
    c = float(c)
    if not c > 0:
        raise ValueError(f"target length must be positive, got {c}")
    if not lambda_max > 0:
        raise ValueError(f"lambda_max must be positive, got {lambda_max}")
    c2 = c * c
    grid = np.linspace(0.0, lambda_max, scan_points)
    members = _roots_on_grid(f, c2, grid, 1e-6)
    if search_beyond:
        far = _roots_on_grid(f, c2, _far_grid(lambda_max, scan_points), 1e-6)
        members += [r for r in far if r > lambda_max + 1e-9]
    if not members:
        raise EmptyClass(f"no ridge parameter in [0, {lambda_max}] gives length {c:.6g}")
    return EquivalenceClass(
        target_length=c, members=tuple(members), space=f.space, lambda_max=float(lambda_max)
    )


def minimizing_solution(
    f: LengthFunction, c: float, lambda_max: float = 1.0, scan_points: int = 10_000
) -> tuple[float, CoefficientVector, EquivalenceClass]:
    """Smallest member of the class and its standardized ridge fit.

    The residual sum of squares at that member is checked to be no larger
    than at any other member.
    """
    cls = equivalence_class(f, c, lambda_max, scan_points)
    m = f.model
    fits = [fit_ridge(m, lam) for lam in cls.members]
    rss = [residual_sum_of_squares(m, b) for b in fits]
    if any(r < rss[0] * (1 - 1e-12) for r in rss[1:]):
        raise AssertionError(f"smallest member does not minimize the residual: {rss}")
    return cls.minimizing, fits[0], cls


def global_length_minimum(
    f: LengthFunction, lambda_max: float = 1.0, scan_points: int = 10_000, tol: float = 1e-9
) -> tuple[float, float]:
    """``(lam_min, ||beta_R(lam_min)||)`` minimizing the length on ``[0, lambda_max]``."""
    grid = np.linspace(0.0, lambda_max, scan_points)
    values = f(grid)
    i = int(np.argmin(values))
    if i == 0 or i == grid.size - 1:
        return float(grid[i]), float(math.sqrt(values[i]))
    x, gx = _search.golden_section(f, grid[i - 1], grid[i + 1], tol)
    return float(x), float(math.sqrt(gx))


@dataclass(frozen=True)
class FeasibleInterval:
    """Ridge parameters whose solution minimizes residuals at its own length.

    ``lower`` is ``None`` when no nonnegative parameter applies; ``upper``
    may be ``inf``. ``lower_open`` marks an interval of the form
    ``(lower, upper)``.
    """

    admissible: bool
    lower: float | None
    upper: float | None
    lower_open: bool
    lambda_min: float
    min_length: float
    note: str


def feasible_interval(
    f: LengthFunction, c: float, lambda_max: float = 1.0, scan_points: int = 10_000
) -> FeasibleInterval:
    """Classify a squared radius ``c^2`` against the length profile.

    With ``(lam_min, g_min)`` the minimum of ``g`` on ``[0, lambda_max]``:

    * ``g_min <= c^2 <= g(0)``: the interval is ``[min g^-1(c^2), lam_min]``,
      admissible.
    * ``c^2 < g_min``: the interval is ``(r, inf)`` with ``r`` the first root of
      ``g = c^2`` beyond ``lam_min``; admissible only if ``r <= lambda_max``.
    * ``c^2 > g(0)``: no nonnegative parameter reaches the length.
    """
    c = float(c)
    if not c > 0:
        raise ValueError(f"radius must be positive, got {c}")
    c2 = c * c
    lam_min, min_len = global_length_minimum(f, lambda_max, scan_points)
    g_min = min_len**2
    g0 = f(0.0)
    if c2 > g0 * (1 + 1e-12):
        return FeasibleInterval(
            False, None, None, False, lam_min, min_len,
            "radius exceeds the unconstrained length; no nonnegative lambda attains it",
        )
    if c2 >= g_min * (1 - 1e-12):
        if c2 >= g0:
            lower = 0.0
        elif c2 <= g_min:
            lower = lam_min
        else:
            grid = np.linspace(0.0, lam_min, max(scan_points, 2))
            roots = _roots_on_grid(f, c2, grid, 1e-6)
            lower = roots[0] if roots else lam_min
        return FeasibleInterval(
            True, float(lower), float(lam_min), False, lam_min, min_len,
            "closed interval ending at the length minimizer",
        )
    roots = _roots_on_grid(f, c2, _far_grid(max(lam_min, 1e-12), scan_points), 1e-6)
    roots = [r for r in roots if r > lam_min]
    if not roots:
        return FeasibleInterval(
            False, None, None, True, lam_min, min_len,
            "no ridge parameter up to the search limit attains the radius",
        )
    r = roots[0]
    admissible = r <= lambda_max
    note = "open interval beyond the length minimizer"
    if not admissible:
        note += f"; starts outside [0, {lambda_max:g}]"
    return FeasibleInterval(admissible, float(r), math.inf, True, lam_min, min_len, note)


# ---------------------------------------------------------------------------
# Sphere-constrained least squares
# ---------------------------------------------------------------------------


def solve_secular(xi, w, c, max_iter: int = 200):
    """Solve ``sum w_i^2 / (xi_i^2 + lam)^2 = c^2`` for ``lam > -xi_k^2``.

    Vectorized over the leading axis of ``w`` (shape ``(..., k)``) and of
    ``c``. The unknown is the shift ``s = lam + xi_k^2 > 0``; safeguarded
    Newton steps on ``1/sqrt(g(s)) - 1/c`` are kept inside a shrinking
    bracket and replaced by bisection when they leave it.

    Returns ``(theta, lam, hard)`` where ``theta_i = w_i / (xi_i^2 + lam)``.
    ``hard`` flags the degenerate case in which every weight on the
    smallest singular value vanishes and ``g`` stays below ``c^2`` on the
    whole domain; there ``lam = -xi_k^2`` and the missing length is placed
    on the first canonical direction of the smallest singular value.
    """
    xi = np.asarray(xi, dtype=float)
    w = np.atleast_2d(np.asarray(w, dtype=float))
    batch = w.shape[0]
    c = np.broadcast_to(np.asarray(c, dtype=float), (batch,)).copy()
    if np.any(~(c > 0)):
        raise ValueError("radius must be positive")
    xk2 = xi[-1] ** 2
    gap = xi**2 - xk2
    eps = 1e-12 * xk2
    w2 = w**2
    wnorm = np.sqrt(w2.sum(axis=1))

    def g(s):
        return np.sum(w2 / (gap + s[:, None]) ** 2, axis=1)

    hi = wnorm / c
    lo = np.maximum(eps, hi - gap.max())
    hard = g(np.full(batch, eps)) < c**2
    hi = np.maximum(hi, lo)
    s = hi.copy()
    active = ~hard & (wnorm > 0)
    for _ in range(max_iter):
        if not active.any():
            break
        sa = s[active]
        d = gap + sa[:, None]
        gs = np.sum(w2[active] / d**2, axis=1)
        dg = -2.0 * np.sum(w2[active] / d**3, axis=1)
        phi = 1.0 / np.sqrt(gs) - 1.0 / c[active]
        lo_a, hi_a = lo[active], hi[active]
        lo_a = np.where(phi < 0, sa, lo_a)
        hi_a = np.where(phi > 0, sa, hi_a)
        dphi = -0.5 * gs**-1.5 * dg
        step = sa - phi / dphi
        bad = ~np.isfinite(step) | (step <= lo_a) | (step >= hi_a)
        step = np.where(bad, 0.5 * (lo_a + hi_a), step)
        done = (phi == 0) | (np.abs(step - sa) <= 4 * np.finfo(float).eps * sa) | (
            hi_a - lo_a <= 4 * np.finfo(float).eps * hi_a
        )
        step = np.where(phi == 0, sa, step)
        s[active] = step
        lo[active], hi[active] = lo_a, hi_a
        idx = np.nonzero(active)[0]
        active[idx[done]] = False
    lam = s - xk2
    theta = w / (gap + s[:, None])
    if hard.any():
        small = gap == 0
        lam[hard] = -xk2
        th = np.zeros((int(hard.sum()), xi.size))
        th[:, ~small] = w[hard][:, ~small] / gap[~small]
        rest = c[hard] ** 2 - np.sum(th**2, axis=1)
        th[:, np.argmax(small)] = np.sqrt(np.maximum(rest, 0.0))
        theta[hard] = th
    zero = wnorm == 0
    if zero.any():
        # y orthogonal to the column space: any sphere point is optimal.
        theta[zero] = 0.0
        theta[zero, -1] = c[zero]
        lam[zero] = -xk2
        hard = hard | zero
    return theta, lam, hard


def equality_constrained_fit(m: StandardizedModel, c: float) -> tuple[CoefficientVector, float]:
    """Minimize ``||y - z b||^2`` subject to ``||b|| = c`` in standardized space.

    Returns the coefficients and the multiplier ``lam``; ``lam > 0`` exactly
    when ``c`` is below the OLS length, and ``lam`` is negative (but above
    ``-xi_k^2``) when ``c`` exceeds it.
    """
    c = float(c)
    if not c > 0 or not math.isfinite(c):
        raise ValueError(f"radius must be positive and finite, got {c}")
    theta, lam, _ = solve_secular(m.xi, m.xi * m.u, c)
    return CoefficientVector(m.svd.right @ theta[0], "standardized"), float(lam[0])


@dataclass(frozen=True)
class KKTResiduals:
    stationarity: float
    primal: float
    dual: float
    complementary: float

    def ok(self, c: float, scale: float = 1.0, tol: float = 1e-8) -> bool:
        return (
            self.stationarity <= tol * scale
            and self.primal <= 1e-9 * c
            and self.dual <= 0.0
            and self.complementary <= tol * (1.0 + c * c)
        )


def kkt_residuals(z, y, beta, lam: float, c: float) -> KKTResiduals:
    """Residuals of the optimality conditions for ``||b|| <= c``.

    ``stationarity`` is ``||(z.T z + lam I) b - z.T y||``; ``primal`` the
    excess of ``||b||`` over ``c`` (zero if inside); ``dual`` the negative
    part of ``lam``; ``complementary`` is ``|lam (c^2 - ||b||^2)|``.
    """
    z = np.asarray(z, dtype=float)
    b = np.asarray(beta, dtype=float)
    station = z.T @ (z @ b) + lam * b - z.T @ np.asarray(y, dtype=float)
    norm = float(np.linalg.norm(b))
    return KKTResiduals(
        stationarity=float(np.linalg.norm(station)),
        primal=max(norm - c, 0.0),
        dual=max(-lam, 0.0),
        complementary=abs(lam * (c * c - norm * norm)),
    )


def inequality_constrained_fit(
    m: StandardizedModel, c: float
) -> tuple[CoefficientVector, float]:
    """Minimize ``||y - z b||^2`` subject to ``||b|| <= c``.

    OLS is returned with ``lam = 0`` when it lies in the ball; otherwise the
    sphere solution with ``lam >= 0``. The KKT conditions are checked before
    returning.

    Raises
    ------
    KKTViolation
        If the certificate fails (numerically pathological input).
    """
    c = float(c)
    if not c > 0 or not math.isfinite(c):
        raise ValueError(f"radius must be positive and finite, got {c}")
    ols = fit_ols(m)
    if ols.norm() <= c:
        beta, lam = ols, 0.0
    else:
        beta, lam = equality_constrained_fit(m, c)
        lam = max(lam, 0.0)
    res = kkt_residuals(m.z, m.y_centered, beta.values, lam, c)
    scale = max(1.0, float(np.linalg.norm(m.z.T @ m.y_centered)))
    if not res.ok(c, scale):
        raise KKTViolation(f"KKT conditions not met: {res}")
    return beta, lam

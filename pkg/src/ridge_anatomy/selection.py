"""
Ridge parameter selection and ridge traces.

Criteria
--------
df
    Effective degrees of freedom ``tr(H_lam) = sum xi^2 / (xi^2 + lam)``.
    Reported as a curve; it does not pick a parameter.
gcv
    ``SS_res(lam) / (n - 1 - tr(H_lam))^2``.
cp
    ``SS_res(lam) / s^2 - n + 2 + 2 tr(H_lam)`` with ``s^2`` the OLS residual
    mean square on ``n - k - 1`` degrees of freedom.
press
    Sum of squared leave-one-out prediction errors. The default ``refit``
    method deletes each observation, re-centers and re-scales the remaining
    predictors to their own correlation form, fits ridge at the same
    ``lam`` and predicts the held-out response. The ``leverage`` method
    keeps the full-data scaling and uses ``e_i / (1 - h_ii)``. The two agree
    at ``lam = 0``.
hkb
    Hoerl-Kennard-Baldwin ``p s^2 / (b.T b)`` from the OLS fit. By default
    ``b`` holds the intercept and the original-unit slopes, so ``p = k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from . import _search
from .dataset import CoefficientVector, StandardizedModel, intercept, to_original_space
from .errors import DegenerateDenominator, EmptyGrid, LambdaOutOfDomain
from .estimators import fit_ols, fit_ridge, residual_root, residual_sum_of_squares

__all__ = [
    "CRITERIA",
    "SELECTORS",
    "HatSummary",
    "SelectionResult",
    "TracePoint",
    "hat_summary",
    "ols_variance",
    "press",
    "hkb",
    "criterion_value",
    "select_lambda",
    "ridge_trace",
    "default_grid",
]

Criterion = Literal["df", "gcv", "cp", "press", "hkb"]
CRITERIA: tuple[str, ...] = ("df", "gcv", "cp", "press", "hkb")
SELECTORS: tuple[str, ...] = ("gcv", "cp", "press")
PressMethod = Literal["refit", "leverage"]
HkbConvention = Literal["intercept", "original", "standardized"]


@dataclass(frozen=True, eq=False)
class HatSummary:
    """Trace and diagonal of the ridge hat matrix (intercept included)."""

    lam: float
    trace: float
    leverages: np.ndarray


@dataclass(frozen=True)
class SelectionResult:
    criterion: str
    chosen_lambda: float
    objective_value: float
    grid_start: float
    grid_stop: float
    grid_points: int


@dataclass(frozen=True, eq=False)
class TracePoint:
    """One point of the ridge trace, coefficients in original units."""

    lam: float
    coefficients: CoefficientVector
    intercept: float
    length: float
    residual_root: float


def _nonnegative(lam: float) -> float:
    lam = float(lam)
    if not np.isfinite(lam) or lam < 0:
        raise LambdaOutOfDomain(f"lambda must be finite and >= 0, got {lam}")
    return lam


def _trace(m: StandardizedModel, lam: float) -> float:
    xi2 = m.xi**2
    return float(np.sum(xi2 / (xi2 + lam)))


def hat_summary(m: StandardizedModel, lam: float) -> HatSummary:
    """``tr(H_lam)`` and leverages ``1/n + sum_i P_ji^2 xi_i^2 / (xi_i^2 + lam)``."""
    lam = _nonnegative(lam)
    xi2 = m.xi**2
    shrink = xi2 / (xi2 + lam)
    leverages = 1.0 / m.n + (m.svd.left**2) @ shrink
    return HatSummary(lam=lam, trace=float(shrink.sum()), leverages=leverages)


def ols_variance(m: StandardizedModel) -> float:
    """OLS residual mean square on ``n - k - 1`` degrees of freedom."""
    dof = m.n - m.k - 1
    if dof <= 0:
        raise DegenerateDenominator(f"n - k - 1 = {dof} leaves no residual degrees of freedom")
    return residual_sum_of_squares(m, fit_ols(m)) / dof


# ---------------------------------------------------------------------------
# PRESS
# ---------------------------------------------------------------------------


class _LeaveOneOut:
    """Per-fold correlation-form factorizations, cached across lambda values."""

    def __init__(self, m: StandardizedModel):
        x = m.original_predictors()
        y = m.original_response()
        self.folds = []
        for i in range(m.n):
            keep = np.arange(m.n) != i
            xf, yf = x[keep], y[keep]
            centers = xf.mean(axis=0)
            scales = np.linalg.norm(xf - centers, axis=0)
            if np.any(scales == 0):
                raise DegenerateDenominator(f"deleting row {i} leaves a constant predictor")
            zf = (xf - centers) / scales
            ymean = yf.mean()
            p, xi, qt = np.linalg.svd(zf, full_matrices=False)
            u = p.T @ (yf - ymean)
            zi = (x[i] - centers) / scales
            self.folds.append((xi, u, zi @ qt.T, ymean, y[i]))

    def __call__(self, lam: float) -> float:
        total = 0.0
        for xi, u, zq, ymean, yi in self.folds:
            if lam <= -xi[-1] ** 2:
                raise LambdaOutOfDomain(f"lambda {lam} outside a leave-one-out fold's domain")
            pred = ymean + zq @ (xi * u / (xi**2 + lam))
            total += (yi - pred) ** 2
        return float(total)


def press(m: StandardizedModel, lam: float, method: PressMethod = "refit") -> float:
    """Leave-one-out prediction error sum of squares (see module docstring)."""
    lam = _nonnegative(lam)
    if method == "refit":
        return _LeaveOneOut(m)(lam)
    if method == "leverage":
        h = hat_summary(m, lam).leverages
        if np.any(h >= 1):
            raise DegenerateDenominator("a leverage equals 1")
        e = (m.y_centered - m.z @ fit_ridge(m, lam).values) / (1.0 - h)
        return float(e @ e)
    raise ValueError(f"unknown PRESS method {method!r}")


def hkb(m: StandardizedModel, convention: HkbConvention = "intercept") -> float:
    """Hoerl-Kennard-Baldwin parameter from the OLS fit.

    ``intercept`` uses ``(k + 1) s^2 / (b0^2 + b.T b)`` with original-unit
    slopes ``b`` and intercept ``b0``; ``original`` drops the intercept and
    uses ``k``; ``standardized`` uses ``k s^2 / (beta.T beta)`` in
    correlation form.
    """
    s2 = ols_variance(m)
    beta = fit_ols(m)
    if convention == "standardized":
        return float(m.k * s2 / (beta.values @ beta.values))
    b = to_original_space(beta, m).values
    if convention == "original":
        return float(m.k * s2 / (b @ b))
    if convention == "intercept":
        b0 = intercept(m, beta)
        return float((m.k + 1) * s2 / (b0**2 + b @ b))
    raise ValueError(f"unknown HKB convention {convention!r}")


def _gcv(m: StandardizedModel, lam: float) -> float:
    denom = m.n - 1 - _trace(m, lam)
    if denom <= 0:
        raise DegenerateDenominator(f"n - 1 - tr(H) = {denom:.6g} is not positive")
    return residual_sum_of_squares(m, fit_ridge(m, lam)) / denom**2


def _cp(m: StandardizedModel, lam: float, s2: float) -> float:
    sse = residual_sum_of_squares(m, fit_ridge(m, lam))
    return sse / s2 - m.n + 2 + 2 * _trace(m, lam)


def criterion_value(
    name: Criterion,
    m: StandardizedModel,
    lam: float = 0.0,
    press_method: PressMethod = "refit",
    hkb_convention: HkbConvention = "intercept",
) -> float:
    """Value of one selection criterion at ``lam`` (ignored by ``hkb``)."""
    if name == "hkb":
        return hkb(m, hkb_convention)
    lam = _nonnegative(lam)
    if name == "df":
        return _trace(m, lam)
    if name == "gcv":
        return _gcv(m, lam)
    if name == "cp":
        return _cp(m, lam, ols_variance(m))
    if name == "press":
        return press(m, lam, press_method)
    raise ValueError(f"unknown criterion {name!r}; choose from {CRITERIA}")


def default_grid(lambda_max: float = 1.0, step: float = 1e-3) -> np.ndarray:
    count = int(round(lambda_max / step))
    return np.linspace(0.0, count * step, count + 1)


def select_lambda(
    name: Literal["gcv", "cp", "press"],
    m: StandardizedModel,
    grid: Sequence[float] | None = None,
    lambda_max: float = 1.0,
    tol: float = 1e-6,
    press_method: PressMethod = "refit",
) -> SelectionResult:
    """Minimize a criterion over ``grid`` then refine by golden section.

    Grid points outside ``[0, lambda_max]`` are dropped.

    Raises
    ------
    EmptyGrid
        If no grid point remains.
    """
    g = default_grid(lambda_max) if grid is None else np.asarray(grid, dtype=float).ravel()
    g = np.unique(g[(g >= 0) & (g <= lambda_max)])
    if g.size == 0:
        raise EmptyGrid(f"no grid points inside [0, {lambda_max}]")
    if name == "gcv":
        objective = lambda lam: _gcv(m, lam)  # noqa: E731
    elif name == "cp":
        s2 = ols_variance(m)
        objective = lambda lam: _cp(m, lam, s2)  # noqa: E731
    elif name == "press":
        if press_method == "refit":
            objective = _LeaveOneOut(m)
        else:
            objective = lambda lam: press(m, lam, press_method)  # noqa: E731
    else:
        raise ValueError(f"{name!r} is not a selection criterion; choose from {SELECTORS}")
    lam, value, _ = _search.grid_then_golden(objective, g, tol)
    return SelectionResult(
        criterion=name,
        chosen_lambda=lam,
        objective_value=value,
        grid_start=float(g[0]),
        grid_stop=float(g[-1]),
        grid_points=int(g.size),
    )


def ridge_trace(m: StandardizedModel, grid: Sequence[float]) -> list[TracePoint]:
    """Ridge fits along ``grid`` (sorted ascending, duplicates removed)."""
    lams = np.unique(np.asarray(grid, dtype=float).ravel())
    points = []
    for lam in lams:
        lam = _nonnegative(lam)
        beta = fit_ridge(m, lam)
        b = to_original_space(beta, m)
        points.append(
            TracePoint(
                lam=lam,
                coefficients=b,
                intercept=intercept(m, b),
                length=b.norm(),
                residual_root=residual_root(m, beta),
            )
        )
    return points

"""
Conditioning diagnostics for ridge and surrogate ridge estimators.

Variance inflation factors, the spectral condition numbers of the data
transformation, parameter transformation, dispersion and correlation
matrices, Berk's bounds on ``c1(z.T z)``, and the Frobenius distance
between a design and its surrogate.

Variance inflation is measured as ``VIF_j = S_jj * (S^-1)_jj`` for the
estimator's scaled dispersion ``S``. For OLS in correlation form this is
the familiar diagonal of ``(z.T z)^-1``; for shrinkage estimators it
compares the actual variance of coefficient ``j`` with the variance it
would have if the remaining coefficients were uncorrelated with it, and
it is always at least 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import _search
from .dataset import StandardizedModel
from .errors import NoSignChange
from .estimators import Kind, canonical_factors, check_lambda, moments, surrogate_design
from .linalg import frobenius_distance, spectral_condition

__all__ = [
    "ConditioningReport",
    "METRICS",
    "vif",
    "correlation_condition",
    "surrogate_distance",
    "conditioning_report",
    "berk_bounds",
    "crossing_lambda",
    "interior_minimum",
]

Metric = Literal[
    "data_transform_cond",
    "param_transform_cond",
    "dispersion_cond",
    "correlation_cond",
    "max_vif",
]
METRICS: tuple[str, ...] = (
    "data_transform_cond",
    "param_transform_cond",
    "dispersion_cond",
    "correlation_cond",
    "max_vif",
)


@dataclass(frozen=True, eq=False)
class ConditioningReport:
    """Condition numbers and VIFs of one estimator at one ridge parameter."""

    kind: str
    lam: float
    data_transform_cond: float
    param_transform_cond: float
    dispersion_cond: float
    correlation_cond: float
    max_vif: float
    vifs: np.ndarray
    surrogate_distance: float | None = None

    @property
    def argmax_vif(self) -> int:
        return int(np.argmax(self.vifs))


def _vif_from_canonical(q: np.ndarray, variance: np.ndarray) -> np.ndarray:
    q2 = q**2
    return (q2 @ variance) * (q2 @ (1.0 / variance))


def vif(kind: Kind, m: StandardizedModel, lam: float = 0.0) -> np.ndarray:
    """Variance inflation factors ``S_jj (S^-1)_jj``.

    Both diagonals are read off the canonical form ``S = Q diag(v) Q.T``,
    so no matrix is inverted.
    """
    lam = check_lambda(m, lam, kind)
    return _vif_from_canonical(m.svd.right, canonical_factors(kind, m.xi, lam).variance)


def correlation_condition(dispersion) -> float:
    """``c1`` of the correlation matrix ``D^-1 S D^-1`` with ``D = diag(sqrt(S_jj))``."""
    s = np.asarray(dispersion, dtype=float)
    d = 1.0 / np.sqrt(np.diag(s))
    corr = s * d[:, None] * d[None, :]
    eig = np.linalg.eigvalsh(0.5 * (corr + corr.T))
    return float(eig[-1] / eig[0])


def surrogate_distance(m: StandardizedModel, lam: float) -> float:
    """Frobenius distance between ``z`` and its surrogate ``z_lam``."""
    return frobenius_distance(m.z, surrogate_design(m, lam))


def conditioning_report(
    kind: Kind, m: StandardizedModel, lam: float = 0.0, with_distance: bool = True
) -> ConditioningReport:
    """Full conditioning summary of ``kind`` at ``lam``.

    The data, parameter and dispersion condition numbers are ratios of the
    extreme canonical factors. For ridge the parameter factor
    ``xi^2 / (xi^2 + lam)`` is increasing in ``xi``, so its ratio is
    ``xi_1^2 (xi_k^2 + lam) / (xi_k^2 (xi_1^2 + lam))``. The Frobenius
    distance is only defined for ``lam >= 0``.
    """
    lam = check_lambda(m, lam, kind)
    f = canonical_factors(kind, m.xi, lam)
    mom = moments(kind, m, lam)
    vifs = _vif_from_canonical(m.svd.right, f.variance)
    distance = None
    if with_distance and lam >= 0:
        distance = surrogate_distance(m, lam)
    return ConditioningReport(
        kind=kind,
        lam=lam,
        data_transform_cond=spectral_condition(f.data),
        param_transform_cond=spectral_condition(f.mean),
        dispersion_cond=spectral_condition(f.variance),
        correlation_cond=correlation_condition(mom.dispersion),
        max_vif=float(vifs.max()),
        vifs=vifs,
        surrogate_distance=distance,
    )


def berk_bounds(m: StandardizedModel) -> tuple[float, float, float]:
    """``(V_1, k * sum(V), c1(z.T z))`` with ``V`` the OLS VIFs.

    For a correlation-form design the chain ``V_1 <= c1 <= k * sum(V)``
    always holds.
    """
    v = vif("ols", m)
    c1 = spectral_condition(m.xi**2)
    return float(v.max()), float(m.k * v.sum()), c1


def _metric(metric: str, kind: str, m: StandardizedModel, lam: float) -> float:
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; choose from {METRICS}")
    report = conditioning_report(kind, m, lam, with_distance=False)
    return float(getattr(report, metric))


def crossing_lambda(
    metric: Metric,
    m: StandardizedModel,
    bracket: tuple[float, float] = (0.01, 0.05),
    tol: float = 1e-10,
) -> tuple[float, float]:
    """Ridge parameter where the ridge and surrogate curves of ``metric`` meet.

    Bisection on ``metric_ridge - metric_surrogate`` over ``bracket``.
    Returns ``(lam, common_value)``.

    Raises
    ------
    NoSignChange
        If the difference does not change sign over the bracket, which
        includes the case where both curves coincide identically.
    """
    lo, hi = float(bracket[0]), float(bracket[1])

    def diff(lam):
        return _metric(metric, "ridge", m, lam) - _metric(metric, "surrogate", m, lam)

    dlo, dhi = diff(lo), diff(hi)
    scale = max(abs(_metric(metric, "ridge", m, lo)), 1.0)
    if abs(dlo) <= 1e-12 * scale and abs(dhi) <= 1e-12 * scale:
        raise NoSignChange(f"ridge and surrogate {metric} coincide on [{lo}, {hi}]")
    lam = _search.bisect(diff, lo, hi, tol)
    value = 0.5 * (_metric(metric, "ridge", m, lam) + _metric(metric, "surrogate", m, lam))
    return lam, value


def interior_minimum(
    metric: Metric,
    kind: Kind,
    m: StandardizedModel,
    bracket: tuple[float, float] = (0.0, 1.0),
    grid_points: int = 2001,
    tol: float = 1e-5,
) -> tuple[float, float]:
    """Minimizer of ``metric`` along the ``kind`` path on ``bracket``.

    A uniform grid locates the basin, golden-section search refines it to
    ``tol``. Returns ``(lam, value)``.
    """
    grid = np.linspace(bracket[0], bracket[1], grid_points)
    lam, value, _ = _search.grid_then_golden(
        lambda x: _metric(metric, kind, m, x), grid, tol
    )
    return lam, value

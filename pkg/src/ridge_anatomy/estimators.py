"""
OLS, ridge, surrogate ridge and generalized ridge estimators.

All fits go through the SVD ``z = P diag(xi) Q.T`` of the standardized
design. With ``U = P.T @ y`` every estimator acts coordinatewise on the
canonical coefficients ``theta = Q.T @ beta``:

=========  ========================  ======================  ======================
kind       theta_i(U)                E(theta_i) / theta_i    Var(theta_i) / sigma^2
=========  ========================  ======================  ======================
ols        U_i / xi_i                1                       1 / xi_i^2
ridge      xi_i U_i / (xi_i^2 + l)   xi_i^2 / (xi_i^2 + l)   xi_i^2 / (xi_i^2 + l)^2
surrogate  U_i / sqrt(xi_i^2 + l)    xi_i / sqrt(xi_i^2 + l) 1 / (xi_i^2 + l)
=========  ========================  ======================  ======================

Forming ``z.T @ z + l I`` and solving would lose about five digits on the
hospital data, so the normal equations are never used for fitting.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .dataset import CoefficientVector, StandardizedModel, to_standardized_space
from .errors import LambdaOutOfDomain, NegativeLambda, ShapeMismatch
from .linalg import solve_spd

__all__ = [
    "Kind",
    "CanonicalFactors",
    "EstimatorMoments",
    "canonical_factors",
    "check_lambda",
    "fit",
    "fit_ols",
    "fit_ridge",
    "surrogate_design",
    "fit_surrogate",
    "fit_generalized_ridge",
    "moments",
    "residual_root",
    "residual_sum_of_squares",
]

Kind = Literal["ols", "ridge", "surrogate"]


@dataclass(frozen=True)
class CanonicalFactors:
    """Per-coordinate multipliers of an estimator in canonical form.

    ``data`` maps ``U_i`` to ``theta_hat_i``; ``mean`` maps ``theta_i`` to
    ``E(theta_hat_i)``; ``variance`` is ``Var(theta_hat_i) / sigma^2``.
    """

    data: np.ndarray
    mean: np.ndarray
    variance: np.ndarray


@dataclass(frozen=True, eq=False)
class EstimatorMoments:
    """First and second moments of an estimator in standardized space.

    ``mean_map`` is the matrix ``M`` with ``E(beta_hat) = M @ beta``;
    ``dispersion`` is ``Var(beta_hat) / sigma^2``.
    """

    mean_map: np.ndarray
    dispersion: np.ndarray


def check_lambda(m: StandardizedModel, lam: float, kind: str = "ridge") -> float:
    """Validate a ridge parameter for ``kind``.

    Ridge admits ``lam > -xi_k^2`` (the shifted system stays positive
    definite); surrogate ridge and the hat-matrix based criteria need
    ``lam >= 0``; OLS ignores ``lam`` entirely.
    """
    lam = float(lam)
    if not np.isfinite(lam):
        raise LambdaOutOfDomain(f"lambda must be finite, got {lam}")
    if kind == "ols":
        return 0.0
    if kind == "ridge":
        floor = -m.xi[-1] ** 2
        if lam <= floor:
            raise LambdaOutOfDomain(
                f"ridge lambda must exceed -xi_k^2 = {floor:.6g}, got {lam:.6g}"
            )
        return lam
    if kind == "surrogate":
        if lam < 0:
            raise LambdaOutOfDomain(f"surrogate lambda must be >= 0, got {lam:.6g}")
        return lam
    raise ValueError(f"unknown estimator kind {kind!r}")


def canonical_factors(kind: Kind, xi, lam: float = 0.0) -> CanonicalFactors:
    """Canonical multipliers for a spectrum ``xi`` (no domain checks)."""
    xi = np.asarray(xi, dtype=float)
    if kind == "ols":
        return CanonicalFactors(1.0 / xi, np.ones_like(xi), 1.0 / xi**2)
    shifted = xi**2 + lam
    if kind == "ridge":
        return CanonicalFactors(xi / shifted, xi**2 / shifted, xi**2 / shifted**2)
    if kind == "surrogate":
        root = np.sqrt(shifted)
        return CanonicalFactors(1.0 / root, xi / root, 1.0 / shifted)
    raise ValueError(f"unknown estimator kind {kind!r}")


def _from_theta(m: StandardizedModel, theta: np.ndarray) -> CoefficientVector:
    return CoefficientVector(m.svd.right @ theta, "standardized")


def fit(kind: Kind, m: StandardizedModel, lam: float = 0.0) -> CoefficientVector:
    """Dispatch to :func:`fit_ols`, :func:`fit_ridge` or :func:`fit_surrogate`."""
    lam = check_lambda(m, lam, kind)
    return _from_theta(m, canonical_factors(kind, m.xi, lam).data * m.u)


def fit_ols(m: StandardizedModel) -> CoefficientVector:
    """Least squares coefficients ``Q diag(1/xi) U``."""
    return fit("ols", m)


def fit_ridge(m: StandardizedModel, lam: float) -> CoefficientVector:
    """Ridge coefficients solving ``(z.T z + lam I) beta = z.T y``.

    Negative ``lam`` down to (but excluding) ``-xi_k^2`` is accepted.
    """
    return fit("ridge", m, lam)


def fit_surrogate(m: StandardizedModel, lam: float) -> CoefficientVector:
    """Least squares on the surrogate design ``X_lam`` (see :func:`surrogate_design`)."""
    return fit("surrogate", m, lam)


def surrogate_design(m: StandardizedModel, lam: float) -> np.ndarray:
    """``P diag(sqrt(xi^2 + lam)) Q.T``, whose Gram matrix is ``z.T z + lam I``."""
    lam = check_lambda(m, lam, "surrogate")
    return (m.svd.left * np.sqrt(m.xi**2 + lam)) @ m.svd.right.T


def fit_generalized_ridge(
    m: StandardizedModel, lambdas, basis: Literal["canonical", "raw"] = "canonical"
) -> CoefficientVector:
    """Generalized ridge with one nonnegative parameter per coordinate.

    Parameters
    ----------
    lambdas : array_like, shape (k,)
    basis : {"canonical", "raw"}
        ``canonical`` shrinks canonical coordinate ``i`` by ``lambdas[i]``,
        i.e. ``theta_i = xi_i U_i / (xi_i^2 + lambdas[i])``. ``raw`` solves
        ``(z.T z + diag(lambdas)) beta = z.T y`` in the standardized basis.
    """
    lams = np.asarray(lambdas, dtype=float).ravel()
    if lams.size != m.k:
        raise ShapeMismatch(f"expected {m.k} ridge parameters, got {lams.size}")
    if np.any(~np.isfinite(lams)) or np.any(lams < 0):
        raise NegativeLambda(f"generalized ridge parameters must be finite and >= 0: {lams}")
    if basis == "canonical":
        return _from_theta(m, m.xi * m.u / (m.xi**2 + lams))
    if basis == "raw":
        gram = m.z.T @ m.z + np.diag(lams)
        return CoefficientVector(solve_spd(gram, m.z.T @ m.y_centered), "standardized")
    raise ValueError(f"unknown basis {basis!r}")


def moments(kind: Kind, m: StandardizedModel, lam: float = 0.0) -> EstimatorMoments:
    """Mean map and scaled dispersion of an estimator.

    Both matrices are assembled as ``Q diag(f) Q.T`` from the canonical
    factors, which is algebraically identical to the normal-equation forms
    (for ridge ``A^-1 z.T z`` and ``A^-1 z.T z A^-1`` with
    ``A = z.T z + lam I``) without inverting ``A``.
    """
    lam = check_lambda(m, lam, kind)
    f = canonical_factors(kind, m.xi, lam)
    q = m.svd.right
    mean_map = (q * f.mean) @ q.T
    dispersion = (q * f.variance) @ q.T
    dispersion = 0.5 * (dispersion + dispersion.T)
    return EstimatorMoments(mean_map=mean_map, dispersion=dispersion)


def residual_sum_of_squares(m: StandardizedModel, c: CoefficientVector) -> float:
    """``||y_c - z beta||^2`` for standardized coefficients ``beta``."""
    if c.space != "standardized":
        c = to_standardized_space(c, m)
    r = m.y_centered - m.z @ c.values
    return float(r @ r)


def residual_root(m: StandardizedModel, c: CoefficientVector) -> float:
    """Square root of the residual sum of squares."""
    return float(np.sqrt(residual_sum_of_squares(m, c)))

"""Ridge, surrogate ridge and sphere-constrained least squares.

The submodules build on each other:

``linalg``       SVD, condition numbers, Frobenius distances, SPD solves
``dataset``      CSV loading, correlation form, coefficient spaces
``estimators``   OLS, ridge, surrogate ridge, generalized ridge, moments
``diagnostics``  VIFs, condition numbers, Berk bounds, curve crossings
``selection``    DF, GCV, Cp, PRESS, HKB and ridge traces
``constraint``   length profiles, equivalence classes, constrained fits
``mixsim``       Monte Carlo checks of the constrained estimators' laws
``cli``          the ``ridge-anatomy`` command
"""

from .dataset import (
    CoefficientVector,
    Dataset,
    StandardizedModel,
    load_csv,
    load_hospital_manpower,
    standardize,
    to_original_space,
    to_standardized_space,
)
from .estimators import fit_generalized_ridge, fit_ols, fit_ridge, fit_surrogate, moments

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "CoefficientVector",
    "Dataset",
    "StandardizedModel",
    "load_csv",
    "load_hospital_manpower",
    "standardize",
    "to_original_space",
    "to_standardized_space",
    "fit_ols",
    "fit_ridge",
    "fit_surrogate",
    "fit_generalized_ridge",
    "moments",
]

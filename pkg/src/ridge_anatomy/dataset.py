"""
Regression datasets in original units and in correlation form.

A :class:`Dataset` holds the response and predictors as read from disk.
:func:`standardize` centers every column and scales predictors to unit
Euclidean norm, so that ``z.T @ z`` has a unit diagonal. The response is
centered only, which keeps residual norms in response units.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from .errors import ConstantColumn, ParseError, ShapeMismatch, SpaceMismatch, TooFewRows
from .linalg import SvdFactors, svd_thin

__all__ = [
    "Space",
    "Dataset",
    "StandardizedModel",
    "CoefficientVector",
    "load_csv",
    "load_hospital_manpower",
    "resolve_data_path",
    "file_sha256",
    "standardize",
    "to_original_space",
    "to_standardized_space",
    "to_canonical_space",
    "from_canonical_space",
    "intercept",
    "HOSPITAL_FIXTURE",
]

Space = Literal["original", "standardized", "canonical"]
_SPACES = ("original", "standardized", "canonical")

HOSPITAL_FIXTURE = "hospital_manpower.csv"


@dataclass(frozen=True, eq=False)
class Dataset:
    """Response vector and predictor matrix in original units."""

    response: np.ndarray
    predictors: np.ndarray
    names: tuple[str, ...]
    response_name: str = "Y"

    def __post_init__(self):
        y = np.array(self.response, dtype=float)
        x = np.array(self.predictors, dtype=float)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise ShapeMismatch(f"response {y.shape} and predictors {x.shape} disagree")
        if len(self.names) != x.shape[1]:
            raise ShapeMismatch(f"{len(self.names)} names for {x.shape[1]} predictors")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(x))):
            raise ValueError("dataset contains non-finite values")
        n, k = x.shape
        if n < k + 2:
            raise TooFewRows(f"need at least k + 2 = {k + 2} rows, got {n}")
        y.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "predictors", x)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self) -> int:
        return self.predictors.shape[0]

    @property
    def k(self) -> int:
        return self.predictors.shape[1]


@dataclass(frozen=True, eq=False)
class StandardizedModel:
    """Centered, unit-norm design with its SVD and the scaling metadata.

    Attributes
    ----------
    z : ndarray, shape (n, k)
        Centered predictors with unit Euclidean column norms.
    y_centered : ndarray, shape (n,)
    y_mean : float
    centers : ndarray, shape (k,)
        Column means of the original predictors.
    scales : ndarray, shape (k,)
        Euclidean norms of the centered original predictors.
    svd : SvdFactors
        Thin SVD of ``z``.
    names : tuple of str
    """

    z: np.ndarray
    y_centered: np.ndarray
    y_mean: float
    centers: np.ndarray
    scales: np.ndarray
    svd: SvdFactors
    names: tuple[str, ...] = ()
    _u: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._u is None:
            u = self.svd.left.T @ self.y_centered
            u.setflags(write=False)
            object.__setattr__(self, "_u", u)

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @property
    def k(self) -> int:
        return self.z.shape[1]

    @property
    def xi(self) -> np.ndarray:
        """Singular values of ``z``."""
        return self.svd.spectrum

    @property
    def u(self) -> np.ndarray:
        """Canonical response ``P.T @ y_centered``."""
        return self._u

    def original_predictors(self) -> np.ndarray:
        return self.z * self.scales + self.centers

    def original_response(self) -> np.ndarray:
        return self.y_centered + self.y_mean


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    """Coefficients tagged with the space they live in."""

    values: np.ndarray
    space: Space

    def __post_init__(self):
        if self.space not in _SPACES:
            raise ValueError(f"unknown coefficient space {self.space!r}")
        v = np.array(self.values, dtype=float).ravel()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))


# ---------------------------------------------------------------------------
# Loading
# ---------------------------------------------------------------------------


def _parse_cell(text: str, row: int, col: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric cell {text!r}", row=row, col=col) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite cell {text!r}", row=row, col=col)
    return value


def load_csv(path) -> Dataset:
    """Read a CSV whose first column is the response.

    The first line is a header naming every column. Blank lines are
    skipped. Rows are numbered from 1 after the header in error messages.

    Raises
    ------
    ParseError
        On unreadable files, ragged rows or non-numeric cells.
    TooFewRows
        If there are fewer than ``k + 2`` data rows.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh)]
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise ParseError("file is empty")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise ParseError("need a response column and at least one predictor", row=0)
    width = len(header)
    data = []
    for i, raw in enumerate(rows[1:], start=1):
        if len(raw) != width:
            raise ParseError(f"expected {width} cells, found {len(raw)}", row=i)
        data.append([_parse_cell(cell.strip(), i, j) for j, cell in enumerate(raw, start=1)])
    k = width - 1
    if len(data) < k + 2:
        raise TooFewRows(f"need at least k + 2 = {k + 2} data rows, got {len(data)}")
    arr = np.array(data, dtype=float)
    return Dataset(
        response=arr[:, 0],
        predictors=arr[:, 1:],
        names=tuple(header[1:]),
        response_name=header[0],
    )


def resolve_data_path(spec: str) -> Path:
    """Map the alias ``hospital`` to the bundled fixture, else return a path."""
    if spec == "hospital":
        return Path(str(resources.files("ridge_anatomy") / "data" / HOSPITAL_FIXTURE))
    return Path(spec)


def load_hospital_manpower() -> Dataset:
    """The bundled 17-hospital manpower data (response Y, predictors X1-X5)."""
    return load_csv(resolve_data_path("hospital"))


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# Correlation form
# ---------------------------------------------------------------------------


def standardize(d: Dataset) -> StandardizedModel:
    """Center all columns and scale predictors to unit Euclidean norm.

    Raises
    ------
    ConstantColumn
        If a predictor has zero spread (relative to its magnitude).
    RankDeficient
        If the standardized design is rank deficient.
    """
    x = d.predictors
    centers = x.mean(axis=0)
    xc = x - centers
    scales = np.linalg.norm(xc, axis=0)
    for j, s in enumerate(scales):
        magnitude = np.linalg.norm(x[:, j])
        if s == 0 or s <= 1e-14 * magnitude:
            raise ConstantColumn(j, d.names[j] if j < len(d.names) else None)
    z = xc / scales
    y_mean = float(d.response.mean())
    yc = d.response - y_mean
    for arr in (z, yc, centers, scales):
        arr.setflags(write=False)
    return StandardizedModel(
        z=z,
        y_centered=yc,
        y_mean=y_mean,
        centers=centers,
        scales=scales,
        svd=svd_thin(z),
        names=tuple(d.names),
    )


def _check(c: CoefficientVector, space: str, m: StandardizedModel) -> None:
    if c.space != space:
        raise SpaceMismatch(f"expected {space} coefficients, got {c.space}")
    if len(c) != m.k:
        raise ShapeMismatch(f"{len(c)} coefficients for a model with k = {m.k}")


def to_original_space(c: CoefficientVector, m: StandardizedModel) -> CoefficientVector:
    """Slopes in original units: ``b_j = beta_j / scales_j``."""
    _check(c, "standardized", m)
    return CoefficientVector(c.values / m.scales, "original")


def to_standardized_space(c: CoefficientVector, m: StandardizedModel) -> CoefficientVector:
    _check(c, "original", m)
    return CoefficientVector(c.values * m.scales, "standardized")


def to_canonical_space(c: CoefficientVector, m: StandardizedModel) -> CoefficientVector:
    """``theta = Q.T @ beta`` for standardized ``beta``."""
    _check(c, "standardized", m)
    return CoefficientVector(m.svd.right.T @ c.values, "canonical")


def from_canonical_space(c: CoefficientVector, m: StandardizedModel) -> CoefficientVector:
    _check(c, "canonical", m)
    return CoefficientVector(m.svd.right @ c.values, "standardized")


def intercept(m: StandardizedModel, c: CoefficientVector) -> float:
    """Intercept matching a fit, ``y_mean - centers @ b`` with original slopes ``b``."""
    if c.space == "standardized":
        c = to_original_space(c, m)
    _check(c, "original", m)
    return float(m.y_mean - m.centers @ c.values)


def coefficients_in(c: CoefficientVector, m: StandardizedModel, space: str) -> CoefficientVector:
    """Convert standardized coefficients into ``space``."""
    if space == c.space:
        return c
    if c.space != "standardized":
        raise SpaceMismatch(f"can only convert from standardized, got {c.space}")
    if space == "original":
        return to_original_space(c, m)
    if space == "canonical":
        return to_canonical_space(c, m)
    raise ValueError(f"unknown coefficient space {space!r}")


def dataset_from_arrays(y: Sequence[float], x, names: Sequence[str] | None = None) -> Dataset:
    """Convenience constructor used by tests and the simulator."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if names is None:
        names = tuple(f"X{j + 1}" for j in range(x.shape[1]))
    return Dataset(response=np.asarray(y, dtype=float), predictors=x, names=tuple(names))

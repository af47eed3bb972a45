"""
Monte Carlo study of sphere-constrained least squares estimators.

For a fixed design ``X`` (used as given, without intercept or centering)
and ``Y = X beta + e`` with Gaussian errors, each replicate computes

* ``b_L``: least squares,
* ``b_c``: least squares on the sphere ``||b|| = c``,
* ``b_0``: least squares in the ball ``||b|| <= c``.

The law of ``b_c`` lives on the sphere. The law of ``b_0`` mixes the law of
``b_L`` truncated to the open ball (weight ``alpha = P(||b_L|| < c)``) with
the law of ``b_c`` (weight ``1 - alpha``). The report checks sphere
residency, branch agreement, the optimality conditions, and compares the
interior draws of ``b_0`` with independent draws of ``b_L`` accepted into the
ball by an energy-distance permutation test.

Randomness comes from Philox streams keyed by ``(seed, purpose, batch)``,
so a report does not depend on how batches are scheduled across threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats
from scipy.spatial.distance import cdist

from .constraint import solve_secular
from .errors import DegenerateScenario, InputError, ShapeMismatch
from .linalg import SvdFactors, svd_thin

__all__ = [
    "SimScenario",
    "MixtureReport",
    "RankCheck",
    "run_simulation",
    "rank_deficiency_check",
    "sphere_covariance_check",
    "energy_distance",
    "energy_test",
    "stream",
    "thread_count",
]

BATCH_SIZE = 4096
_MAIN, _TRUNCATED, _PERMUTE, _DESIGN = 0, 1, 2, 3


def stream(seed: int, purpose: int, batch: int = 0) -> np.random.Generator:
    """Counter-based generator for ``(seed, purpose, batch)``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(purpose), int(batch)))
    return np.random.Generator(np.random.Philox(ss))


def thread_count() -> int:
    """Worker count from ``RIDGE_ANATOMY_THREADS`` (0 or unset means all cores)."""
    raw = os.environ.get("RIDGE_ANATOMY_THREADS", "0").strip() or "0"
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"RIDGE_ANATOMY_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise InputError("RIDGE_ANATOMY_THREADS must be >= 0")
    return value or (os.cpu_count() or 1)


def random_design(n: int, k: int, seed: int) -> np.ndarray:
    """Gaussian design with columns scaled to unit norm."""
    x = stream(seed, _DESIGN).standard_normal((n, k))
    return x / np.linalg.norm(x, axis=0)


@dataclass(frozen=True, eq=False)
class SimScenario:
    design: np.ndarray
    beta_true: np.ndarray
    sigma: float
    radius: float
    replicates: int
    seed: int
    energy_sample: int = 200
    permutations: int = 999

    def __post_init__(self):
        x = np.array(self.design, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        b = np.array(self.beta_true, dtype=float).ravel()
        if x.shape[1] != b.size:
            raise ShapeMismatch(f"design has {x.shape[1]} columns, beta has {b.size} entries")
        if not self.sigma > 0 or not math.isfinite(self.sigma):
            raise InputError(f"sigma must be positive, got {self.sigma}")
        if not self.radius > 0 or not math.isfinite(self.radius):
            raise InputError(f"radius must be positive, got {self.radius}")
        if int(self.replicates) < 1:
            raise InputError(f"replicates must be >= 1, got {self.replicates}")
        if not 0 <= int(self.seed) < 2**64:
            raise InputError("seed must fit in 64 unsigned bits")
        object.__setattr__(self, "design", x)
        object.__setattr__(self, "beta_true", b)

    @property
    def k(self) -> int:
        return self.design.shape[1]


@dataclass(frozen=True, eq=False)
class MixtureReport:
    """Summary of one simulation run.

    ``alpha_ci`` is the 95% Wilson interval for ``alpha_hat`` and
    ``alpha_half_width`` half its width. Branch counts record replicates
    where ``b_0`` disagrees with ``b_L`` (interior) or with ``b_c`` beyond
    1e-8 (boundary). ``mixture_pvalue`` is ``None`` when fewer than 20
    interior replicates exist.
    """

    replicates: int
    alpha_hat: float
    alpha_ci: tuple[float, float]
    alpha_half_width: float
    alpha_oracle: float | None
    sphere_residency_max_err: float
    covariance_spectrum: np.ndarray
    interior_mismatches: int
    boundary_mismatches: int
    max_boundary_gap: float
    kkt_stationarity_max: float
    kkt_primal_max: float
    kkt_dual_min_lambda: float
    kkt_complementary_max: float
    hard_cases: int
    mixture_statistic: float | None
    mixture_pvalue: float | None
    degenerate: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["covariance_spectrum"] = [float(v) for v in self.covariance_spectrum]
        d["alpha_ci"] = [float(v) for v in self.alpha_ci]
        return d


def _wilson(successes: int, total: int, level: float = 0.95) -> tuple[float, float]:
    z = stats.norm.ppf(0.5 + level / 2)
    p = successes / total
    denom = 1 + z * z / total
    centre = (p + z * z / (2 * total)) / denom
    half = z * math.sqrt(p * (1 - p) / total + z * z / (4 * total * total)) / denom
    # The bounds are exactly 0 and 1 at the extremes; rounding can miss them.
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == total else min(1.0, centre + half)
    return float(lo), float(hi)


def _scalar_oracle(s: SimScenario, svd: SvdFactors) -> float | None:
    """``P(|b_L| < c)`` for one predictor: ``b_L ~ N(beta, sigma^2 / ||x||^2)``."""
    if s.k != 1:
        return None
    sd = s.sigma / svd.spectrum[0]
    b = s.beta_true[0]
    c = s.radius
    return float(stats.norm.cdf((c - b) / sd) - stats.norm.cdf((-c - b) / sd))


def _batch(s: SimScenario, svd: SvdFactors, gram: np.ndarray, index: int, size: int) -> dict:
    rng = stream(s.seed, _MAIN, index)
    x = s.design
    eps = rng.standard_normal((size, x.shape[0])) * s.sigma
    y = x @ s.beta_true + eps
    xi, q = svd.spectrum, svd.right
    u = y @ svd.left
    theta_l = u / xi
    b_l = theta_l @ q.T
    c = s.radius
    theta_c, lam_c, hard = solve_secular(xi, xi * u, c)
    b_c = theta_c @ q.T
    norm_l = np.linalg.norm(b_l, axis=1)
    interior = norm_l < c
    b_0 = np.where(interior[:, None], b_l, b_c)
    lam_0 = np.where(interior, 0.0, np.maximum(lam_c, 0.0))

    xty = y @ x
    station = b_0 @ gram + lam_0[:, None] * b_0 - xty
    norm_0 = np.linalg.norm(b_0, axis=1)
    norm_c = np.linalg.norm(b_c, axis=1)
    gap = np.abs(b_0 - b_c).max(axis=1)
    return {
        "size": size,
        "interior": int(interior.sum()),
        "sphere_err": float(np.max(np.abs(norm_c - c) / c)),
        "b_c": b_c,
        "b_0_interior": b_0[interior],
        "interior_mismatch": int(np.count_nonzero(np.any(b_0[interior] != b_l[interior], axis=1))),
        "boundary_mismatch": int(np.count_nonzero(gap[~interior] > 1e-8)),
        "boundary_gap": float(gap[~interior].max()) if (~interior).any() else 0.0,
        "stationarity": float(np.linalg.norm(station, axis=1).max()),
        "primal": float(np.maximum(norm_0 - c, 0.0).max()),
        "dual": float(lam_0.min()),
        "complementary": float(np.abs(lam_0 * (c * c - norm_0**2)).max()),
        "hard": int(hard.sum()),
    }


def _truncated_sample(s: SimScenario, svd: SvdFactors, count: int) -> np.ndarray:
    """``count`` independent draws of ``b_L`` accepted into the open ball."""
    out = []
    have = 0
    batch = 0
    x = s.design
    while have < count:
        rng = stream(s.seed, _TRUNCATED, batch)
        y = x @ s.beta_true + rng.standard_normal((BATCH_SIZE, x.shape[0])) * s.sigma
        b_l = ((y @ svd.left) / svd.spectrum) @ svd.right.T
        keep = b_l[np.linalg.norm(b_l, axis=1) < s.radius]
        out.append(keep)
        have += keep.shape[0]
        batch += 1
        if batch > 10_000:
            break
    return np.concatenate(out)[:count]


def energy_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample energy statistic ``2 E|A-B| - E|A-A'| - E|B-B'|``."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    return float(2 * cdist(a, b).mean() - cdist(a, a).mean() - cdist(b, b).mean())


def energy_test(a, b, permutations: int = 999, rng: np.random.Generator | None = None):
    """Energy distance with a permutation p-value ``(1 + #{T* >= T}) / (1 + B)``.

    All permutations reuse one pooled distance matrix; each permuted
    statistic is assembled from block sums computed with a single matrix
    product.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    na, nb = a.shape[0], b.shape[0]
    pooled = np.vstack([a, b])
    d = cdist(pooled, pooled)
    rng = rng if rng is not None else np.random.default_rng()
    labels = np.zeros((pooled.shape[0], permutations + 1))
    labels[:na, 0] = 1.0
    for j in range(1, permutations + 1):
        labels[rng.permutation(pooled.shape[0])[:na], j] = 1.0
    other = 1.0 - labels
    dl = d @ labels
    s_aa = np.einsum("ij,ij->j", labels, dl)
    s_ab = np.einsum("ij,ij->j", other, dl)
    s_bb = np.einsum("ij,ij->j", other, d @ other)
    stat = 2 * s_ab / (na * nb) - s_aa / na**2 - s_bb / nb**2
    observed = stat[0]
    pvalue = (1 + np.count_nonzero(stat[1:] >= observed - 1e-12 * abs(observed))) / (
        permutations + 1
    )
    return float(observed), float(pvalue)


def run_simulation(s: SimScenario, strict: bool = False, workers: int | None = None) -> MixtureReport:
    """Simulate ``s.replicates`` responses and summarize the constrained estimators.

    Parameters
    ----------
    strict : bool
        Raise :class:`DegenerateScenario` when ``alpha_hat`` is exactly 0 or 1
        with at least 1000 replicates; otherwise the report is returned with
        ``degenerate=True``.
    workers : int, optional
        Thread count; defaults to :func:`thread_count`.
    """
    svd = svd_thin(s.design)
    gram = s.design.T @ s.design
    sizes = [BATCH_SIZE] * (s.replicates // BATCH_SIZE)
    if s.replicates % BATCH_SIZE:
        sizes.append(s.replicates % BATCH_SIZE)
    workers = thread_count() if workers is None else max(1, workers)
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda t: _batch(s, svd, gram, *t), enumerate(sizes)))
    else:
        parts = [_batch(s, svd, gram, i, size) for i, size in enumerate(sizes)]

    total = s.replicates
    interior = sum(p["interior"] for p in parts)
    alpha = interior / total
    lo, hi = _wilson(interior, total)
    b_c = np.concatenate([p["b_c"] for p in parts])
    if total > 1:
        cov = np.atleast_2d(np.cov(b_c, rowvar=False))
        spectrum = np.linalg.eigvalsh(cov)
    else:
        spectrum = np.zeros(s.k)
    degenerate = total >= 1000 and interior in (0, total)
    if degenerate and strict:
        raise DegenerateScenario(
            f"alpha_hat = {alpha:g} over {total} replicates; the mixture cannot be tested"
        )

    statistic = pvalue = None
    inside = np.concatenate([p["b_0_interior"] for p in parts])
    if inside.shape[0] >= 20 and not degenerate:
        m = min(s.energy_sample, inside.shape[0])
        pick = stream(s.seed, _PERMUTE, 0).choice(inside.shape[0], size=m, replace=False)
        reference = _truncated_sample(s, svd, m)
        if reference.shape[0] >= 20:
            statistic, pvalue = energy_test(
                inside[np.sort(pick)], reference, s.permutations, stream(s.seed, _PERMUTE, 1)
            )

    return MixtureReport(
        replicates=total,
        alpha_hat=alpha,
        alpha_ci=(lo, hi),
        alpha_half_width=(hi - lo) / 2,
        alpha_oracle=_scalar_oracle(s, svd),
        sphere_residency_max_err=max(p["sphere_err"] for p in parts),
        covariance_spectrum=spectrum,
        interior_mismatches=sum(p["interior_mismatch"] for p in parts),
        boundary_mismatches=sum(p["boundary_mismatch"] for p in parts),
        max_boundary_gap=max(p["boundary_gap"] for p in parts),
        kkt_stationarity_max=max(p["stationarity"] for p in parts),
        kkt_primal_max=max(p["primal"] for p in parts),
        kkt_dual_min_lambda=min(p["dual"] for p in parts),
        kkt_complementary_max=max(p["complementary"] for p in parts),
        hard_cases=sum(p["hard"] for p in parts),
        mixture_statistic=statistic,
        mixture_pvalue=pvalue,
        degenerate=degenerate,
    )


@dataclass(frozen=True)
class RankCheck:
    rank_deficient: bool
    smallest: float
    second_smallest: float
    ratio: float


def sphere_covariance_check(eigenvalues, k: int) -> RankCheck:
    """Compare the smallest covariance eigenvalue with the next one up."""
    ev = np.sort(np.asarray(eigenvalues, dtype=float))
    if ev.size != k or k < 2:
        raise ShapeMismatch(f"need {k} >= 2 eigenvalues, got {ev.size}")
    smallest, second = float(ev[0]), float(ev[1])
    ratio = smallest / second if second > 0 else math.inf
    return RankCheck(smallest <= 1e-3 * second, smallest, second, ratio)


def rank_deficiency_check(report: MixtureReport, k: int, min_replicates: int = 10_000) -> RankCheck:
    """Whether the sphere solutions look rank ``k - 1`` in their covariance.

    Sphere membership itself is the exact constraint (see
    ``sphere_residency_max_err``); this check reports whether, in addition,
    the spread normal to the sphere has collapsed relative to the tangential
    spread.
    """
    if report.replicates < min_replicates:
        raise InputError(f"need at least {min_replicates} replicates, got {report.replicates}")
    return sphere_covariance_check(report.covariance_spectrum, k)

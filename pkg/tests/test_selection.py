import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import reference_values as ref
from conftest import random_model
from ridge_anatomy.dataset import dataset_from_arrays, standardize
from ridge_anatomy.errors import EmptyGrid, LambdaOutOfDomain
from ridge_anatomy.estimators import fit_ols
from ridge_anatomy.selection import (
    criterion_value,
    hat_summary,
    hkb,
    ols_variance,
    press,
    ridge_trace,
    select_lambda,
)

seeds = st.integers(0, 2**32 - 1)


def loo_oracle(x, y, lam):
    """Brute-force leave-one-out: re-standardize each fold and solve directly."""
    total = 0.0
    n = len(y)
    for i in range(n):
        keep = np.arange(n) != i
        xf, yf = x[keep], y[keep]
        mu, ym = xf.mean(axis=0), yf.mean()
        s = np.linalg.norm(xf - mu, axis=0)
        zf = (xf - mu) / s
        beta = np.linalg.solve(zf.T @ zf + lam * np.eye(x.shape[1]), zf.T @ (yf - ym))
        total += (y[i] - ym - ((x[i] - mu) / s) @ beta) ** 2
    return total


def ols_loo_oracle(x, y):
    """Leave-one-out OLS with an intercept column, no standardization at all."""
    n = len(y)
    design = np.column_stack([np.ones(n), x])
    total = 0.0
    for i in range(n):
        keep = np.arange(n) != i
        coef, *_ = np.linalg.lstsq(design[keep], y[keep], rcond=None)
        total += (y[i] - design[i] @ coef) ** 2
    return total


class TestHatSummary:
    def test_lambda_zero(self, hospital):
        assert hat_summary(hospital, 0.0).trace == pytest.approx(5.0, abs=1e-12)
        assert criterion_value("df", hospital, 0.0) == pytest.approx(5.0, abs=1e-12)

    def test_large_lambda(self, hospital):
        assert hat_summary(hospital, 1e12).trace < 1e-10

    def test_matches_assembled_hat(self, rng):
        m = random_model(rng)
        h = m.z @ np.linalg.solve(m.z.T @ m.z + np.eye(m.k), m.z.T) + 1.0 / m.n
        s = hat_summary(m, 1.0)
        assert s.trace == pytest.approx(np.trace(h) - 1.0, abs=1e-10)
        assert_allclose(s.leverages, np.diag(h), atol=1e-10)

    def test_rejects_negative(self, hospital):
        with pytest.raises(LambdaOutOfDomain):
            hat_summary(hospital, -0.01)


class TestCriteria:
    def test_sigma_hat_dof(self, hospital):
        r = fit_ols(hospital).values
        resid = hospital.y_centered - hospital.z @ r
        assert ols_variance(hospital) == pytest.approx(resid @ resid / 11)

    def test_hkb_fixture(self, hospital):
        assert hkb(hospital) == pytest.approx(ref.HKB_VALUE, abs=1e-5)
        assert criterion_value("hkb", hospital, 0.7) == hkb(hospital)

    def test_hkb_alternate_conventions_differ(self, hospital):
        # Neither alternative reaches the published figure.
        assert abs(hkb(hospital, "original") - ref.HKB_VALUE) > 1.0
        assert abs(hkb(hospital, "standardized") - ref.HKB_VALUE) > 0.5

    def test_hkb_standardized_formula(self, rng):
        m = random_model(rng)
        b = fit_ols(m).values
        assert hkb(m, "standardized") == pytest.approx(m.k * ols_variance(m) / (b @ b))

    def test_gcv_formula(self, rng):
        m = random_model(rng)
        lam = 0.25
        h = m.z @ np.linalg.solve(m.z.T @ m.z + lam * np.eye(m.k), m.z.T)
        r = m.y_centered - h @ m.y_centered
        expected = (r @ r) / (m.n - (1 + np.trace(h))) ** 2
        assert criterion_value("gcv", m, lam) == pytest.approx(expected, rel=1e-10)

    def test_cp_formula(self, rng):
        m = random_model(rng)
        lam = 0.25
        h = m.z @ np.linalg.solve(m.z.T @ m.z + lam * np.eye(m.k), m.z.T)
        r = m.y_centered - h @ m.y_centered
        expected = (r @ r) / ols_variance(m) - m.n + 2 + 2 * np.trace(h)
        assert criterion_value("cp", m, lam) == pytest.approx(expected, rel=1e-10)

    def test_press_toy(self):
        # One predictor, small sample: the leverage shortcut and refitting agree at 0.
        x = np.array([[0.0], [1.0], [3.0], [4.5]])
        y = np.array([1.0, 2.5, 2.0, 5.0])
        m = standardize(dataset_from_arrays(y, x))
        oracle = ols_loo_oracle(x, y)
        assert press(m, 0.0, "leverage") == pytest.approx(oracle, rel=1e-10)
        assert press(m, 0.0, "refit") == pytest.approx(oracle, rel=1e-10)

    def test_press_refit_oracle(self, rng):
        m = random_model(rng)
        x, y = m.original_predictors(), m.original_response()
        for lam in (0.0, 0.05, 0.7):
            assert press(m, lam) == pytest.approx(loo_oracle(x, y, lam), rel=1e-9)

    def test_gcv_smallest_sample(self):
        # n = k + 2 is the smallest accepted sample; the denominator is 1 at lambda 0.
        x = np.array([[0.0, 1.0], [1.0, 0.0], [2.0, 2.5], [3.0, 1.0]])
        m = standardize(dataset_from_arrays([1.0, 2.0, 2.0, 4.0], x))
        sse = criterion_value("gcv", m, 0.0)
        assert sse == pytest.approx(float(np.sum((m.y_centered - m.z @ fit_ols(m).values) ** 2)))

    def test_unknown(self, hospital):
        with pytest.raises(ValueError):
            criterion_value("aic", hospital, 0.1)


class TestSelectLambda:
    def test_gcv(self, hospital):
        r = select_lambda("gcv", hospital)
        assert r.chosen_lambda == pytest.approx(ref.GCV_LAMBDA, abs=1e-5)

    def test_cp(self, hospital):
        r = select_lambda("cp", hospital)
        assert r.chosen_lambda == pytest.approx(ref.CP_LAMBDA, abs=5e-4)

    def test_press(self, hospital):
        r = select_lambda("press", hospital)
        assert r.chosen_lambda == pytest.approx(ref.PRESS_LAMBDA, abs=5e-3)

    def test_gcv_and_cp_close(self, hospital):
        a = select_lambda("gcv", hospital).chosen_lambda
        b = select_lambda("cp", hospital).chosen_lambda
        assert abs(a - b) <= 1e-3

    def test_result_not_worse_than_neighbours(self, hospital):
        r = select_lambda("gcv", hospital)
        step = 1e-3
        for nb in (r.chosen_lambda - step, r.chosen_lambda + step):
            assert r.objective_value <= criterion_value("gcv", hospital, max(nb, 0.0))
        assert r.grid_start <= r.chosen_lambda <= r.grid_stop

    def test_empty_grid(self, hospital):
        with pytest.raises(EmptyGrid):
            select_lambda("gcv", hospital, grid=[2.0, 3.0])

    def test_not_a_selector(self, hospital):
        with pytest.raises(ValueError):
            select_lambda("df", hospital)


class TestRidgeTrace:
    def test_table_grid(self, hospital):
        points = ridge_trace(hospital, ref.TRACE[:, 0])
        assert len(points) == len(ref.TRACE)
        for p, row in zip(points, ref.TRACE):
            assert p.lam == row[0]
            assert p.length == pytest.approx(row[1], abs=0.01)
            assert p.residual_root == pytest.approx(row[2], abs=0.01)

    def test_detail_row(self, hospital):
        (p,) = ridge_trace(hospital, [0.08])
        assert p.length == pytest.approx(33.1448, abs=5e-4)
        assert p.residual_root == pytest.approx(2735.75, abs=0.01)
        assert p.coefficients.space == "original"

    def test_sorted_unique(self, hospital):
        points = ridge_trace(hospital, [0.5, 0.1, 0.5])
        assert [p.lam for p in points] == [0.1, 0.5]

    def test_zero_is_ols(self, hospital):
        (p,) = ridge_trace(hospital, [0.0])
        assert p.length == pytest.approx(ref.TRACE[0, 1], abs=0.01)


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------


@given(seeds, st.lists(st.floats(0.0, 5.0), min_size=2, max_size=8, unique=True))
def test_trace_monotone(seed, grid):
    m = random_model(np.random.default_rng(seed))
    grid = sorted(grid)
    points = ridge_trace(m, grid)
    roots = [p.residual_root for p in points]
    traces = [hat_summary(m, g).trace for g in grid]
    ols_root = points[0].residual_root if grid[0] == 0 else ridge_trace(m, [0.0])[0].residual_root
    for a, b, ga, gb in zip(roots, roots[1:], grid, grid[1:]):
        if gb - ga > 1e-6:
            assert b > a
    for a, b, ga, gb in zip(traces, traces[1:], grid, grid[1:]):
        if gb - ga > 1e-6:
            assert b < a
    assert all(0 < t <= m.k + 1e-12 for t in traces)
    assert min(roots) >= ols_root - 1e-9


@given(seeds, st.integers(4, 12))
def test_press_shortcut_at_zero(seed, n):
    rng = np.random.default_rng(seed)
    k = min(3, n - 3)
    m = random_model(rng, n=n, k=k)
    x, y = m.original_predictors(), m.original_response()
    oracle = ols_loo_oracle(x, y)
    assert press(m, 0.0, "leverage") == pytest.approx(oracle, rel=1e-8)
    assert press(m, 0.0, "refit") == pytest.approx(oracle, rel=1e-8)


@given(seeds, st.floats(0.0, 3.0))
def test_leverages_in_unit_interval(seed, lam):
    m = random_model(np.random.default_rng(seed))
    h = hat_summary(m, lam).leverages
    assert np.all(h > 0) and np.all(h < 1)

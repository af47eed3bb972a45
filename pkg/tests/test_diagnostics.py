import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

import reference_values as ref
from conftest import centered_orthonormal, random_model
from ridge_anatomy.dataset import dataset_from_arrays, standardize
from ridge_anatomy.diagnostics import (
    berk_bounds,
    conditioning_report,
    correlation_condition,
    crossing_lambda,
    interior_minimum,
    vif,
)
from ridge_anatomy.errors import LambdaOutOfDomain, NoSignChange
from ridge_anatomy.estimators import canonical_factors, fit, moments, surrogate_design
from ridge_anatomy.linalg import spectral_condition

seeds = st.integers(0, 2**32 - 1)


def orthonormal(rng, n=9, k=3):
    z = centered_orthonormal(rng, n, k)
    return standardize(dataset_from_arrays(rng.standard_normal(n), z))


def c1(a):
    s = np.linalg.svd(a, compute_uv=False)
    return s[0] / s[-1]


class TestVif:
    def test_orthonormal_ols(self, rng):
        assert_allclose(vif("ols", orthonormal(rng)), 1.0, atol=1e-10)

    def test_hospital_ols(self, hospital):
        v = vif("ols", hospital)
        assert v.max() == pytest.approx(ref.OLS_MAX_VIF, rel=1e-4)
        assert int(np.argmax(v)) == 0

    def test_hospital_ridge_row(self, hospital):
        row = ref.RIDGE_VIFS[6]
        assert row[0] == 0.05
        assert_allclose(vif("ridge", hospital, 0.05), row[1:6], rtol=5e-4)

    def test_hospital_surrogate_row(self, hospital):
        row = ref.SURROGATE_VIFS[4]
        assert_allclose(vif("surrogate", hospital, row[0]), row[1:6], rtol=5e-4)

    def test_matches_explicit_matrices(self, rng):
        m = random_model(rng, collinearity=0.7)
        s = moments("ridge", m, 0.2).dispersion
        expected = np.diag(s) * np.diag(np.linalg.inv(s))
        assert_allclose(vif("ridge", m, 0.2), expected, rtol=1e-8)

    def test_ols_is_inverse_gram_diagonal(self, rng):
        m = random_model(rng, collinearity=0.5)
        assert_allclose(vif("ols", m), np.diag(np.linalg.inv(m.z.T @ m.z)), rtol=1e-8)

    def test_domain(self, hospital):
        with pytest.raises(LambdaOutOfDomain):
            vif("surrogate", hospital, -0.1)


class TestConditioningReport:
    @pytest.mark.parametrize("kind", ["ridge", "surrogate"])
    def test_lambda_zero(self, hospital, kind):
        r = conditioning_report(kind, hospital, 0.0)
        xi = hospital.xi
        assert r.data_transform_cond == pytest.approx(xi[0] / xi[-1], rel=1e-12)
        assert r.dispersion_cond == pytest.approx((xi[0] / xi[-1]) ** 2, rel=1e-12)
        assert r.param_transform_cond == pytest.approx(1.0, abs=1e-12)

    def test_hospital_ridge_hkb(self, hospital):
        r = conditioning_report("ridge", hospital, 0.616964)
        assert r.data_transform_cond == pytest.approx(53.4183, rel=5e-4)
        assert r.max_vif == pytest.approx(250.4309, rel=5e-4)
        assert r.dispersion_cond == pytest.approx(2853.5130, rel=5e-4)

    def test_hospital_surrogate(self, hospital):
        r = conditioning_report("surrogate", hospital, 0.010)
        assert r.data_transform_cond == pytest.approx(20.4561, rel=5e-4)
        assert r.max_vif == pytest.approx(56.6915, rel=5e-4)
        assert r.dispersion_cond == pytest.approx(418.4530, rel=5e-4)

    def test_distance_only_when_requested(self, hospital):
        assert conditioning_report("ridge", hospital, 0.1, with_distance=False).surrogate_distance is None
        assert conditioning_report("ridge", hospital, 0.23).surrogate_distance == pytest.approx(
            0.6429, abs=5e-5
        )

    def test_ols_dispersion_equals_gram_condition(self, rng):
        m = random_model(rng, collinearity=0.6)
        r = conditioning_report("ridge", m, 0.0)
        assert r.dispersion_cond == pytest.approx(c1(m.z.T @ m.z), rel=1e-9)


class TestBerk:
    def test_orthonormal(self, rng):
        lower, upper, cond = berk_bounds(orthonormal(rng, k=3))
        assert lower == pytest.approx(1.0)
        assert cond == pytest.approx(1.0)
        assert upper == pytest.approx(9.0)

    def test_hospital(self, hospital):
        lower, upper, cond = berk_bounds(hospital)
        assert lower == pytest.approx(ref.OLS_MAX_VIF, rel=1e-4)
        assert cond == pytest.approx(ref.CONDITION_ZTZ, rel=5e-4)
        assert lower <= cond <= upper


class TestCrossings:
    def test_data_condition(self, hospital):
        lam, value = crossing_lambda("data_transform_cond", hospital)
        assert lam == pytest.approx(ref.DATA_COND_CROSSING[0], abs=5e-5)
        assert value == pytest.approx(ref.DATA_COND_CROSSING[1], rel=5e-4)
        r = conditioning_report("ridge", hospital, lam).data_transform_cond
        s = conditioning_report("surrogate", hospital, lam).data_transform_cond
        assert abs(r - s) <= 1e-6 * value

    def test_correlation_condition(self, hospital):
        lam, value = crossing_lambda("correlation_cond", hospital)
        assert lam == pytest.approx(ref.CORR_COND_CROSSING[0], abs=5e-5)
        assert value == pytest.approx(ref.CORR_COND_CROSSING[1], rel=5e-4)

    def test_degenerate_spectrum(self, rng):
        with pytest.raises(NoSignChange):
            crossing_lambda("data_transform_cond", orthonormal(rng))

    def test_unknown_metric(self, hospital):
        with pytest.raises(ValueError):
            crossing_lambda("nonsense", hospital)


class TestInteriorMinimum:
    def test_ridge_data_condition_dips(self, hospital):
        def at(lam):
            return conditioning_report("ridge", hospital, lam).data_transform_cond

        assert at(0.015) < at(0.0)
        assert at(0.015) < at(0.09)

    def test_ridge_data_condition_location(self, hospital):
        lam, value = interior_minimum("data_transform_cond", "ridge", hospital)
        assert lam == pytest.approx(ref.RIDGE_DATA_COND_MIN[0], abs=1e-3)
        # The printed value is the curve evaluated at the rounded location.
        stated = conditioning_report("ridge", hospital, ref.RIDGE_DATA_COND_MIN[0])
        assert stated.data_transform_cond == pytest.approx(ref.RIDGE_DATA_COND_MIN[1], rel=1e-3)
        assert value <= stated.data_transform_cond

    def test_correlation_location(self, hospital):
        lam, value = interior_minimum("correlation_cond", "ridge", hospital)
        assert lam == pytest.approx(ref.RIDGE_CORR_COND_MIN[0], abs=1e-3)
        assert value == pytest.approx(ref.RIDGE_CORR_COND_MIN[1], rel=1e-3)

    def test_dense_scan_oracle(self, hospital):
        lam, value = interior_minimum("dispersion_cond", "ridge", hospital)
        grid = np.linspace(0.0, 0.1, 20001)
        scan = [conditioning_report("ridge", hospital, g, with_distance=False).dispersion_cond for g in grid]
        assert value <= min(scan) * (1 + 1e-9)
        assert lam == pytest.approx(grid[int(np.argmin(scan))], abs=1e-4)


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------


@given(seeds, st.floats(0.0, 1.0))
def test_berk_chain(seed, collinearity):
    rng = np.random.default_rng(seed)
    m = random_model(rng, n=10, k=4, collinearity=collinearity * 0.99)
    lower, upper, cond = berk_bounds(m)
    assert lower <= cond * (1 + 1e-9)
    assert cond <= upper * (1 + 1e-9)
    # Independent eigen computation.
    eig = np.linalg.eigvalsh(m.z.T @ m.z)
    assert cond == pytest.approx(eig[-1] / eig[0], rel=1e-8)


@given(seeds, st.floats(0.0, 5.0), st.sampled_from(["ols", "ridge", "surrogate"]))
def test_vif_lower_bound(seed, lam, kind):
    m = random_model(np.random.default_rng(seed), collinearity=0.5)
    assert np.all(vif(kind, m, lam) >= 1 - 1e-9)


@given(seeds, st.floats(0.0, 5.0), st.sampled_from(["ridge", "surrogate"]))
def test_berk_chain_for_every_dispersion(seed, lam, kind):
    # VIFs defined as S_jj (S^-1)_jj are OLS VIFs of a correlation matrix,
    # so the same bound chain holds along both paths.
    m = random_model(np.random.default_rng(seed), collinearity=0.7)
    r = conditioning_report(kind, m, lam, with_distance=False)
    assert r.max_vif <= r.correlation_cond * (1 + 1e-9)
    assert r.correlation_cond <= m.k * r.vifs.sum() * (1 + 1e-9)


@given(
    st.lists(st.floats(1e-2, 10.0), min_size=2, max_size=5, unique=True),
    st.floats(1e-4, 5.0),
    st.floats(1.01, 10),
)
def test_surrogate_monotone(xi, lam, ratio):
    xi = np.sort(xi)[::-1]

    def data(x):
        return spectral_condition(canonical_factors("surrogate", xi, x).data)

    def disp(x):
        return spectral_condition(canonical_factors("surrogate", xi, x).variance)

    assert data(lam * ratio) < data(lam)
    assert disp(lam * ratio) < disp(lam)
    assert disp(lam) == pytest.approx(data(lam) ** 2, rel=1e-12)


@given(seeds, st.floats(0.0, 3.0), st.sampled_from(["ridge", "surrogate"]))
def test_closed_forms_match_assembled(seed, lam, kind):
    m = random_model(np.random.default_rng(seed), collinearity=0.4)
    r = conditioning_report(kind, m, lam, with_distance=False)
    mom = moments(kind, m, lam)
    g = m.z.T @ m.z
    a_inv = np.linalg.inv(g + lam * np.eye(m.k))
    # Linear map Y -> beta_hat restricted to the column space of z.
    if kind == "ridge":
        data_map = a_inv @ m.z.T
    else:
        x = surrogate_design(m, lam)
        data_map = a_inv @ x.T
    assert r.data_transform_cond == pytest.approx(c1(data_map), rel=1e-9)
    assert r.param_transform_cond == pytest.approx(c1(mom.mean_map), rel=1e-9)
    assert r.dispersion_cond == pytest.approx(c1(mom.dispersion), rel=1e-9)
    assert fit(kind, m, lam).values == pytest.approx(data_map @ m.y_centered, rel=1e-8, abs=1e-10)


def test_correlation_condition_identity():
    assert correlation_condition(np.diag([3.0, 0.2, 7.0])) == pytest.approx(1.0)

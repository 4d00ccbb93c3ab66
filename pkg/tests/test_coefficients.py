import numpy as np
import pytest
from closed_forms import FAMILIES, bivariate, equicorrelated

from wassdep.coefficients import (
    CoefficientKind,
    all_coefficients,
    coefficient,
    cov_to_corr,
    d1,
    d2,
    kappa_values,
    rv,
    rv_adjusted,
)
from wassdep.coupling import BlockPartition, random_coupling, sigma_m
from wassdep.errors import DegenerateDenominator, ZeroVariance
from wassdep.linalg import bures_wasserstein_sq
from wassdep.simulation import ar1_correlation


def random_block(rng, k):
    A = rng.standard_normal((k, k + 1))
    return A @ A.T / (k + 1) + 0.01 * np.eye(k)


def random_orthogonal(rng, k):
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    return Q * np.sign(np.diag(R))


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_closed_forms(family):
    make, p, grid = FAMILIES[family]
    for rho in grid:
        R, expected = make(rho)
        got = all_coefficients(R, p)
        for kind, value in expected.items():
            assert got[kind] == pytest.approx(value, abs=1e-10), (family, rho, kind)


def test_bivariate_point_value():
    # (2 - sqrt(1.5) - sqrt(0.5)) / (2 - sqrt(2))
    R, _ = bivariate(0.5)
    assert d1(R, 1) == pytest.approx(0.11633650601051995, abs=1e-12)
    assert d2(R, 1) == pytest.approx(d1(R, 1), abs=1e-10)


def test_equicorrelated_point_value():
    R, _ = equicorrelated(0.5)
    assert d2(R, 1) == pytest.approx(0.16155428989503126, abs=1e-12)


@pytest.mark.parametrize(
    "rho, p, v1, v2",
    [(0.25, 1, 0.026, 0.025), (0.8, 1, 0.343, 0.332)],
)
def test_ar_settings(rho, p, v1, v2):
    R = ar1_correlation(rho, 3)
    assert d1(R, p) == pytest.approx(v1, abs=5e-4)
    assert d2(R, p) == pytest.approx(v2, abs=5e-4)


def test_rv_bivariate_and_sigma_m():
    R, _ = bivariate(-0.6)
    assert rv(R, 1) == pytest.approx(0.36, abs=1e-14)
    assert rv_adjusted(R, 1) == pytest.approx(0.36, abs=1e-14)
    rng = np.random.default_rng(20)
    S = sigma_m(random_block(rng, 2), random_block(rng, 3))
    assert rv_adjusted(S, 2) == pytest.approx(1.0, abs=1e-10)


def test_boundary_values():
    rng = np.random.default_rng(21)
    for _ in range(50):
        p, q = rng.integers(1, 5, size=2)
        S1, S2 = random_block(rng, p), random_block(rng, q)
        S0 = np.block([[S1, np.zeros((p, q))], [np.zeros((q, p)), S2]])
        Sm = sigma_m(S1, S2)
        for f in (d1, d2, rv, rv_adjusted):
            assert f(S0, p) == pytest.approx(0.0, abs=1e-10)
        for f in (d1, d2, rv_adjusted):
            assert f(Sm, p) == pytest.approx(1.0, abs=1e-10)


def test_range_and_rv_ordering():
    rng = np.random.default_rng(22)
    for i in range(200):
        p, q = rng.integers(1, 5, size=2)
        S = random_coupling(random_block(rng, p), random_block(rng, q), i)
        res = all_coefficients(S, p)
        for k in CoefficientKind:
            assert 0.0 <= res[k] <= 1.0
        assert res.rv <= res.rv_adj + 1e-12


def test_block_orthogonal_invariance():
    rng = np.random.default_rng(23)
    for i in range(50):
        p, q = rng.integers(1, 5, size=2)
        S = random_coupling(random_block(rng, p), random_block(rng, q), i)
        O = np.zeros((p + q, p + q))
        O[:p, :p] = random_orthogonal(rng, p)
        O[p:, p:] = random_orthogonal(rng, q)
        T = O @ S @ O.T
        for f in (d1, d2, rv, rv_adjusted):
            assert f(T, p) == pytest.approx(f(S, p), abs=1e-9)


def test_d2_numerator_is_half_bures_distance():
    rng = np.random.default_rng(24)
    for i in range(50):
        p, q = rng.integers(1, 5, size=2)
        S = random_coupling(random_block(rng, p), random_block(rng, q), i)
        part = BlockPartition(S, p)
        num = np.trace(S) - np.sum(np.sqrt(kappa_values(part)))
        assert num == pytest.approx(0.5 * bures_wasserstein_sq(S, part.sigma0), abs=1e-9)


def test_scale_matters():
    # coefficients of a covariance matrix and of its correlation matrix differ in general
    S = np.array([[4.0, 1.0, 0.5], [1.0, 1.0, 0.3], [0.5, 0.3, 0.25]])
    assert abs(d1(S, 1) - d1(cov_to_corr(S), 1)) > 1e-3


def test_zero_block():
    S = np.diag([1.0, 0.0, 0.0])
    with pytest.raises(DegenerateDenominator):
        d1(S, 1)
    with pytest.raises(DegenerateDenominator):
        d2(S, 1)


def test_dispatch():
    R = ar1_correlation(0.5, 3)
    for k in CoefficientKind:
        assert coefficient(k, R, 1) == all_coefficients(R, 1)[k]
    assert CoefficientKind.parse("RV_ADJ") is CoefficientKind.RVADJ


class TestCovToCorr:
    def test_correlation_unchanged(self):
        R = ar1_correlation(0.4, 4)
        np.testing.assert_allclose(cov_to_corr(R), R, atol=1e-15)

    def test_diagonal(self):
        np.testing.assert_array_equal(cov_to_corr(np.diag([4.0, 9.0])), np.eye(2))

    def test_scale_invariance(self):
        rng = np.random.default_rng(25)
        S = random_block(rng, 4)
        D = np.diag(rng.uniform(0.1, 10, 4))
        R = cov_to_corr(S)
        np.testing.assert_allclose(cov_to_corr(D @ S @ D), R, atol=1e-14)
        np.testing.assert_array_equal(np.diag(R), 1.0)

    def test_zero_variance(self):
        with pytest.raises(ZeroVariance):
            cov_to_corr(np.diag([1.0, 0.0]))

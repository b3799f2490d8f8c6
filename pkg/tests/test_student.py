"""Student-t closed forms: CDF complement, quantiles, tail expectations, ES."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from ellvar import (
    EllipticModel,
    StudentParams,
    dispersion_from_covariance,
    expected_shortfall,
    gaussian_generator,
    quantile_multiplier,
    student_big_g,
    student_es_multiplier,
    student_expected_shortfall,
    student_generator,
    student_quantile,
    student_tail_expectation,
    student_var,
    var,
)
from ellvar.errors import DimensionError, DomainError

# scipy.stats.t.sf oracle, frozen
BIG_G_CASES = [
    (0.5, 3.0, 0.3257239824240755),
    (1.0, 1.5, 0.22556768363835528),
    (2.5, 7.0, 0.020496109292876437),
    (10.0, 4.0, 0.00028100181135799556),
    (25.0, 2.5, 0.00022929692737030398),
]


@pytest.mark.parametrize("s, nu, expected", BIG_G_CASES)
def test_student_big_g_oracle(s, nu, expected):
    assert student_big_g(s, nu) == pytest.approx(expected, rel=1e-12)


def test_student_big_g_symmetry_and_center():
    assert student_big_g(0.0, 5.0) == 0.5
    for s, nu in ((0.7, 3.0), (2.2, 11.0)):
        assert student_big_g(-s, nu) == pytest.approx(
            1.0 - student_big_g(s, nu), rel=1e-14
        )


def test_student_big_g_against_scipy_sweep():
    rng = np.random.default_rng(29)
    for _ in range(100):
        s = rng.uniform(-8.0, 8.0)
        nu = rng.uniform(1.1, 200.0)
        assert student_big_g(s, nu) == pytest.approx(
            stats.t.sf(s, nu), rel=1e-11, abs=1e-15
        )


def test_student_big_g_methods_agree():
    rng = np.random.default_rng(31)
    for _ in range(40):
        s = rng.uniform(0.1, 20.0)
        nu = rng.uniform(2.0, 500.0)
        hyp = student_big_g(s, nu, method="hyp2f1")
        bet = student_big_g(s, nu, method="beta")
        assert abs(hyp - bet) <= 1e-12


def test_student_big_g_rejects_unknown_method():
    with pytest.raises(DomainError):
        student_big_g(1.0, 5.0, method="series")


def test_student_quantile_reference_cells():
    # spot values from the published multiplier table
    assert student_quantile(0.01, 2.0) == pytest.approx(6.96456, abs=5e-4)
    assert student_quantile(0.05, 5.0) == pytest.approx(2.01505, abs=5e-4)
    assert student_quantile(0.01, 300.0) == pytest.approx(2.33884, abs=5e-4)


def test_student_quantile_matches_scipy():
    for alpha in (0.01, 0.025, 0.05, 0.2):
        for nu in (2.0, 4.5, 30.0, 1000.0):
            assert student_quantile(alpha, nu) == pytest.approx(
                stats.t.ppf(1.0 - alpha, nu), abs=1e-10
            )


def test_student_quantile_round_trip():
    rng = np.random.default_rng(37)
    for _ in range(50):
        alpha = rng.uniform(0.001, 0.499)
        nu = rng.uniform(1.5, 400.0)
        q = student_quantile(alpha, nu)
        assert abs(student_big_g(q, nu) - alpha) <= 1e-12


def test_student_quantile_rejects_bad_alpha():
    for alpha in (0.0, 0.5, -0.2):
        with pytest.raises(DomainError):
            student_quantile(alpha, 5.0)


def test_student_tail_expectation_formula():
    # oracle: f(t) (nu + t^2) / (nu - 1), and the integral definition
    from scipy import integrate

    for t in (-2.0, 0.0, 1.0, 4.0):
        for nu in (3.0, 9.0):
            ref = stats.t.pdf(t, nu) * (nu + t * t) / (nu - 1.0)
            assert student_tail_expectation(t, nu) == pytest.approx(ref, rel=1e-12)
    num, _ = integrate.quad(lambda z: z * stats.t.pdf(z, 5.0), 1.3, np.inf)
    assert student_tail_expectation(1.3, 5.0) == pytest.approx(num, rel=1e-9)


# univariate oracle es = f(q) (nu + q^2) / (alpha (nu - 1)), frozen
ES_MULTIPLIER_CASES = [
    (0.01, 2.0, 14.071247279470292),
    (0.01, 3.0, 7.003082036242112),
    (0.05, 3.0, 3.8742675177192942),
    (0.01, 5.0, 4.452429111817763),
    (0.05, 5.0, 2.8901289462730744),
    (0.01, 10.0, 3.3632514750145672),
    (0.05, 10.0, 2.408401041846861),
    (0.01, 100.0, 2.7224381085980878),
    (0.01, 1000.0, 2.6708306715311148),
]


@pytest.mark.parametrize("alpha, nu, expected", ES_MULTIPLIER_CASES)
def test_student_es_multiplier_oracle(alpha, nu, expected):
    assert student_es_multiplier(alpha, nu) == pytest.approx(expected, rel=1e-11)


def test_student_es_multiplier_accepts_precomputed_quantile():
    q = student_quantile(0.025, 7.0)
    assert student_es_multiplier(0.025, 7.0, quantile=q) == pytest.approx(
        student_es_multiplier(0.025, 7.0), rel=1e-14
    )


def test_student_es_multiplier_no_overflow_at_large_nu():
    # the nu^{nu/2} prefactor overflows a plain evaluation around nu ~ 150
    for nu in (150.0, 500.0, 1000.0):
        q = stats.t.ppf(0.99, nu)
        ref = stats.t.pdf(q, nu) * (nu + q * q) / (0.01 * (nu - 1.0))
        assert student_es_multiplier(0.01, nu) == pytest.approx(ref, rel=1e-10)


def test_student_generator_mass_and_hooks():
    from scipy import integrate

    for n, nu in ((1, 3.0), (2, 5.0), (3, 8.0)):
        gen = student_generator(n, nu)
        area = (
            2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)
        )
        mass, _ = integrate.quad(
            lambda r: area * r ** (n - 1) * gen.g(r * r), 0.0, np.inf
        )
        assert mass == pytest.approx(1.0, rel=1e-9)
        assert gen.tail is not None and gen.tail_expectation is not None
        assert gen.family == "student"
        assert gen.family_params == (nu,)


def test_student_generator_is_cached():
    assert student_generator(2, 5.0) is student_generator(2, 5.0)
    assert student_generator(2, 5.0) is not student_generator(3, 5.0)


def test_gaussian_generator_hooks():
    gen = gaussian_generator(2)
    assert gen.family == "gaussian"
    assert gen.tail(1.1) == pytest.approx(stats.norm.sf(1.1), rel=1e-13)
    assert quantile_multiplier(gen, 0.025) == pytest.approx(
        stats.norm.ppf(0.975), abs=1e-10
    )


def test_student_params_validation_and_covariance():
    sigma = np.array([[2.0, 0.3], [0.3, 1.0]])
    params = StudentParams(nu=5.0, mu=np.zeros(2), sigma=sigma)
    assert params.dimension == 2
    assert np.allclose(params.covariance, (5.0 / 3.0) * sigma)
    with pytest.raises(DomainError):
        StudentParams(nu=2.0, mu=np.zeros(2), sigma=sigma)


def test_dispersion_from_covariance_round_trip():
    cov = np.array([[1.5, -0.2], [-0.2, 0.8]])
    disp = dispersion_from_covariance(cov, 7.0)
    assert np.allclose(disp, (5.0 / 7.0) * cov)
    params = StudentParams(nu=7.0, mu=np.zeros(2), sigma=disp)
    assert np.allclose(params.covariance, cov, rtol=1e-14)
    with pytest.raises(DomainError):
        dispersion_from_covariance(cov, 2.0)


def test_student_var_reduces_to_quantile_times_vol():
    sigma = np.array([[4.0, 1.0], [1.0, 2.0]])
    mu = np.array([0.01, -0.03])
    params = StudentParams(nu=6.0, mu=mu, sigma=sigma)
    d = np.array([2.0, -1.0])
    vol = math.sqrt(float(d @ sigma @ d))
    mean = float(d @ mu)
    expected = -mean + student_quantile(0.025, 6.0) * vol
    assert student_var(params, d, 0.025) == pytest.approx(expected, rel=1e-12)


def test_student_expected_shortfall_closed_vs_engine():
    sigma = np.array([[1.0, 0.4], [0.4, 2.0]])
    params = StudentParams(nu=8.0, mu=np.array([0.002, 0.0]), sigma=sigma)
    d = np.array([1.0, 3.0])
    closed = student_expected_shortfall(params, d, 0.01)
    engine = expected_shortfall(params.to_model(), d, 0.01)
    assert closed == pytest.approx(engine, rel=1e-12)
    assert closed > student_var(params, d, 0.01)


def test_student_to_model_round_trip():
    params = StudentParams(nu=4.0, mu=np.zeros(3), sigma=np.eye(3))
    model = params.to_model()
    assert isinstance(model, EllipticModel)
    d = np.array([1.0, 1.0, 1.0])
    assert var(model, d, 0.05) == pytest.approx(
        student_var(params, d, 0.05), rel=1e-14
    )


def test_student_dimension_mismatch():
    params = StudentParams(nu=5.0, mu=np.zeros(2), sigma=np.eye(2))
    with pytest.raises(DimensionError):
        student_var(params, np.ones(3), 0.05)
    with pytest.raises(DimensionError):
        student_expected_shortfall(params, np.ones(3), 0.05)

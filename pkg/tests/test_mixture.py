"""Mixture-of-elliptic risk measures against single-component and 1-D oracles."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import optimize, stats

from ellvar import (
    EllipticModel,
    MixtureModel,
    expected_shortfall,
    gaussian_generator,
    marginal_tail,
    mixture_expected_shortfall,
    mixture_var,
    student_generator,
    var,
)
from ellvar.errors import DimensionError, DomainError


def _component(generator, mu, sigma):
    return EllipticModel(
        generator=generator, mu=np.asarray(mu, float), sigma=np.asarray(sigma, float)
    )


def _two_normal_mixture():
    quiet = _component(gaussian_generator(2), [0.0, 0.0], np.eye(2))
    noisy = _component(gaussian_generator(2), [0.0, 0.0], 9.0 * np.eye(2))
    return MixtureModel(components=[(0.7, quiet), (0.3, noisy)])


def test_single_component_reduces_to_elliptic():
    comp = _component(student_generator(2, 5.0), [0.0, 0.0], [[2.0, 0.5], [0.5, 1.0]])
    mix = MixtureModel(components=[(1.0, comp)])
    d = np.array([1.0, -2.0])
    for alpha in (0.01, 0.05):
        assert mixture_var(mix, d, alpha) == pytest.approx(
            var(comp, d, alpha), abs=1e-10
        )
        assert mixture_expected_shortfall(mix, d, alpha) == pytest.approx(
            expected_shortfall(comp, d, alpha), abs=1e-10
        )


def test_two_normal_mixture_against_univariate_inversion():
    # P&L is a scale mixture of two centered normals, so the VaR solves
    # b1 Phi(-x/v1) + b2 Phi(-x/v2) = alpha in one dimension.
    mix = _two_normal_mixture()
    d = np.array([1.0, 1.0])
    v1 = math.sqrt(2.0)
    v2 = math.sqrt(18.0)
    for alpha in (0.01, 0.025, 0.05):
        def tail(x: float) -> float:
            return 0.7 * stats.norm.sf(x / v1) + 0.3 * stats.norm.sf(x / v2) - alpha

        ref = optimize.brentq(tail, 0.1, 50.0, xtol=1e-13, rtol=8.9e-16)
        got = mixture_var(mix, d, alpha)
        assert got == pytest.approx(ref, abs=1e-8)

        # componentwise Gaussian tail mean: E[L 1{L > V}] = vol phi(V / vol)
        es_ref = (
            0.7 * v1 * stats.norm.pdf(ref / v1) + 0.3 * v2 * stats.norm.pdf(ref / v2)
        ) / alpha
        assert mixture_expected_shortfall(mix, d, alpha) == pytest.approx(
            es_ref, abs=1e-8
        )


def test_var_threshold_recovers_alpha():
    mix = _two_normal_mixture()
    d = np.array([1.0, 1.0])
    v = mixture_var(mix, d, 0.05)
    vol1 = math.sqrt(2.0)
    vol2 = math.sqrt(18.0)
    residual = 0.7 * marginal_tail(gaussian_generator(2), v / vol1) + 0.3 * (
        marginal_tail(gaussian_generator(2), v / vol2)
    )
    assert residual == pytest.approx(0.05, abs=1e-12)


def test_var_sits_between_component_vars():
    rng = np.random.default_rng(53)
    for _ in range(10):
        a = rng.uniform(0.5, 2.0)
        b = rng.uniform(2.5, 6.0)
        w = rng.uniform(0.2, 0.8)
        comps = [
            _component(gaussian_generator(1), [0.0], [[a * a]]),
            _component(student_generator(1, 6.0), [0.0], [[b * b]]),
        ]
        mix = MixtureModel(components=[(w, comps[0]), (1.0 - w, comps[1])])
        d = np.array([1.0])
        alpha = rng.uniform(0.01, 0.2)
        lo = min(var(c, d, alpha) for c in comps)
        hi = max(var(c, d, alpha) for c in comps)
        v = mixture_var(mix, d, alpha)
        assert lo - 1e-9 <= v <= hi + 1e-9


def test_mixture_es_dominates_var_and_var_monotone_in_alpha():
    comps = [
        _component(gaussian_generator(2), [0.001, 0.0], np.eye(2)),
        _component(student_generator(2, 4.0), [0.0, -0.002], [[3.0, 1.0], [1.0, 2.0]]),
    ]
    mix = MixtureModel(components=[(0.6, comps[0]), (0.4, comps[1])])
    d = np.array([2.0, 1.0])
    last = math.inf
    for alpha in (0.01, 0.025, 0.05, 0.1):
        v = mixture_var(mix, d, alpha)
        assert mixture_expected_shortfall(mix, d, alpha) > v
        assert v < last
        last = v


def test_es_accepts_precomputed_var():
    mix = _two_normal_mixture()
    d = np.array([2.0, -1.0])
    v = mixture_var(mix, d, 0.025)
    assert mixture_expected_shortfall(mix, d, 0.025, var=v) == pytest.approx(
        mixture_expected_shortfall(mix, d, 0.025), rel=1e-14
    )


def test_weight_validation():
    comp = _component(gaussian_generator(1), [0.0], [[1.0]])
    with pytest.raises(DomainError):
        MixtureModel(components=[(0.5, comp), (0.6, comp)])
    with pytest.raises(DomainError):
        MixtureModel(components=[(-0.1, comp), (1.1, comp)])
    with pytest.raises(DomainError):
        MixtureModel(components=[])


def test_component_dimension_mismatch():
    a = _component(gaussian_generator(1), [0.0], [[1.0]])
    b = _component(gaussian_generator(2), [0.0, 0.0], np.eye(2))
    with pytest.raises(DimensionError):
        MixtureModel(components=[(0.5, a), (0.5, b)])


def test_portfolio_dimension_mismatch():
    mix = _two_normal_mixture()
    with pytest.raises(DimensionError):
        mixture_var(mix, np.ones(3), 0.05)


def test_alpha_out_of_range():
    mix = _two_normal_mixture()
    d = np.array([1.0, 0.0])
    for alpha in (0.0, 0.5, 0.75):
        with pytest.raises(DomainError):
            mixture_var(mix, d, alpha)

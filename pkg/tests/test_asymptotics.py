"""Population matrices, bias vector, and the CDF process covariance."""

import math

import numpy as np
import pytest

from pendrm import (
    DimensionError,
    HTransform,
    IntegrationError,
    InvalidArgument,
    PenaltySpec,
    SingularityError,
    Theta,
    asymptotic_bias,
    g2_process_cov,
    lognormal_true_theta,
    population_matrices,
)
from pendrm.asymptotics import DistSpec

LOGN01 = DistSpec("lognormal", mu2=0.0, sigma=1.0)
LOG = HTransform("log")
ORIGIN = Theta(0.0, np.zeros(1))


def test_lognormal_mapping_reference_point():
    theta = lognormal_true_theta(1.0, 0.0, 1.0)
    assert theta.alpha == pytest.approx(-0.5)
    assert theta.beta[0] == pytest.approx(1.0)


def test_lognormal_mapping_null():
    theta = lognormal_true_theta(0.0, 0.0, 1.0)
    assert theta.alpha == 0.0 and theta.beta[0] == 0.0


def test_lognormal_mapping_general():
    theta = lognormal_true_theta(2.0, 1.0, math.sqrt(2.0))
    assert theta.alpha == pytest.approx(-0.75)
    assert theta.beta[0] == pytest.approx(0.5)


def test_population_matrices_standard_point():
    pm = population_matrices(LOGN01, ORIGIN, 1.0, LOG)
    np.testing.assert_allclose(pm.A, np.diag([0.5, 0.5]), atol=1e-8)
    np.testing.assert_allclose(pm.V, [[0.0, 0.0], [0.0, 0.25]], atol=1e-8)
    np.testing.assert_allclose(pm.S, np.diag([0.25, 0.25]), atol=1e-8)
    assert pm.sigma[1, 1] == pytest.approx(4.0, abs=1e-8)


def test_population_scaling_identity_off_null():
    theta = lognormal_true_theta(1.0, 0.0, 1.0)
    pm = population_matrices(LOGN01, theta, 0.5, LOG)
    np.testing.assert_allclose(pm.S, (0.5 / 1.5) * pm.A, atol=1e-14)


def test_asymptotic_bias_zero_weight():
    out = asymptotic_bias(0.0, np.diag([0.25, 0.25]), np.ones(1), PenaltySpec(q=2.0, lam=1.0))
    np.testing.assert_allclose(out, np.zeros(2))


def test_asymptotic_bias_zero_slope():
    out = asymptotic_bias(1.0, np.diag([0.25, 0.25]), np.zeros(1), PenaltySpec(q=2.0, lam=1.0))
    np.testing.assert_allclose(out, np.zeros(2))


def test_asymptotic_bias_hand_example():
    out = asymptotic_bias(0.5, np.diag([0.25, 0.25]), np.ones(1), PenaltySpec(q=2.0, lam=0.5))
    np.testing.assert_allclose(out, [0.0, 4.0], atol=1e-12)


def test_asymptotic_bias_singular_matrix():
    with pytest.raises(SingularityError):
        asymptotic_bias(1.0, np.zeros((2, 2)), np.ones(1), PenaltySpec(q=2.0, lam=1.0))


def test_process_cov_vanishes_at_infinities():
    for point in (np.inf, -np.inf):
        assert g2_process_cov(point, point, LOGN01, ORIGIN, 1.0, LOG) == pytest.approx(
            0.0, abs=1e-10
        )


def test_process_cov_median_value():
    value = g2_process_cov(1.0, 1.0, LOGN01, ORIGIN, 1.0, LOG)
    assert value == pytest.approx(0.40915494309189534, abs=1e-6)


def test_process_cov_symmetric_in_arguments():
    a = g2_process_cov(0.7, 2.3, LOGN01, ORIGIN, 1.0, LOG)
    b = g2_process_cov(2.3, 0.7, LOGN01, ORIGIN, 1.0, LOG)
    assert a == pytest.approx(b, abs=1e-12)


def test_process_cov_matrix_positive_semidefinite():
    pts = [0.5, 1.0, 2.0]
    K = np.array([[g2_process_cov(s, t, LOGN01, ORIGIN, 1.0, LOG) for t in pts] for s in pts])
    np.testing.assert_allclose(K, K.T, atol=1e-12)
    assert np.linalg.eigvalsh(K).min() >= -1e-10


def test_custom_uniform_baseline():
    uni = DistSpec("custom", density=lambda x: 1.0, support=(0.0, 1.0))
    pm = population_matrices(uni, ORIGIN, 1.0, HTransform("identity"))
    np.testing.assert_allclose(
        pm.A, [[0.5, 0.25], [0.25, 1.0 / 6.0]], atol=1e-8
    )


def test_custom_density_must_normalize():
    with pytest.raises(InvalidArgument):
        DistSpec("custom", density=lambda x: 2.0, support=(0.0, 1.0))


def test_custom_density_needs_support():
    with pytest.raises(InvalidArgument):
        DistSpec("custom", density=lambda x: 1.0)
    with pytest.raises(InvalidArgument):
        DistSpec("custom", density=lambda x: 1.0, support=(1.0, 1.0))


def test_heavy_tailed_moment_raises_integration_error():
    heavy = DistSpec(
        "custom",
        density=lambda x: 2.0 / (math.pi * (1.0 + x * x)),
        support=(0.0, np.inf),
    )
    with pytest.raises(IntegrationError):
        population_matrices(heavy, ORIGIN, 1.0, HTransform("identity"))


def test_lognormal_spec_validation():
    with pytest.raises(InvalidArgument):
        DistSpec("lognormal", sigma=0.0)
    with pytest.raises(InvalidArgument):
        DistSpec("weibull")


def test_dimension_mismatch_rejected():
    wide = Theta(0.0, np.zeros(2))
    with pytest.raises(DimensionError):
        population_matrices(LOGN01, wide, 1.0, LOG)


def test_rho_must_be_positive():
    with pytest.raises(InvalidArgument):
        population_matrices(LOGN01, ORIGIN, 0.0, LOG)

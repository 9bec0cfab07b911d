"""Unit tests for the perturbation theory in the confinement strength h."""
import numpy as np
import pytest

from kvmf.errors import SingularParameterError
from kvmf.kato import (PerturbativeMode, _lambda2_closed, _lambda2_product,
                       alpha_of, gamma_c_perturbative, lambda2,
                       perturbation_coeffs, perturbative_state, rho1,
                       threshold_shift_coefficient)
from kvmf.model import TWO_PI, ModelParams
from kvmf.stationary import stationarity_residual


def _params(coupling=2.0, tilt=0.5, gamma_noise=1.0):
    return ModelParams(gamma_noise=gamma_noise, coupling=coupling, tilt=tilt)


def test_alpha_of():
    assert alpha_of(_params(coupling=2.0)) == pytest.approx(0.0)
    assert alpha_of(_params(coupling=3.0)) == pytest.approx(0.5)


def test_rho1_closed_form():
    p = _params(coupling=1.5, tilt=0.5)  # alpha = -0.25
    corr = rho1(p)
    alpha, f = -0.25, 0.5
    denom = TWO_PI * (alpha**2 + f**2)
    assert corr.cos_coeffs[0] == pytest.approx(-alpha / denom)
    assert corr.sin_coeffs[0] == pytest.approx(f / denom)


def test_rho1_singular_at_origin():
    p = _params(coupling=2.0, tilt=0.0)  # alpha = 0, F = 0
    with pytest.raises(SingularParameterError):
        rho1(p)


def test_rho1_requires_monochromatic():
    p = ModelParams(gamma_noise=1.0, coupling=2.0, tilt=0.5,
                    potential=(1.0, 0.5))
    with pytest.raises(SingularParameterError):
        rho1(p)


def test_perturbative_state_stationarity_order_h2():
    """rho0 + h rho1 satisfies the stationary equation up to O(h^2)."""
    p = _params(coupling=1.5, tilt=0.5)
    residuals = []
    for h in (0.05, 0.025, 0.0125):
        state = perturbative_state(p.replace(field=h), h)
        residuals.append(stationarity_residual(state, p.replace(field=h)))
    # quartering h should quarter the residual (quadratic remainder)
    assert residuals[1] / residuals[0] == pytest.approx(0.25, rel=0.1)
    assert residuals[2] / residuals[1] == pytest.approx(0.25, rel=0.1)


def test_perturbative_state_warns_when_h_large():
    p = _params(coupling=2.0, tilt=0.1)
    with pytest.warns(UserWarning):
        perturbative_state(p, 0.5)


def test_lambda2_reference_value():
    val = lambda2(_params(coupling=2.0, tilt=0.5))  # alpha = 0
    assert val.real == pytest.approx(-1.0769230769230769, abs=1e-12)
    assert val.imag == pytest.approx(0.3846153846153846, abs=1e-12)


def test_lambda2_dual_paths_agree():
    for alpha in (-0.4, -0.1, 0.0, 0.1, 0.4):
        for f in (0.25, 0.5, 1.0):
            closed = _lambda2_closed(alpha, f, 1.0)
            _, _, product = _lambda2_product(alpha, f, 1.0)
            assert abs(closed - product) <= 1e-13 * max(1.0, abs(closed))


def test_lambda2_requires_positive_tilt():
    with pytest.raises(SingularParameterError):
        lambda2(_params(tilt=0.0))


def test_perturbation_coeffs_consistency():
    p = _params(coupling=2.2, tilt=0.5)
    co = perturbation_coeffs(p)
    assert co.lambda0 == pytest.approx(co.alpha - 0.5j)
    # lambda2 = -a*b/(mu2 - lambda0) with mu2 = -4 Gamma - 2 i F
    mu2 = -4.0 - 1.0j
    assert co.lambda2 == pytest.approx(-co.a_coeff * co.b_coeff / (mu2 - co.lambda0))


def test_threshold_shift_coefficient_value():
    # Gamma (3 F^2 + 8 Gamma^2) / (F^2 (16 Gamma^2 + F^2)) at F=0.5, Gamma=1
    assert threshold_shift_coefficient(0.5, 1.0) == pytest.approx(
        2.1538461538461537, abs=1e-12)
    with pytest.raises(SingularParameterError):
        threshold_shift_coefficient(0.0, 1.0)


def test_gamma_c_perturbative_modes_agree_for_small_h():
    for h in (0.02, 0.05, 0.1):
        lead = gamma_c_perturbative(h, 0.5, 1.0,
                                    PerturbativeMode.LEADING_ORDER).gamma_c
        sc = gamma_c_perturbative(h, 0.5, 1.0,
                                  PerturbativeMode.SELF_CONSISTENT_ALPHA).gamma_c
        assert lead == pytest.approx(2.0 + h * h * 2.1538461538461537, abs=1e-12)
        assert abs(lead - sc) < 5.0 * h**4  # differ at fourth order
    assert gamma_c_perturbative(0.0, 0.5, 1.0).gamma_c == pytest.approx(2.0)


def test_gamma_c_perturbative_accepts_string_mode():
    res = gamma_c_perturbative(0.1, 0.5, 1.0, "self_consistent_alpha")
    assert res.gamma_c > 2.0
